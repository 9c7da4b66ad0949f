//! Frequency squares `F(m lambda; lambda^m)` and their balanced diagonals.
//!
//! A frequency square of order `n = m lambda` uses the symbols `1..=m`, each
//! exactly `lambda` times in every row and column. A diagonal is a choice of
//! one cell per row and column; it is balanced when every symbol occurs on it
//! exactly `lambda` times. For `lambda = 1` these are Latin squares and transversals.
//!
//! - [`square`]: the validated square, diagonal and transform types.
//! - [`constructions`]: the named squares `A_{2 lambda}`, `B_n`, blow-ups,
//!   symbol merging, the `Delta` invariant, the plex construction and a seeded sampler.
//! - [`search`]: exact search, greedy descent, the constructive two-symbol
//!   algorithm and k-plexes.
//! - [`equivalence`]: equivalence certificates and canonical keys.
//! - [`verify`]: exhaustive and sampled checks producing reports.

pub mod constructions;
pub mod equivalence;
pub mod error;
pub mod par;
pub mod search;
pub mod square;
pub mod verify;

pub use error::{Error, Result};
pub use square::{Diagonal, FrequencySquare, Kind, SymbolCounts, Transform, MAX_ORDER};
