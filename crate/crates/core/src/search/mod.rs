//! Balanced-diagonal search: an exact backtracking oracle, a local-search
//! descent over row/column transpositions and 3-cycles, the constructive
//! two-symbol algorithm, and k-plex search/decomposition.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::square::{Diagonal, FrequencySquare};

pub mod descent;
pub mod exact;
pub mod m2;
pub mod plex;

pub use descent::{swap_descent, DescentState, Move, MoveKind};
pub use exact::{enumerate_balanced, find_exact};
pub use m2::{constructive_m2, find_pattern_2x2, M2Result, Pattern2x2};
pub use plex::{decompose_plex, find_k_plex, find_k_plex_seeded, PlexSelection};

/// Orders up to this size get an unbudgeted exact fallback in [`find_balanced`].
pub const EXACT_FALLBACK_LIMIT: usize = 12;
/// Node budget for the exact fallback above [`EXACT_FALLBACK_LIMIT`].
pub const DEFAULT_EXACT_BUDGET: u64 = 50_000_000;
/// Seed and restart count used by [`find_balanced`].
pub const DEFAULT_DESCENT_SEED: u64 = 0x5eed;
pub const DEFAULT_RESTARTS: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    Found,
    /// Only produced by a completed exhaustive search.
    ProvedAbsent,
    Unknown,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub restarts: u32,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub status: SearchStatus,
    pub witness: Option<Diagonal>,
    pub stats: SearchStats,
}

impl SearchOutcome {
    pub(crate) fn new(status: SearchStatus, witness: Option<Diagonal>, nodes: u64, restarts: u32, start: Instant) -> Self {
        debug_assert_eq!(status == SearchStatus::Found, witness.is_some());
        Self {
            status,
            witness,
            stats: SearchStats { nodes, restarts, elapsed_ms: start.elapsed().as_secs_f64() * 1e3 },
        }
    }

    pub fn is_found(&self) -> bool {
        self.status == SearchStatus::Found
    }
}

/// Descent first; on failure, exact search (unbudgeted up to
/// [`EXACT_FALLBACK_LIMIT`], budgeted above it).
pub fn find_balanced(square: &FrequencySquare) -> SearchOutcome {
    find_balanced_with(square, DEFAULT_DESCENT_SEED, DEFAULT_RESTARTS, None)
}

/// [`find_balanced`] with explicit descent parameters and exact-fallback budget.
/// A budget of `None` means the default policy.
pub fn find_balanced_with(square: &FrequencySquare, seed: u64, restarts: u32, budget: Option<u64>) -> SearchOutcome {
    let start = Instant::now();
    let descent = swap_descent(square, seed, restarts);
    if descent.is_found() {
        return descent;
    }
    let budget = budget.or((square.n() > EXACT_FALLBACK_LIMIT).then_some(DEFAULT_EXACT_BUDGET));
    let exact = find_exact(square, budget);
    SearchOutcome::new(
        exact.status,
        exact.witness,
        descent.stats.nodes + exact.stats.nodes,
        descent.stats.restarts,
        start,
    )
}
