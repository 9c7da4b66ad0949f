use thiserror::Error;

/// Errors produced anywhere in the crate.
///
/// Row, column and symbol numbers carried by the variants are 1-based, as they
/// are in every external format.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("grid is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },

    #[error("dimension mismatch: n = {n} but m * lambda = {m} * {lambda}")]
    DimensionMismatch { n: usize, m: usize, lambda: usize },

    #[error("order {n} exceeds the supported maximum of {max}")]
    OrderTooLarge { n: usize, max: usize },

    #[error("symbol {symbol} at ({row}, {col}) is outside 1..={m}")]
    SymbolOutOfRange { row: usize, col: usize, symbol: i64, m: usize },

    #[error("row {row} contains symbol {symbol} {count} times, expected {expected}")]
    RowCountViolation { row: usize, symbol: usize, count: usize, expected: usize },

    #[error("column {col} contains symbol {symbol} {count} times, expected {expected}")]
    ColumnCountViolation { col: usize, symbol: usize, count: usize, expected: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("not a permutation of 1..={len}")]
    NotAPermutation { len: usize },

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("{alpha} does not divide {m}")]
    NotADivisor { alpha: usize, m: usize },

    #[error("entry {given} at ({row}, {col}) does not match B-square entry {actual}")]
    EntryMismatch { row: usize, col: usize, given: usize, actual: usize },

    #[error("not a plex: {0}")]
    NotAPlex(String),

    #[error("plex width {k} does not divide lambda = {lambda}")]
    DivisibilityViolation { k: usize, lambda: usize },

    #[error("order {0} is odd")]
    OddOrder(usize),

    #[error("expected a two-symbol square, got m = {0}")]
    WrongSymbolCount(usize),

    #[error("expected a Latin square (lambda = 1)")]
    NotLatin,

    #[error("search budget of {nodes} nodes exhausted")]
    BudgetExhausted { nodes: u64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("too large: {0}")]
    TooLarge(String),

    #[error("(m - 1) * lambda = ({m} - 1) * {lambda} is odd; the conjecture does not cover this case")]
    ParityPreconditionFailed { m: usize, lambda: usize },

    #[error("descent stalled: {0}")]
    Stalled(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
