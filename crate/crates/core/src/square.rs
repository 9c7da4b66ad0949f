//! Frequency squares, diagonals and the equivalence-group transforms acting on them.
//!
//! Symbols are stored 1-based (`1..=m`). Row and column indices are 0-based in
//! the Rust API and 1-based in every serialized form.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported side length. Column sets fit in a `u64` bitmask.
pub const MAX_ORDER: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    General,
    /// `m = n`, `lambda = 1`.
    Latin,
}

/// An `n x n` array over symbols `1..=m` in which every symbol occurs exactly
/// `lambda` times in every row and every column (type `F(m*lambda; lambda^m)`).
///
/// Values are immutable once validated.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "SquareDoc", try_from = "SquareDoc")]
pub struct FrequencySquare {
    n: usize,
    m: usize,
    lambda: usize,
    cells: Vec<u8>,
}

impl FrequencySquare {
    /// Validates a grid of integers as a frequency square of type `F(m*lambda; lambda^m)`.
    pub fn validate<T>(grid: &[Vec<T>], m: usize, lambda: usize) -> Result<Self>
    where
        T: Copy + Into<i64>,
    {
        let n = grid.len();
        for (r, row) in grid.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare { row: r + 1, len: row.len(), expected: n });
            }
        }
        let mut cells = Vec::with_capacity(n * n);
        for (r, row) in grid.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                let v: i64 = v.into();
                if v < 1 || v > m as i64 {
                    return Err(Error::SymbolOutOfRange { row: r + 1, col: c + 1, symbol: v, m });
                }
                cells.push(v as u8);
            }
        }
        Self::from_cells(n, m, lambda, cells)
    }

    /// Validates a row-major cell vector.
    pub fn from_cells(n: usize, m: usize, lambda: usize, cells: Vec<u8>) -> Result<Self> {
        if n == 0 || m == 0 || lambda == 0 || m * lambda != n {
            return Err(Error::DimensionMismatch { n, m, lambda });
        }
        if n > MAX_ORDER {
            return Err(Error::OrderTooLarge { n, max: MAX_ORDER });
        }
        if cells.len() != n * n {
            return Err(Error::LengthMismatch { expected: n * n, got: cells.len() });
        }
        if let Some(i) = cells.iter().position(|&s| s == 0 || s as usize > m) {
            return Err(Error::SymbolOutOfRange {
                row: i / n + 1,
                col: i % n + 1,
                symbol: cells[i] as i64,
                m,
            });
        }
        let mut counts = vec![0usize; m];
        for r in 0..n {
            counts.fill(0);
            for &s in &cells[r * n..(r + 1) * n] {
                counts[s as usize - 1] += 1;
            }
            if let Some(s) = counts.iter().position(|&k| k != lambda) {
                return Err(Error::RowCountViolation {
                    row: r + 1,
                    symbol: s + 1,
                    count: counts[s],
                    expected: lambda,
                });
            }
        }
        for c in 0..n {
            counts.fill(0);
            for r in 0..n {
                counts[cells[r * n + c] as usize - 1] += 1;
            }
            if let Some(s) = counts.iter().position(|&k| k != lambda) {
                return Err(Error::ColumnCountViolation {
                    col: c + 1,
                    symbol: s + 1,
                    count: counts[s],
                    expected: lambda,
                });
            }
        }
        Ok(Self { n, m, lambda, cells })
    }

    /// Skips validation. Callers must uphold the frequency invariants.
    pub(crate) fn from_cells_unchecked(n: usize, m: usize, lambda: usize, cells: Vec<u8>) -> Self {
        debug_assert!(Self::from_cells(n, m, lambda, cells.clone()).is_ok());
        Self { n, m, lambda, cells }
    }

    /// In-place overwrite for enumerators that reuse one buffer. Callers must
    /// leave a valid square behind.
    pub(crate) fn cells_mut(&mut self) -> &mut [u8] {
        &mut self.cells
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn kind(&self) -> Kind {
        if self.lambda == 1 {
            Kind::Latin
        } else {
            Kind::General
        }
    }

    /// Symbol (1-based) at 0-based `(r, c)`.
    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.cells[r * self.n + c]
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.cells[r * self.n..(r + 1) * self.n]
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        self.cells.chunks(self.n).map(<[u8]>::to_vec).collect()
    }

    /// Bitmask of the columns of row `r` holding symbol `s`.
    pub fn symbol_mask(&self, r: usize, s: u8) -> u64 {
        self.row(r)
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v == s)
            .fold(0u64, |acc, (c, _)| acc | (1 << c))
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut cells = vec![0u8; n * n];
        for r in 0..n {
            for c in 0..n {
                cells[c * n + r] = self.cells[r * n + c];
            }
        }
        Self { cells, ..*self }
    }

    /// Symbol counts along a diagonal.
    pub fn diagonal_counts(&self, d: &Diagonal) -> Result<SymbolCounts> {
        self.check_diagonal(d)?;
        let mut counts = vec![0usize; self.m];
        for (r, &c) in d.sigma.iter().enumerate() {
            counts[self.get(r, c) as usize - 1] += 1;
        }
        Ok(SymbolCounts { counts })
    }

    /// True iff every symbol occurs exactly `lambda` times on the diagonal.
    pub fn is_balanced(&self, d: &Diagonal) -> Result<bool> {
        Ok(self.diagonal_counts(d)?.counts.iter().all(|&k| k == self.lambda))
    }

    fn check_diagonal(&self, d: &Diagonal) -> Result<()> {
        if d.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: d.len() });
        }
        Ok(())
    }

    /// Applies `t`: transpose first, then rows, then columns, then symbols.
    pub fn apply_transform(&self, t: &Transform) -> Result<Self> {
        t.check_sizes(self.n, self.m)?;
        let n = self.n;
        let mut cells = vec![0u8; n * n];
        for i in 0..n {
            for j in 0..n {
                let s = if t.transposed { self.get(j, i) } else { self.get(i, j) };
                cells[t.rows[i] * n + t.cols[j]] = t.symbols[s as usize - 1];
            }
        }
        Ok(Self { cells, ..*self })
    }

    /// Plain text form: a header line `n m lambda` followed by `n` rows.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    /// Parses the plain text form. Blank lines and lines starting with `#` are ignored.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))?;
        let header = parse_ints(header)?;
        let [n, m, lambda] = header[..] else {
            return Err(Error::Parse(format!("header must be `n m lambda`, got {} fields", header.len())));
        };
        let to_usize = |v: i64| usize::try_from(v).map_err(|_| Error::Parse(format!("negative header value {v}")));
        let (n, m, lambda) = (to_usize(n)?, to_usize(m)?, to_usize(lambda)?);
        let grid = lines.map(parse_ints).collect::<Result<Vec<_>>>()?;
        if grid.len() != n {
            return Err(Error::Parse(format!("header declares {n} rows, found {}", grid.len())));
        }
        Self::validate(&grid, m, lambda)
    }

    /// Parses either the structured (JSON) form or the plain text form.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
        } else {
            Self::parse_text(text)
        }
    }
}

fn parse_ints(line: &str) -> Result<Vec<i64>> {
    line.split_whitespace()
        .map(|t| t.parse::<i64>().map_err(|_| Error::Parse(format!("not an integer: {t:?}"))))
        .collect()
}

impl fmt::Display for FrequencySquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {} {}", self.n, self.m, self.lambda)?;
        for row in self.cells.chunks(self.n) {
            let mut first = true;
            for s in row {
                if !first {
                    f.write_str(" ")?;
                }
                first = false;
                write!(f, "{s}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl fmt::Debug for FrequencySquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F({}; {}^{})\n{}", self.n, self.lambda, self.m, self)
    }
}

/// Structured document form of a square.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SquareDoc {
    pub n: usize,
    pub m: usize,
    pub lambda: usize,
    pub grid: Vec<Vec<u32>>,
}

impl From<FrequencySquare> for SquareDoc {
    fn from(sq: FrequencySquare) -> Self {
        let grid = sq.cells.chunks(sq.n).map(|r| r.iter().map(|&s| s as u32).collect()).collect();
        SquareDoc { n: sq.n, m: sq.m, lambda: sq.lambda, grid }
    }
}

impl TryFrom<SquareDoc> for FrequencySquare {
    type Error = Error;

    fn try_from(doc: SquareDoc) -> Result<Self> {
        if doc.grid.len() != doc.n {
            return Err(Error::LengthMismatch { expected: doc.n, got: doc.grid.len() });
        }
        FrequencySquare::validate(&doc.grid, doc.m, doc.lambda)
    }
}

/// A diagonal: row `i` uses column `sigma[i]`. Serialized 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", try_from = "Vec<usize>")]
pub struct Diagonal {
    sigma: Vec<usize>,
}

impl Diagonal {
    /// From 0-based column indices.
    pub fn new(sigma: Vec<usize>) -> Result<Self> {
        if !is_permutation(&sigma) {
            return Err(Error::NotAPermutation { len: sigma.len() });
        }
        Ok(Self { sigma })
    }

    pub fn from_one_based(sigma: &[usize]) -> Result<Self> {
        let zero: Option<Vec<usize>> = sigma.iter().map(|&c| c.checked_sub(1)).collect();
        Self::new(zero.ok_or(Error::NotAPermutation { len: sigma.len() })?)
    }

    pub(crate) fn new_unchecked(sigma: Vec<usize>) -> Self {
        debug_assert!(is_permutation(&sigma));
        Self { sigma }
    }

    pub fn identity(n: usize) -> Self {
        Self { sigma: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// 0-based column chosen in each row.
    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.sigma.iter().map(|c| c + 1).collect()
    }

    /// The same cells viewed in the transposed square.
    pub fn inverse(&self) -> Self {
        Self { sigma: invert(&self.sigma) }
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.sigma.iter().copied().enumerate()
    }

    /// Transports the diagonal along `t` so that balance is preserved.
    pub fn map(&self, t: &Transform) -> Result<Self> {
        if t.rows.len() != self.len() || t.cols.len() != self.len() {
            return Err(Error::SizeMismatch(format!(
                "transform of order {} applied to diagonal of length {}",
                t.rows.len(),
                self.len()
            )));
        }
        let base = if t.transposed { invert(&self.sigma) } else { self.sigma.clone() };
        let mut sigma = vec![0; self.len()];
        for (i, &c) in base.iter().enumerate() {
            sigma[t.rows[i]] = t.cols[c];
        }
        Ok(Self { sigma })
    }
}

impl From<Diagonal> for Vec<usize> {
    fn from(d: Diagonal) -> Self {
        d.to_one_based()
    }
}

impl TryFrom<Vec<usize>> for Diagonal {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Diagonal::from_one_based(&v)
    }
}

impl fmt::Display for Diagonal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sigma.iter().map(|c| (c + 1).to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Symbol occurrence counts; index `s - 1` holds the count of symbol `s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolCounts {
    pub counts: Vec<usize>,
}

impl SymbolCounts {
    pub fn get(&self, symbol: u8) -> usize {
        self.counts[symbol as usize - 1]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// An element of the equivalence group: optional transpose, then row, column
/// and symbol permutations (applied in that order).
///
/// `rows[i]` is the new position of (post-transpose) row `i`; likewise for
/// columns. `symbols[s - 1]` is the new label of symbol `s`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Transform {
    pub transposed: bool,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub symbols: Vec<u8>,
}

impl Transform {
    pub fn identity(n: usize, m: usize) -> Self {
        Self {
            transposed: false,
            rows: (0..n).collect(),
            cols: (0..n).collect(),
            symbols: (1..=m as u8).collect(),
        }
    }

    pub fn transpose(n: usize, m: usize) -> Self {
        Self { transposed: true, ..Self::identity(n, m) }
    }

    pub fn swap_rows(n: usize, m: usize, a: usize, b: usize) -> Self {
        let mut t = Self::identity(n, m);
        t.rows.swap(a, b);
        t
    }

    /// Validates every component. Row/column permutations are 0-based,
    /// symbol permutation 1-based.
    pub fn new(transposed: bool, rows: Vec<usize>, cols: Vec<usize>, symbols: Vec<u8>) -> Result<Self> {
        if rows.len() != cols.len() {
            return Err(Error::SizeMismatch("row and column permutations differ in length".into()));
        }
        if !is_permutation(&rows) {
            return Err(Error::NotAPermutation { len: rows.len() });
        }
        if !is_permutation(&cols) {
            return Err(Error::NotAPermutation { len: cols.len() });
        }
        let zero: Vec<usize> = symbols.iter().map(|&s| (s as usize).wrapping_sub(1)).collect();
        if !is_permutation(&zero) {
            return Err(Error::NotAPermutation { len: symbols.len() });
        }
        Ok(Self { transposed, rows, cols, symbols })
    }

    pub fn order(&self) -> usize {
        self.rows.len()
    }

    fn check_sizes(&self, n: usize, m: usize) -> Result<()> {
        if self.rows.len() != n || self.cols.len() != n || self.symbols.len() != m {
            return Err(Error::SizeMismatch(format!(
                "transform sized ({}, {}) applied to square with n = {n}, m = {m}",
                self.rows.len(),
                self.symbols.len()
            )));
        }
        Ok(())
    }

    pub fn inverse(&self) -> Self {
        let inv_symbols = {
            let mut v = vec![0u8; self.symbols.len()];
            for (i, &s) in self.symbols.iter().enumerate() {
                v[s as usize - 1] = i as u8 + 1;
            }
            v
        };
        if self.transposed {
            Self {
                transposed: true,
                rows: invert(&self.cols),
                cols: invert(&self.rows),
                symbols: inv_symbols,
            }
        } else {
            Self {
                transposed: false,
                rows: invert(&self.rows),
                cols: invert(&self.cols),
                symbols: inv_symbols,
            }
        }
    }

    /// The transform equivalent to applying `self` and then `next`.
    pub fn then(&self, next: &Transform) -> Self {
        let symbols = self.symbols.iter().map(|&s| next.symbols[s as usize - 1]).collect();
        if next.transposed {
            Self {
                transposed: !self.transposed,
                rows: self.cols.iter().map(|&c| next.rows[c]).collect(),
                cols: self.rows.iter().map(|&r| next.cols[r]).collect(),
                symbols,
            }
        } else {
            Self {
                transposed: self.transposed,
                rows: self.rows.iter().map(|&r| next.rows[r]).collect(),
                cols: self.cols.iter().map(|&c| next.cols[c]).collect(),
                symbols,
            }
        }
    }
}

/// Serialized form: four 1-based permutations plus the transpose flag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformDoc {
    pub transposed: bool,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub symbols: Vec<u8>,
}

impl Serialize for Transform {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TransformDoc {
            transposed: self.transposed,
            rows: self.rows.iter().map(|r| r + 1).collect(),
            cols: self.cols.iter().map(|c| c + 1).collect(),
            symbols: self.symbols.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Transform {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = TransformDoc::deserialize(d)?;
        let zero = |v: Vec<usize>| v.into_iter().map(|x| x.wrapping_sub(1)).collect::<Vec<_>>();
        Transform::new(doc.transposed, zero(doc.rows), zero(doc.cols), doc.symbols).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    for &x in p {
        if x >= p.len() || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

pub(crate) fn invert(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x] = i;
    }
    inv
}
