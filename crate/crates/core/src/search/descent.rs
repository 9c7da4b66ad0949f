//! Greedy local search over row/column rearrangements.
//!
//! The state is the current diagonal, i.e. the main diagonal after the
//! rearrangements applied so far. The objective is `sum_s |count(s) - lambda|`;
//! each step applies the best strictly improving move from the neighbourhood
//! of row transpositions and row 3-cycles (both orientations), taking the
//! first in encoding order on ties. At a local minimum the diagonal is
//! perturbed by `2n` random transpositions.
//!
//! A column move changes the diagonal in exactly the way some row move does
//! (it permutes the columns assigned to a set of rows), so the neighbourhood
//! only enumerates row moves. Column moves remain available through
//! [`DescentState::apply`].

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::search::{SearchOutcome, SearchStatus};
use crate::square::{Diagonal, FrequencySquare};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MoveKind {
    RowSwap,
    ColSwap,
    RowThreeCycle,
    ColThreeCycle,
}

/// A rearrangement of two or three rows or columns.
///
/// `RowThreeCycle [a, b, c]` moves row `a` to the place of `b`, `b` to `c` and
/// `c` to `a`; on the diagonal, row `a` takes the column of `c` and so on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Move {
    pub kind: MoveKind,
    pub indices: [usize; 3],
}

impl Move {
    pub fn row_swap(a: usize, b: usize) -> Self {
        Self { kind: MoveKind::RowSwap, indices: [a, b, usize::MAX] }
    }

    pub fn col_swap(a: usize, b: usize) -> Self {
        Self { kind: MoveKind::ColSwap, indices: [a, b, usize::MAX] }
    }

    pub fn row_cycle(a: usize, b: usize, c: usize) -> Self {
        Self { kind: MoveKind::RowThreeCycle, indices: [a, b, c] }
    }

    pub fn col_cycle(a: usize, b: usize, c: usize) -> Self {
        Self { kind: MoveKind::ColThreeCycle, indices: [a, b, c] }
    }

    pub fn arity(&self) -> usize {
        match self.kind {
            MoveKind::RowSwap | MoveKind::ColSwap => 2,
            MoveKind::RowThreeCycle | MoveKind::ColThreeCycle => 3,
        }
    }

    /// Distinct and below `n`.
    pub fn is_valid(&self, n: usize) -> bool {
        let idx = &self.indices[..self.arity()];
        idx.iter().all(|&i| i < n) && (0..idx.len()).all(|i| (i + 1..idx.len()).all(|j| idx[i] != idx[j]))
    }
}

/// Current diagonal of a descent plus its symbol counts and objective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescentState {
    sigma: Vec<usize>,
    inverse: Vec<usize>,
    counts: Vec<i64>,
    lambda: i64,
    objective: i64,
}

impl DescentState {
    pub fn new(square: &FrequencySquare, d: &Diagonal) -> Self {
        let counts = square
            .diagonal_counts(d)
            .expect("diagonal length matches square")
            .counts
            .iter()
            .map(|&k| k as i64)
            .collect();
        let lambda = square.lambda() as i64;
        let mut st = Self {
            sigma: d.sigma().to_vec(),
            inverse: d.inverse().sigma().to_vec(),
            counts,
            lambda,
            objective: 0,
        };
        st.objective = st.counts.iter().map(|&k| (k - lambda).abs()).sum();
        st
    }

    pub fn objective(&self) -> i64 {
        self.objective
    }

    pub fn diagonal(&self) -> Diagonal {
        Diagonal::new_unchecked(self.sigma.clone())
    }

    /// Objective from a full recount.
    pub fn recount(&self, square: &FrequencySquare) -> i64 {
        let mut counts = vec![0i64; square.m()];
        for (r, &c) in self.sigma.iter().enumerate() {
            counts[square.get(r, c) as usize - 1] += 1;
        }
        counts.iter().map(|&k| (k - self.lambda).abs()).sum()
    }

    /// Rows touched by `mv` and the column each would receive.
    fn reassignment(&self, mv: &Move) -> ([(usize, usize); 3], usize) {
        let [a, b, c] = mv.indices;
        let s = &self.sigma;
        let inv = &self.inverse;
        match mv.kind {
            MoveKind::RowSwap => ([(a, s[b]), (b, s[a]), (0, 0)], 2),
            MoveKind::RowThreeCycle => ([(a, s[c]), (b, s[a]), (c, s[b])], 3),
            MoveKind::ColSwap => ([(inv[a], b), (inv[b], a), (0, 0)], 2),
            MoveKind::ColThreeCycle => ([(inv[a], b), (inv[b], c), (inv[c], a)], 3),
        }
    }

    /// Change in objective if `mv` were applied.
    pub fn delta(&self, square: &FrequencySquare, mv: &Move) -> i64 {
        let (changes, k) = self.reassignment(mv);
        // At most six symbols are touched; track their net count changes.
        let mut touched = [(0usize, 0i64); 6];
        let mut len = 0;
        let mut bump = |s: usize, d: i64| {
            if let Some(e) = touched[..len].iter_mut().find(|e| e.0 == s) {
                e.1 += d;
            } else {
                touched[len] = (s, d);
                len += 1;
            }
        };
        for &(row, col) in &changes[..k] {
            bump(square.get(row, self.sigma[row]) as usize - 1, -1);
            bump(square.get(row, col) as usize - 1, 1);
        }
        touched[..len]
            .iter()
            .map(|&(s, d)| {
                let old = self.counts[s];
                (old + d - self.lambda).abs() - (old - self.lambda).abs()
            })
            .sum()
    }

    pub fn apply(&mut self, square: &FrequencySquare, mv: &Move) {
        let delta = self.delta(square, mv);
        let (changes, k) = self.reassignment(mv);
        for &(row, _) in &changes[..k] {
            self.counts[square.get(row, self.sigma[row]) as usize - 1] -= 1;
        }
        for &(row, col) in &changes[..k] {
            self.sigma[row] = col;
            self.inverse[col] = row;
            self.counts[square.get(row, col) as usize - 1] += 1;
        }
        self.objective += delta;
    }
}

/// Neighbourhood in encoding order: row swaps `(a, b)` with `a < b`, then
/// row 3-cycles `(a, b, c)` and `(a, c, b)` with `a < b < c`.
fn neighbourhood(n: usize) -> Vec<Move> {
    let mut moves = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            moves.push(Move::row_swap(a, b));
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                moves.push(Move::row_cycle(a, b, c));
                moves.push(Move::row_cycle(a, c, b));
            }
        }
    }
    moves
}

/// Greedy descent from the main diagonal with up to `restarts` randomized restarts.
///
/// Returns `Found` or `Unknown`, never `ProvedAbsent`. `stats.nodes` counts
/// evaluated moves.
pub fn swap_descent(square: &FrequencySquare, seed: u64, restarts: u32) -> SearchOutcome {
    let start = Instant::now();
    let n = square.n();
    let moves = neighbourhood(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = DescentState::new(square, &Diagonal::identity(n));
    let mut nodes = 0u64;
    let mut used = 0u32;
    loop {
        if state.objective == 0 {
            return SearchOutcome::new(SearchStatus::Found, Some(state.diagonal()), nodes, used, start);
        }
        let mut best: Option<(i64, &Move)> = None;
        for mv in &moves {
            nodes += 1;
            let d = state.delta(square, mv);
            if d < 0 && best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, mv));
            }
        }
        if let Some((_, mv)) = best {
            state.apply(square, mv);
            continue;
        }
        if used == restarts || n < 2 {
            return SearchOutcome::new(SearchStatus::Unknown, None, nodes, used, start);
        }
        used += 1;
        for _ in 0..2 * n {
            let a = rng.random_range(0..n);
            let b = (a + rng.random_range(1..n)) % n;
            state.apply(square, &Move::row_swap(a, b));
        }
    }
}
