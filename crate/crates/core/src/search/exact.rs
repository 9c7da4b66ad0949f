//! Complete backtracking search for a balanced diagonal.
//!
//! Rows are assigned distinct columns one at a time. A branch is cut when a
//! symbol would exceed `lambda` on the diagonal, when some unassigned row has
//! no usable column left, or when a symbol still short of `lambda` cannot be
//! supplied by the remaining rows and columns.
//!
//! Identical columns are interchangeable, so only the lowest free column of
//! each class is tried. Identical rows are interchangeable too, so within a
//! group of identical rows the chosen column classes are kept nondecreasing.
//! Both reductions preserve existence.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::search::{SearchOutcome, SearchStatus};
use crate::square::{Diagonal, FrequencySquare};

/// Exhaustive search with an optional node budget.
///
/// Without a budget the status is `Found` or `ProvedAbsent`. With one,
/// `Unknown` is returned once the budget runs out.
pub fn find_exact(square: &FrequencySquare, budget: Option<u64>) -> SearchOutcome {
    let start = Instant::now();
    let mut search = Exact::new(square, budget);
    let found = search.dfs(0);
    let (status, witness) = if found {
        let mut sigma = vec![0; square.n()];
        for (pos, &row) in search.order.iter().enumerate() {
            sigma[row] = search.chosen_col[pos];
        }
        (SearchStatus::Found, Some(Diagonal::new_unchecked(sigma)))
    } else if search.exhausted {
        (SearchStatus::Unknown, None)
    } else {
        (SearchStatus::ProvedAbsent, None)
    };
    SearchOutcome::new(status, witness, search.nodes, 0, start)
}

struct Exact {
    n: usize,
    m: usize,
    lambda: u8,
    /// Processing order of the rows.
    order: Vec<usize>,
    /// `masks[pos * m + s]`: columns of row `order[pos]` holding symbol `s + 1`.
    masks: Vec<u64>,
    /// Symbol (0-based) at `(order[pos], c)`, stored as `pos * n + c`.
    symbols: Vec<u8>,
    col_class: Vec<usize>,
    class_masks: Vec<u64>,
    /// Position of the previous identical row in the processing order.
    prev_twin: Vec<Option<usize>>,
    chosen_col: Vec<usize>,
    counts: Vec<u8>,
    free: u64,
    nodes: u64,
    budget: Option<u64>,
    exhausted: bool,
}

impl Exact {
    fn new(square: &FrequencySquare, budget: Option<u64>) -> Self {
        let n = square.n();
        let m = square.m();

        // Column classes, numbered by first occurrence.
        let mut col_class = vec![0; n];
        let mut class_masks: Vec<u64> = Vec::new();
        let mut reps: Vec<usize> = Vec::new();
        for (c, class) in col_class.iter_mut().enumerate() {
            let hit = reps.iter().position(|&rep| (0..n).all(|r| square.get(r, rep) == square.get(r, c)));
            let id = hit.unwrap_or_else(|| {
                reps.push(c);
                class_masks.push(0);
                reps.len() - 1
            });
            *class = id;
            class_masks[id] |= 1 << c;
        }

        // Before any choice every row can use every column, so a
        // most-constrained score ties everywhere. Identical rows are grouped
        // (at the position of the first of them) so the twin constraint bites
        // early; otherwise rows keep their index order.
        let mut order: Vec<usize> = (0..n).collect();
        let first_twin = |r: usize| (0..=r).find(|&p| square.row(p) == square.row(r)).unwrap_or(r);
        order.sort_by_key(|&r| (first_twin(r), r));

        let mut masks = vec![0u64; n * m];
        let mut symbols = vec![0u8; n * n];
        for (pos, &r) in order.iter().enumerate() {
            for c in 0..n {
                let s = square.get(r, c) - 1;
                masks[pos * m + s as usize] |= 1 << c;
                symbols[pos * n + c] = s;
            }
        }
        let prev_twin = (0..n)
            .map(|pos| (0..pos).rev().find(|&p| square.row(order[p]) == square.row(order[pos])))
            .collect();

        Self {
            n,
            m,
            lambda: square.lambda() as u8,
            order,
            masks,
            symbols,
            col_class,
            class_masks,
            prev_twin,
            chosen_col: vec![0; n],
            counts: vec![0; m],
            free: if n == 64 { u64::MAX } else { (1u64 << n) - 1 },
            nodes: 0,
            budget,
            exhausted: false,
        }
    }

    fn dfs(&mut self, pos: usize) -> bool {
        if pos == self.n {
            return true;
        }
        self.nodes += 1;
        if self.budget.is_some_and(|b| self.nodes > b) {
            self.exhausted = true;
            return false;
        }
        let m = self.m;
        let mut allowed = 0u64;
        for s in 0..m {
            if self.counts[s] < self.lambda {
                allowed |= self.masks[pos * m + s];
            }
        }
        allowed &= self.free;
        let min_class = self.prev_twin[pos].map_or(0, |p| self.col_class[self.chosen_col[p]]);
        while allowed != 0 {
            let c = allowed.trailing_zeros() as usize;
            allowed &= allowed - 1;
            let class = self.col_class[c];
            if class < min_class || (self.class_masks[class] & self.free).trailing_zeros() as usize != c {
                continue;
            }
            let s = self.symbols[pos * self.n + c] as usize;
            self.counts[s] += 1;
            self.free &= !(1 << c);
            self.chosen_col[pos] = c;
            if self.feasible(pos + 1) && self.dfs(pos + 1) {
                return true;
            }
            self.counts[s] -= 1;
            self.free |= 1 << c;
            if self.exhausted {
                return false;
            }
        }
        false
    }

    fn feasible(&self, from: usize) -> bool {
        let m = self.m;
        let mut row_supply = [0usize; 64];
        let mut col_supply = [0u64; 64];
        for pos in from..self.n {
            let mut any = false;
            for s in 0..m {
                if self.counts[s] < self.lambda {
                    let avail = self.masks[pos * m + s] & self.free;
                    if avail != 0 {
                        any = true;
                        row_supply[s] += 1;
                        col_supply[s] |= avail;
                    }
                }
            }
            if !any {
                return false;
            }
        }
        (0..m).all(|s| {
            let need = (self.lambda - self.counts[s]) as usize;
            need == 0 || (row_supply[s] >= need && col_supply[s].count_ones() as usize >= need)
        })
    }
}

/// Every balanced diagonal of a square with `n <= 8`, in lexicographic order.
pub fn enumerate_balanced(square: &FrequencySquare) -> Result<Vec<Diagonal>> {
    const LIMIT: usize = 8;
    let n = square.n();
    if n > LIMIT {
        return Err(Error::TooLarge(format!("enumerating all diagonals needs n <= {LIMIT}, got {n}")));
    }
    fn rec(sq: &FrequencySquare, row: usize, used: u64, counts: &mut [usize], sigma: &mut Vec<usize>, out: &mut Vec<Diagonal>) {
        let n = sq.n();
        if row == n {
            out.push(Diagonal::new_unchecked(sigma.clone()));
            return;
        }
        for c in 0..n {
            let s = sq.get(row, c) as usize - 1;
            if used & (1 << c) != 0 || counts[s] == sq.lambda() {
                continue;
            }
            counts[s] += 1;
            sigma.push(c);
            rec(sq, row + 1, used | (1 << c), counts, sigma, out);
            sigma.pop();
            counts[s] -= 1;
        }
    }
    let mut out = Vec::new();
    rec(square, 0, 0, &mut vec![0; square.m()], &mut Vec::with_capacity(n), &mut out);
    Ok(out)
}
