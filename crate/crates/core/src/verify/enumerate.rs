//! Exhaustive enumeration of labeled frequency squares.
//!
//! Rows are drawn from the list of all words with `lambda` copies of each
//! symbol, in lexicographic order, subject to per-column symbol budgets. Every
//! partial frequency rectangle completes, and the last row is forced by the
//! budgets, so the search never backtracks out of a dead end.

use crate::error::{Error, Result};
use crate::square::FrequencySquare;

/// Largest order enumerated by default.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 6;

#[derive(Debug, Clone)]
pub struct SquareEnumerator {
    n: usize,
    m: usize,
    lambda: usize,
    /// Candidate rows, lexicographic.
    words: Vec<Vec<u8>>,
    /// `masks[w * m + s]`: columns holding symbol `s + 1` in word `w`.
    masks: Vec<u64>,
}

/// Indices into the candidate-row list fixing the first rows of a square.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Prefix(pub Vec<usize>);

impl SquareEnumerator {
    pub fn new(m: usize, lambda: usize) -> Result<Self> {
        Self::with_limit(m, lambda, DEFAULT_ENUMERATION_LIMIT)
    }

    /// As [`new`](Self::new) with a caller-chosen order limit.
    pub fn with_limit(m: usize, lambda: usize, limit: usize) -> Result<Self> {
        let n = m * lambda;
        if m == 0 || lambda == 0 {
            return Err(Error::DimensionMismatch { n, m, lambda });
        }
        if n > limit {
            return Err(Error::TooLarge(format!("enumeration needs m * lambda <= {limit}, got {n}")));
        }
        let mut words = Vec::new();
        let mut word = Vec::with_capacity(n);
        let mut left = vec![lambda; m];
        fn rec(n: usize, left: &mut [usize], word: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
            if word.len() == n {
                out.push(word.clone());
                return;
            }
            for s in 0..left.len() {
                if left[s] > 0 {
                    left[s] -= 1;
                    word.push(s as u8 + 1);
                    rec(n, left, word, out);
                    word.pop();
                    left[s] += 1;
                }
            }
        }
        rec(n, &mut left, &mut word, &mut words);
        let mut masks = vec![0u64; words.len() * m];
        for (w, word) in words.iter().enumerate() {
            for (c, &s) in word.iter().enumerate() {
                masks[w * m + s as usize - 1] |= 1 << c;
            }
        }
        Ok(Self { n, m, lambda, words, masks })
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

    /// Number of admissible rows.
    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    /// All admissible prefixes of `depth` rows (`depth < n`), in enumeration order.
    pub fn prefixes(&self, depth: usize) -> Vec<Prefix> {
        let depth = depth.min(self.n.saturating_sub(1));
        let mut out = Vec::new();
        let mut cursor = Cursor::new(self, &Prefix(Vec::new()));
        fn rec(e: &SquareEnumerator, cur: &mut Cursor<'_>, depth: usize, stack: &mut Vec<usize>, out: &mut Vec<Prefix>) {
            if stack.len() == depth {
                out.push(Prefix(stack.clone()));
                return;
            }
            for w in 0..e.words.len() {
                if cur.fits(w) {
                    cur.place(w);
                    stack.push(w);
                    rec(e, cur, depth, stack, out);
                    stack.pop();
                    cur.remove(w);
                }
            }
        }
        rec(self, &mut cursor, depth, &mut Vec::new(), &mut out);
        out
    }

    /// Visits every square in enumeration order. The square passed to `f` is
    /// a reused buffer. Returns the number of squares visited.
    pub fn for_each<F: FnMut(&FrequencySquare)>(&self, f: F) -> u64 {
        self.for_each_from(&Prefix(Vec::new()), f)
    }

    /// Visits every square extending `prefix`, in enumeration order.
    pub fn for_each_from<F: FnMut(&FrequencySquare)>(&self, prefix: &Prefix, mut f: F) -> u64 {
        let mut cursor = Cursor::new(self, prefix);
        let mut square = crate::constructions::blow_up(&crate::constructions::make_b(self.m), self.lambda);
        let mut count = 0;
        while cursor.advance() {
            cursor.write(square.cells_mut());
            f(&square);
            count += 1;
        }
        count
    }

    /// Counts squares, giving up once more than `budget` squares are seen.
    pub fn count(&self, budget: Option<u64>) -> Result<u64> {
        let mut cursor = Cursor::new(self, &Prefix(Vec::new()));
        let mut count = 0u64;
        while cursor.advance() {
            count += 1;
            if budget.is_some_and(|b| count > b) {
                return Err(Error::BudgetExhausted { nodes: count });
            }
        }
        Ok(count)
    }

    /// All squares, collected.
    pub fn iter(&self) -> Squares<'_> {
        Squares { cursor: Cursor::new(self, &Prefix(Vec::new())) }
    }
}

/// Iterator over every square, owned copies.
pub struct Squares<'a> {
    cursor: Cursor<'a>,
}

impl Iterator for Squares<'_> {
    type Item = FrequencySquare;

    fn next(&mut self) -> Option<FrequencySquare> {
        if !self.cursor.advance() {
            return None;
        }
        let e = self.cursor.e;
        let mut cells = vec![0u8; e.n * e.n];
        self.cursor.write(&mut cells);
        Some(FrequencySquare::from_cells_unchecked(e.n, e.m, e.lambda, cells))
    }
}

/// Explicit-stack depth-first walk over the free rows below a fixed prefix.
struct Cursor<'a> {
    e: &'a SquareEnumerator,
    /// `counts[c * m + s]`: copies of symbol `s + 1` placed in column `c`.
    counts: Vec<u8>,
    /// Per symbol, the columns that already hold it `lambda` times.
    full: Vec<u64>,
    /// Rows placed so far (prefix rows included).
    stack: Vec<usize>,
    /// Next candidate to try at each free level.
    next: Vec<usize>,
    fixed: usize,
    started: bool,
    done: bool,
}

impl<'a> Cursor<'a> {
    fn new(e: &'a SquareEnumerator, prefix: &Prefix) -> Self {
        let mut cur = Cursor {
            e,
            counts: vec![0; e.n * e.m],
            full: vec![0; e.m],
            stack: Vec::with_capacity(e.n),
            next: Vec::with_capacity(e.n),
            fixed: prefix.0.len(),
            started: false,
            done: false,
        };
        for &w in &prefix.0 {
            if !cur.fits(w) {
                cur.done = true;
                return cur;
            }
            cur.place(w);
        }
        cur
    }

    #[inline]
    fn fits(&self, w: usize) -> bool {
        let m = self.e.m;
        (0..m).all(|s| self.e.masks[w * m + s] & self.full[s] == 0)
    }

    #[inline]
    fn place(&mut self, w: usize) {
        let m = self.e.m;
        let lambda = self.e.lambda as u8;
        for (c, &s) in self.e.words[w].iter().enumerate() {
            let s = s as usize - 1;
            let k = &mut self.counts[c * m + s];
            *k += 1;
            if *k == lambda {
                self.full[s] |= 1 << c;
            }
        }
        self.stack.push(w);
    }

    #[inline]
    fn remove(&mut self, w: usize) {
        let m = self.e.m;
        for (c, &s) in self.e.words[w].iter().enumerate() {
            let s = s as usize - 1;
            self.counts[c * m + s] -= 1;
            self.full[s] &= !(1 << c);
        }
        self.stack.pop();
    }

    /// Moves to the next complete square; the last row is implied.
    fn advance(&mut self) -> bool {
        if self.done {
            return false;
        }
        let target = self.e.n - 1;
        if !self.started {
            self.started = true;
            if self.stack.len() >= target {
                // The prefix already fixes the square (or overshoots it).
                self.done = self.stack.len() > target;
                return !self.done;
            }
            self.next.push(0);
        } else {
            if self.stack.len() == self.fixed {
                self.done = true;
                return false;
            }
            let w = *self.stack.last().expect("a free row is placed");
            self.remove(w);
        }
        // Depth-first: try the next candidate at the current level, descend
        // until the forced last row, backtrack when a level is exhausted.
        loop {
            let level = self.next.len() - 1;
            let mut w = self.next[level];
            while w < self.e.words.len() && !self.fits(w) {
                w += 1;
            }
            if w == self.e.words.len() {
                self.next.pop();
                if self.next.is_empty() {
                    self.done = true;
                    return false;
                }
                let prev = *self.stack.last().expect("parent row placed");
                self.remove(prev);
                continue;
            }
            self.next[level] = w + 1;
            self.place(w);
            if self.stack.len() == target {
                return true;
            }
            self.next.push(0);
        }
    }

    /// Writes the current square: placed rows then the forced last row.
    fn write(&self, cells: &mut [u8]) {
        let e = self.e;
        let n = e.n;
        for (r, &w) in self.stack.iter().enumerate() {
            cells[r * n..(r + 1) * n].copy_from_slice(&e.words[w]);
        }
        let lambda = e.lambda as u8;
        for c in 0..n {
            let s = (0..e.m).find(|&s| self.counts[c * e.m + s] < lambda).expect("one symbol short per column");
            cells[(n - 1) * n + c] = s as u8 + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{HashMap, HashSet};

    /// Number of squares by a memoized recursion over column-budget states,
    /// sorted so column order does not matter.
    fn count_by_budgets(m: usize, lambda: usize) -> u64 {
        let n = m * lambda;
        let start: Vec<Vec<u8>> = vec![vec![lambda as u8; m]; n];
        fn rows(n: usize, lambda: usize, m: usize) -> Vec<Vec<u8>> {
            // All words, by brute force over m^n.
            let mut out = Vec::new();
            let total = (m as u64).pow(n as u32);
            for mut code in 0..total {
                let mut w = Vec::with_capacity(n);
                for _ in 0..n {
                    w.push((code % m as u64) as u8);
                    code /= m as u64;
                }
                if (0..m as u8).all(|s| w.iter().filter(|&&x| x == s).count() == lambda) {
                    out.push(w);
                }
            }
            out
        }
        fn go(state: Vec<Vec<u8>>, left: usize, words: &[Vec<u8>], memo: &mut HashMap<(Vec<Vec<u8>>, usize), u64>) -> u64 {
            if left == 0 {
                return 1;
            }
            if let Some(&v) = memo.get(&(state.clone(), left)) {
                return v;
            }
            let mut total = 0;
            for w in words {
                if w.iter().enumerate().all(|(c, &s)| state[c][s as usize] > 0) {
                    let mut next = state.clone();
                    for (c, &s) in w.iter().enumerate() {
                        next[c][s as usize] -= 1;
                    }
                    next.sort();
                    total += go(next, left - 1, words, memo);
                }
            }
            memo.insert((state, left), total);
            total
        }
        let words = rows(n, lambda, m);
        go(start, n, &words, &mut HashMap::new())
    }

    #[test]
    fn counts_match_budget_recursion() {
        let cases = [(1, 1, 1), (1, 4, 1), (2, 1, 2), (2, 2, 90), (3, 1, 12), (4, 1, 576), (2, 3, 297_200), (5, 1, 161_280)];
        for &(m, lambda, expected) in &cases {
            let e = SquareEnumerator::new(m, lambda).unwrap();
            assert_eq!(e.count(None).unwrap(), expected, "({m}, {lambda})");
            assert_eq!(count_by_budgets(m, lambda), expected, "({m}, {lambda})");
        }
    }

    #[test]
    fn squares_are_valid_distinct_and_ordered() {
        let e = SquareEnumerator::new(2, 2).unwrap();
        let all: Vec<_> = e.iter().collect();
        assert_eq!(all.len(), 90);
        for sq in &all {
            FrequencySquare::from_cells(4, 2, 2, sq.cells().to_vec()).unwrap();
        }
        assert!(all.windows(2).all(|w| w[0].cells() < w[1].cells()));
        let set: HashSet<_> = all.iter().collect();
        assert_eq!(set.len(), 90);
        let mut visited = Vec::new();
        assert_eq!(e.for_each(|sq| visited.push(sq.clone())), 90);
        assert_eq!(visited, all);
    }

    #[test]
    fn prefixes_partition_the_enumeration() {
        for &(m, lambda) in &[(2, 2), (3, 1), (2, 3), (1, 3)] {
            let e = SquareEnumerator::new(m, lambda).unwrap();
            let all: Vec<_> = e.iter().collect();
            for depth in 0..3 {
                let mut joined = Vec::new();
                for p in e.prefixes(depth) {
                    e.for_each_from(&p, |sq| joined.push(sq.clone()));
                }
                assert_eq!(joined, all, "({m}, {lambda}) depth {depth}");
            }
        }
    }

    #[test]
    fn guards_and_budget() {
        assert!(matches!(SquareEnumerator::new(7, 1), Err(Error::TooLarge(_))));
        assert!(SquareEnumerator::with_limit(7, 1, 7).is_ok());
        let e = SquareEnumerator::new(4, 1).unwrap();
        assert!(matches!(e.count(Some(100)), Err(Error::BudgetExhausted { .. })));
    }
}
