//! k-plexes of Latin squares: search and decomposition into diagonals.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::square::{Diagonal, FrequencySquare, Kind};

/// A set of cells of a Latin square meeting every row, column and symbol exactly `k` times.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PlexDoc", into = "PlexDoc")]
pub struct PlexSelection {
    n: usize,
    k: usize,
    /// Sorted, 0-based.
    cells: Vec<(usize, usize)>,
}

impl PlexSelection {
    pub fn new(latin: &FrequencySquare, k: usize, mut cells: Vec<(usize, usize)>) -> Result<Self> {
        cells.sort_unstable();
        let plex = Self::structural(latin.n(), k, cells)?;
        plex.check_against(latin)?;
        Ok(plex)
    }

    /// Row and column conditions only.
    fn structural(n: usize, k: usize, cells: Vec<(usize, usize)>) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::NotAPlex(format!("width {k} outside 1..={n}")));
        }
        if cells.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::NotAPlex("repeated cell".into()));
        }
        let mut rows = vec![0; n];
        let mut cols = vec![0; n];
        for &(r, c) in &cells {
            if r >= n || c >= n {
                return Err(Error::NotAPlex(format!("cell ({}, {}) outside order {n}", r + 1, c + 1)));
            }
            rows[r] += 1;
            cols[c] += 1;
        }
        if let Some(r) = rows.iter().position(|&x| x != k) {
            return Err(Error::NotAPlex(format!("row {} has {} cells, expected {k}", r + 1, rows[r])));
        }
        if let Some(c) = cols.iter().position(|&x| x != k) {
            return Err(Error::NotAPlex(format!("column {} has {} cells, expected {k}", c + 1, cols[c])));
        }
        Ok(Self { n, k, cells })
    }

    /// Checks the symbol condition (and shape) against `latin`.
    pub fn check_against(&self, latin: &FrequencySquare) -> Result<()> {
        if latin.kind() != Kind::Latin {
            return Err(Error::NotLatin);
        }
        if latin.n() != self.n {
            return Err(Error::SizeMismatch(format!("plex of order {} on square of order {}", self.n, latin.n())));
        }
        let mut syms = vec![0; latin.m()];
        for &(r, c) in &self.cells {
            syms[latin.get(r, c) as usize - 1] += 1;
        }
        match syms.iter().position(|&x| x != self.k) {
            Some(s) => Err(Error::NotAPlex(format!("symbol {} occurs {} times, expected {}", s + 1, syms[s], self.k))),
            None => Ok(()),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn cells(&self) -> &[(usize, usize)] {
        &self.cells
    }
}

#[derive(Serialize, Deserialize)]
struct PlexDoc {
    n: usize,
    k: usize,
    /// 1-based `[row, column]` pairs.
    cells: Vec<[usize; 2]>,
}

impl From<PlexSelection> for PlexDoc {
    fn from(p: PlexSelection) -> Self {
        Self { n: p.n, k: p.k, cells: p.cells.iter().map(|&(r, c)| [r + 1, c + 1]).collect() }
    }
}

impl TryFrom<PlexDoc> for PlexSelection {
    type Error = Error;

    fn try_from(doc: PlexDoc) -> Result<Self> {
        let mut cells = doc
            .cells
            .iter()
            .map(|&[r, c]| match (r.checked_sub(1), c.checked_sub(1)) {
                (Some(r), Some(c)) => Ok((r, c)),
                _ => Err(Error::NotAPlex("indices are 1-based".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        cells.sort_unstable();
        Self::structural(doc.n, doc.k, cells)
    }
}

/// Complete search for a `k`-plex, rows in order and columns ascending.
///
/// `Ok(None)` means none exists. Running past `budget` nodes is an error.
pub fn find_k_plex(latin: &FrequencySquare, k: usize, budget: Option<u64>) -> Result<Option<PlexSelection>> {
    let n = latin.n();
    let order: Vec<Vec<usize>> = vec![(0..n).collect(); n];
    PlexSearch::run(latin, k, budget, order)
}

/// As [`find_k_plex`], trying columns in a seeded random order per row, so
/// different seeds tend to return different plexes.
pub fn find_k_plex_seeded(latin: &FrequencySquare, k: usize, budget: Option<u64>, seed: u64) -> Result<Option<PlexSelection>> {
    let n = latin.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = (0..n)
        .map(|_| {
            let mut cols: Vec<usize> = (0..n).collect();
            cols.shuffle(&mut rng);
            cols
        })
        .collect();
    PlexSearch::run(latin, k, budget, order)
}

struct PlexSearch<'a> {
    latin: &'a FrequencySquare,
    k: usize,
    col_order: Vec<Vec<usize>>,
    col_count: Vec<usize>,
    sym_count: Vec<usize>,
    chosen: Vec<(usize, usize)>,
    nodes: u64,
    budget: Option<u64>,
}

impl<'a> PlexSearch<'a> {
    fn run(latin: &'a FrequencySquare, k: usize, budget: Option<u64>, col_order: Vec<Vec<usize>>) -> Result<Option<PlexSelection>> {
        if latin.kind() != Kind::Latin {
            return Err(Error::NotLatin);
        }
        let n = latin.n();
        if k == 0 || k > n {
            return Err(Error::InvalidArgument(format!("plex width {k} outside 1..={n}")));
        }
        let mut s = PlexSearch {
            latin,
            k,
            col_order,
            col_count: vec![0; n],
            sym_count: vec![0; n],
            chosen: Vec::with_capacity(n * k),
            nodes: 0,
            budget,
        };
        if s.row(0, 0, 0)? {
            Ok(Some(PlexSelection::new(latin, k, s.chosen)?))
        } else {
            Ok(None)
        }
    }

    /// Chooses the remaining cells of row `r`, having picked `picked` so far
    /// from positions before `from` in this row's column order.
    fn row(&mut self, r: usize, from: usize, picked: usize) -> Result<bool> {
        let n = self.latin.n();
        if r == n {
            return Ok(true);
        }
        if picked == self.k {
            // Every column and symbol still short must be completable by the rows below.
            let rest = n - r - 1;
            if self.col_count.iter().any(|&x| self.k - x > rest) || self.sym_count.iter().any(|&x| self.k - x > rest) {
                return Ok(false);
            }
            return self.row(r + 1, 0, 0);
        }
        for i in from..n {
            if n - i < self.k - picked {
                break;
            }
            let c = self.col_order[r][i];
            let s = self.latin.get(r, c) as usize - 1;
            if self.col_count[c] == self.k || self.sym_count[s] == self.k {
                continue;
            }
            self.nodes += 1;
            if self.budget.is_some_and(|b| self.nodes > b) {
                return Err(Error::BudgetExhausted { nodes: self.nodes });
            }
            self.col_count[c] += 1;
            self.sym_count[s] += 1;
            self.chosen.push((r, c));
            if self.row(r, i + 1, picked + 1)? {
                return Ok(true);
            }
            self.chosen.pop();
            self.col_count[c] -= 1;
            self.sym_count[s] -= 1;
        }
        Ok(false)
    }
}

/// Splits a `k`-plex into `k` cell-disjoint diagonals.
///
/// The cells form a `k`-regular bipartite graph between rows and columns;
/// perfect matchings are peeled off one at a time by augmenting paths.
pub fn decompose_plex(plex: &PlexSelection) -> Result<Vec<Diagonal>> {
    let n = plex.n;
    let checked = PlexSelection::structural(n, plex.k, plex.cells.clone())?;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(r, c) in &checked.cells {
        adj[r].push(c);
    }
    let mut parts = Vec::with_capacity(plex.k);
    for _ in 0..plex.k {
        let mut owner: Vec<Option<usize>> = vec![None; n];
        for r in 0..n {
            let mut seen = vec![false; n];
            if !augment(r, &adj, &mut owner, &mut seen) {
                return Err(Error::NotAPlex("no perfect matching in remaining cells".into()));
            }
        }
        let mut sigma = vec![0; n];
        for (c, r) in owner.iter().enumerate() {
            sigma[r.expect("perfect matching")] = c;
        }
        for (r, &c) in sigma.iter().enumerate() {
            adj[r].retain(|&x| x != c);
        }
        parts.push(Diagonal::new(sigma)?);
    }
    Ok(parts)
}

fn augment(r: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for &c in &adj[r] {
        if seen[c] {
            continue;
        }
        seen[c] = true;
        if owner[c].is_none_or(|o| augment(o, adj, owner, seen)) {
            owner[c] = Some(r);
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{make_b, random_square, two_plex_of_b, SamplerConfig};
    use std::collections::HashSet;

    fn assert_partition(plex: &PlexSelection, parts: &[Diagonal]) {
        assert_eq!(parts.len(), plex.k());
        let mut union = HashSet::new();
        for d in parts {
            for cell in d.cells() {
                assert!(union.insert(cell), "cell {cell:?} used twice");
            }
        }
        let expected: HashSet<_> = plex.cells().iter().copied().collect();
        assert_eq!(union, expected);
    }

    #[test]
    fn b4_examples() {
        let b4 = make_b(4);
        assert_eq!(find_k_plex(&b4, 1, None).unwrap(), None);
        let two = find_k_plex(&b4, 2, None).unwrap().unwrap();
        assert_eq!(two.cells().len(), 8);
        assert_eq!(find_k_plex(&b4, 3, None).unwrap(), None);
        assert!(find_k_plex(&b4, 4, None).unwrap().is_some());
    }

    #[test]
    fn transversals_of_cyclic_squares() {
        for n in 1..=7 {
            assert_eq!(find_k_plex(&make_b(n), 1, None).unwrap().is_some(), n % 2 == 1, "n = {n}");
        }
    }

    #[test]
    fn errors() {
        let b4 = make_b(4);
        assert!(matches!(find_k_plex(&b4, 0, None), Err(Error::InvalidArgument(_))));
        assert!(matches!(find_k_plex(&b4, 3, Some(5)), Err(Error::BudgetExhausted { .. })));
        let a = crate::constructions::make_a(2);
        assert_eq!(find_k_plex(&a, 1, None), Err(Error::NotLatin));
        // Rows and columns right, symbols wrong: cells (r, r + 2) of B_4 hold only symbols 2 and 4.
        let bad = (0..4).map(|r| (r, (r + 2) % 4)).collect();
        assert!(matches!(PlexSelection::new(&b4, 1, bad), Err(Error::NotAPlex(_))));
        assert!(matches!(PlexSelection::new(&b4, 1, vec![(0, 0), (1, 1), (2, 2)]), Err(Error::NotAPlex(_))));
    }

    #[test]
    fn decomposition_examples() {
        let p = two_plex_of_b(4).unwrap();
        assert_partition(&p, &decompose_plex(&p).unwrap());

        let b5 = make_b(5);
        let t = find_k_plex(&b5, 1, None).unwrap().unwrap();
        let parts = decompose_plex(&t).unwrap();
        assert_eq!(parts[0].cells().collect::<Vec<_>>(), t.cells().to_vec());

        let b9 = make_b(9);
        for seed in 0..10 {
            let p3 = find_k_plex_seeded(&b9, 3, None, seed).unwrap().unwrap();
            assert_partition(&p3, &decompose_plex(&p3).unwrap());
        }
    }

    #[test]
    fn seeded_search_on_random_latin_squares() {
        for seed in 0..40 {
            let l = random_square(5, 1, SamplerConfig { seed, steps: 40 });
            for k in 1..=5 {
                if let Some(p) = find_k_plex_seeded(&l, k, None, seed).unwrap() {
                    p.check_against(&l).unwrap();
                    assert_partition(&p, &decompose_plex(&p).unwrap());
                }
            }
            assert!(find_k_plex(&l, 5, None).unwrap().is_some());
        }
    }

    #[test]
    fn json_is_one_based_and_validated() {
        let p = two_plex_of_b(2).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"n":2,"k":2,"cells":[[1,1],[1,2],[2,1],[2,2]]}"#);
        assert_eq!(serde_json::from_str::<PlexSelection>(&json).unwrap(), p);
        assert!(serde_json::from_str::<PlexSelection>(r#"{"n":2,"k":1,"cells":[[1,1]]}"#).is_err());
    }
}
