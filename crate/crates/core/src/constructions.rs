//! Named squares and derived squares: the two-block square `A`, the cyclic
//! square `B_n`, blow-ups, symbol merges, the delta invariant of blown-up
//! cyclic squares, and a seeded sampler.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::search::plex::{decompose_plex, PlexSelection};
use crate::square::{Diagonal, FrequencySquare};

/// `A_{2 lambda}`: symbol 1 on the two main-diagonal `lambda x lambda` quadrants,
/// symbol 2 elsewhere.
pub fn make_a(lambda: usize) -> FrequencySquare {
    assert!(lambda >= 1, "lambda must be positive");
    let n = 2 * lambda;
    let cells = (0..n)
        .flat_map(|r| (0..n).map(move |c| if (r < lambda) == (c < lambda) { 1 } else { 2 }))
        .collect();
    FrequencySquare::from_cells_unchecked(n, 2, lambda, cells)
}

/// `B_n`, the addition table of the integers mod `n` with 0 written as `n`:
/// the 1-based cell `(i, j)` holds `((i + j - 1) mod n) + 1`.
pub fn make_b(n: usize) -> FrequencySquare {
    assert!(n >= 1, "order must be positive");
    let cells = (0..n)
        .flat_map(|r| (0..n).map(move |c| ((r + c + 1) % n + 1) as u8))
        .collect();
    FrequencySquare::from_cells_unchecked(n, n, 1, cells)
}

/// Replaces every cell by a `lambda x lambda` block of its symbol.
///
/// Accepts any `F(m mu; mu^m)`, not only Latin squares; the result has type
/// `F(m mu lambda; (mu lambda)^m)`.
pub fn blow_up(square: &FrequencySquare, lambda: usize) -> FrequencySquare {
    assert!(lambda >= 1, "lambda must be positive");
    let n = square.n() * lambda;
    let cells = (0..n)
        .flat_map(|r| (0..n).map(move |c| square.get(r / lambda, c / lambda)))
        .collect();
    FrequencySquare::from_cells_unchecked(n, square.m(), square.lambda() * lambda, cells)
}

/// Replaces every symbol `e` by `ceil(e / alpha)`.
pub fn merge_symbols(square: &FrequencySquare, alpha: usize) -> Result<FrequencySquare> {
    let m = square.m();
    if alpha == 0 || !m.is_multiple_of(alpha) {
        return Err(Error::NotADivisor { alpha, m });
    }
    let cells = square
        .cells()
        .iter()
        .map(|&e| (e as usize).div_ceil(alpha) as u8)
        .collect();
    Ok(FrequencySquare::from_cells_unchecked(
        square.n(),
        m / alpha,
        square.lambda() * alpha,
        cells,
    ))
}

/// Value of the delta statistic at one cell of `B_n(lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaValue {
    pub value: i64,
    pub modulus: usize,
}

impl DeltaValue {
    pub fn residue(&self) -> usize {
        self.value.rem_euclid(self.modulus as i64) as usize
    }
}

/// `ceil(r / lambda) + ceil(c / lambda) - e` for the 1-based cell `(r, c)` of
/// `B_n(lambda)` holding `e`.
pub fn delta_value(n: usize, lambda: usize, r: usize, c: usize, e: usize) -> Result<DeltaValue> {
    check_b_params(n, lambda)?;
    let side = n * lambda;
    if !(1..=side).contains(&r) || !(1..=side).contains(&c) {
        return Err(Error::InvalidArgument(format!("cell ({r}, {c}) outside 1..={side}")));
    }
    let (br, bc) = (r.div_ceil(lambda), c.div_ceil(lambda));
    let actual = (br + bc - 1) % n + 1;
    if e != actual {
        return Err(Error::EntryMismatch { row: r, col: c, given: e, actual });
    }
    Ok(DeltaValue { value: br as i64 + bc as i64 - e as i64, modulus: n })
}

fn check_b_params(n: usize, lambda: usize) -> Result<()> {
    if n == 0 || lambda == 0 {
        return Err(Error::InvalidArgument("n and lambda must be positive".into()));
    }
    Ok(())
}

/// Delta statistic summed along a diagonal of `B_n(lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaSum {
    pub modulus: usize,
    /// Sum of the delta values over the diagonal.
    pub raw: i64,
    /// `raw mod n`; zero for every diagonal since each term is.
    pub residue: usize,
    /// The value `raw` must take when the diagonal is balanced: `lambda * n (n + 1) / 2`.
    pub balanced_closed_form: i64,
    /// `lambda * C(n, 2) mod n`, equal to `balanced_closed_form mod n`. Equals
    /// `n / 2` when `n` is even and `lambda` odd, so no balanced diagonal exists.
    pub balanced_residue: usize,
}

pub fn delta_diagonal_sum(n: usize, lambda: usize, d: &Diagonal) -> Result<DeltaSum> {
    check_b_params(n, lambda)?;
    let side = n * lambda;
    if d.len() != side {
        return Err(Error::LengthMismatch { expected: side, got: d.len() });
    }
    let mut raw = 0i64;
    for (r, c) in d.cells() {
        let e = (r / lambda + c / lambda + 1) % n + 1;
        raw += delta_value(n, lambda, r + 1, c + 1, e)?.value;
    }
    let (n64, l64) = (n as i64, lambda as i64);
    let closed = l64 * n64 * (n64 + 1) / 2;
    let binom = l64 * (n64 * (n64 - 1) / 2);
    Ok(DeltaSum {
        modulus: n,
        raw,
        residue: raw.rem_euclid(n64) as usize,
        balanced_closed_form: closed,
        balanced_residue: binom.rem_euclid(n64) as usize,
    })
}

/// Builds a balanced diagonal of `blow_up(latin, lambda)` from a `k`-plex of
/// `latin`, where `k` divides `lambda`.
///
/// The plex is split into `k` disjoint diagonals `D_1..D_k`. Every cell
/// `(r, c)` of `D_i` contributes the `alpha = lambda / k` block cells
/// `(lambda r + j, lambda c + j)` (0-based) for `j` in the window
/// `(i - 1) alpha .. i alpha`.
pub fn plex_to_balanced_diagonal(
    latin: &FrequencySquare,
    plex: &PlexSelection,
    lambda: usize,
) -> Result<Diagonal> {
    if latin.lambda() != 1 {
        return Err(Error::NotLatin);
    }
    plex.check_against(latin)?;
    let k = plex.k();
    if lambda == 0 || !lambda.is_multiple_of(k) {
        return Err(Error::DivisibilityViolation { k, lambda });
    }
    let alpha = lambda / k;
    let parts = decompose_plex(plex)?;
    let mut sigma = vec![usize::MAX; latin.n() * lambda];
    for (i, part) in parts.iter().enumerate() {
        for (r, c) in part.cells() {
            for j in i * alpha..(i + 1) * alpha {
                sigma[lambda * r + j] = lambda * c + j;
            }
        }
    }
    Diagonal::new(sigma)
}

/// The 2-plex of `B_n` (even `n`) formed by the main diagonal and the cells `(r, r + 1 mod n)`.
pub fn two_plex_of_b(n: usize) -> Result<PlexSelection> {
    if n % 2 == 1 || n == 0 {
        return Err(Error::OddOrder(n));
    }
    let cells = (0..n).flat_map(|r| [(r, r), (r, (r + 1) % n)]).collect();
    PlexSelection::new(&make_b(n), 2, cells)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    /// Number of cycle switches applied to the starting square.
    pub steps: usize,
}

/// A seeded pseudo-random `F(m lambda; lambda^m)`.
///
/// Starts from `blow_up(make_b(m), lambda)` and applies `cfg.steps` random
/// cycle switches. A switch picks two rows (or two columns) and exchanges
/// their entries on a set of positions whose two symbol multisets agree, which
/// keeps every frequency intact. Intercalate swaps are the two-position case.
/// The output is not uniformly distributed.
pub fn random_square(m: usize, lambda: usize, cfg: SamplerConfig) -> FrequencySquare {
    let start = blow_up(&make_b(m), lambda);
    let n = start.n();
    if n < 2 || cfg.steps == 0 {
        return start;
    }
    let mut cells = start.cells().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.steps {
        let by_rows = rng.random_bool(0.5);
        cycle_switch(&mut cells, n, by_rows, &mut rng);
    }
    FrequencySquare::from_cells_unchecked(n, m, lambda, cells)
}

fn cycle_switch<R: Rng>(cells: &mut [u8], n: usize, by_rows: bool, rng: &mut R) {
    let idx = |line: usize, pos: usize| if by_rows { line * n + pos } else { pos * n + line };
    let a = rng.random_range(0..n);
    let b = (a + rng.random_range(1..n)) % n;
    let differing: Vec<usize> = (0..n).filter(|&p| cells[idx(a, p)] != cells[idx(b, p)]).collect();
    let Some(&first) = differing.choose(rng) else {
        return;
    };
    // Walk the multigraph with an edge x_a -> x_b per differing position. In- and
    // out-degrees agree at every symbol, so the trail can only close at its start.
    let closing = cells[idx(a, first)];
    let mut used = vec![false; n];
    used[first] = true;
    let mut chosen = vec![first];
    let mut need = cells[idx(b, first)];
    let mut options = Vec::with_capacity(n);
    while need != closing {
        options.clear();
        options.extend(differing.iter().copied().filter(|&p| !used[p] && cells[idx(a, p)] == need));
        let &p = options.choose(rng).expect("trail cannot get stuck away from its start");
        used[p] = true;
        chosen.push(p);
        need = cells[idx(b, p)];
    }
    for p in chosen {
        cells.swap(idx(a, p), idx(b, p));
    }
}
