//! Exhaustive and sampled checks of the balanced-diagonal results, each
//! producing a [`VerificationReport`].
//!
//! Exhaustive runs split the enumeration by first row and hand the pieces to
//! [`par::map`]; sampled runs derive one seed per sample index. Either way the
//! report does not depend on the execution mode or thread count.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constructions::{blow_up, delta_diagonal_sum, delta_value, make_a, make_b, random_square, SamplerConfig};
use crate::equivalence::{canonical_key, is_equivalent_to_a, MAX_CANONICAL_ORDER, MAX_SYMBOLS};
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::search::{constructive_m2, find_exact, swap_descent, M2Result, SearchOutcome, SearchStatus};
use crate::square::{Diagonal, FrequencySquare, Transform};

pub mod enumerate;
pub mod report;

pub use enumerate::{Prefix, SquareEnumerator, DEFAULT_ENUMERATION_LIMIT};
pub use report::{Case, Mode, Target, VerificationReport, Violation};

/// Exact search is unbudgeted up to this order.
pub const DEFAULT_EXACT_LIMIT: usize = 12;
/// Squares an exhaustive run may visit before falling back to sampling.
/// Large enough for all of `F(6; 2,2,2)`.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 50_000_000;
/// Node budget for exact search above the exact limit.
pub const DEFAULT_EXACT_BUDGET: u64 = 50_000_000;
pub const DEFAULT_RESTARTS: u32 = 16;
/// Seed for runs that take none (the random diagonals of the `B` grid).
pub const DEFAULT_SEED: u64 = 20_240_601;
/// Keeps descent seeds apart from sampler seeds.
const DESCENT_SALT: u64 = 0xd1a6_0a11;
/// Random diagonals whose `Delta` sum is checked per `(n, lambda)` pair.
pub const DELTA_DIAGONALS: u64 = 1000;
/// Subarray enumeration is exponential in `n`.
pub const SUBARRAY_LAMBDA_LIMIT: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub exhaustive_limit: usize,
    pub exact_limit: usize,
    pub enumeration_budget: u64,
    pub exact_budget: u64,
    pub restarts: u32,
    pub execution: Execution,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            exhaustive_limit: DEFAULT_ENUMERATION_LIMIT,
            exact_limit: DEFAULT_EXACT_LIMIT,
            enumeration_budget: DEFAULT_ENUMERATION_BUDGET,
            exact_budget: DEFAULT_EXACT_BUDGET,
            restarts: DEFAULT_RESTARTS,
            execution: Execution::Parallel,
        }
    }
}

/// Seed for item `index` of a run seeded with `seed` (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Switch steps per sample: `50 n`.
pub fn sample_steps(n: usize) -> usize {
    50 * n
}

/// Sample `index` of a sampled run.
pub fn sample_square(m: usize, lambda: usize, seed: u64, index: u64) -> FrequencySquare {
    random_square(m, lambda, SamplerConfig { seed: derive_seed(seed, index), steps: sample_steps(m * lambda) })
}

/// Descent, then exact search (unbudgeted up to `cfg.exact_limit`).
/// Returns the outcome and whether the exact fallback ran.
fn decide(sq: &FrequencySquare, seed: u64, cfg: &VerifyConfig) -> (SearchOutcome, bool) {
    let d = swap_descent(sq, seed, cfg.restarts);
    if d.is_found() {
        return (d, false);
    }
    let budget = (sq.n() > cfg.exact_limit).then_some(cfg.exact_budget);
    (find_exact(sq, budget), true)
}

/// Per-chunk accumulator; merged in input order.
#[derive(Default)]
struct Tally {
    checked: u64,
    counters: BTreeMap<String, u64>,
    violations: Vec<Violation>,
}

impl Tally {
    fn bump(&mut self, key: &str) {
        match self.counters.get_mut(key) {
            Some(v) => *v += 1,
            None => {
                self.counters.insert(key.to_string(), 1);
            }
        }
    }

    fn merge(&mut self, other: Tally, offset: u64) {
        self.checked += other.checked;
        for (k, v) in other.counters {
            *self.counters.entry(k).or_insert(0) += v;
        }
        self.violations.extend(other.violations.into_iter().map(|mut v| {
            v.index += offset;
            v
        }));
    }

    fn into_report(self, report: &mut VerificationReport) {
        report.total_checked = self.checked;
        report.summary.extend(self.counters);
        report.violations = self.violations;
    }
}

/// A failed check: a description plus the search outcome behind it, if any.
type Finding = Option<(String, Option<SearchOutcome>)>;

/// Records a violation only if the check fails again on the grid re-read
/// from its text form.
fn record<F>(tally: &mut Tally, index: u64, sq: &FrequencySquare, finding: Finding, check: &F)
where
    F: Fn(&FrequencySquare, &mut Tally) -> Finding,
{
    let Some((detail, outcome)) = finding else { return };
    let reparsed = match FrequencySquare::parse(&sq.to_text()) {
        Ok(s) => s,
        Err(_) => return,
    };
    if check(&reparsed, &mut Tally::default()).is_none() {
        tally.bump("unconfirmed_findings");
        return;
    }
    // Timing would make reports differ between identical runs.
    let outcome = outcome.map(|mut o| {
        o.stats.elapsed_ms = 0.0;
        o
    });
    let key = (sq.n() <= MAX_CANONICAL_ORDER && sq.m() <= MAX_SYMBOLS).then(|| canonical_key(sq).ok()).flatten();
    tally.violations.push(Violation { index, square: sq.clone(), detail, outcome, canonical_key: key });
}

fn scan_exhaustive<F>(e: &SquareEnumerator, exec: Execution, check: F) -> Tally
where
    F: Fn(&FrequencySquare, &mut Tally) -> Finding + Sync + Send,
{
    let prefixes = e.prefixes(1);
    let parts = par::map(exec, &prefixes, |p| {
        let mut t = Tally::default();
        let mut i = 0;
        e.for_each_from(p, |sq| {
            let finding = check(sq, &mut t);
            record(&mut t, i, sq, finding, &check);
            i += 1;
        });
        t.checked = i;
        t
    });
    let mut total = Tally::default();
    for part in parts {
        let offset = total.checked;
        total.merge(part, offset);
    }
    total
}

const CHUNK: u64 = 64;

/// `check` receives each sample together with its index.
fn scan_sampled<S, F>(samples: u64, exec: Execution, sample: S, check: F) -> Tally
where
    S: Fn(u64) -> FrequencySquare + Sync + Send,
    F: Fn(&FrequencySquare, u64, &mut Tally) -> Finding + Sync + Send,
{
    let chunks = samples.div_ceil(CHUNK);
    let parts = par::map_range(exec, chunks, |k| {
        let mut t = Tally::default();
        for i in k * CHUNK..((k + 1) * CHUNK).min(samples) {
            let sq = sample(i);
            let finding = check(&sq, i, &mut t);
            record(&mut t, i, &sq, finding, &|s: &FrequencySquare, t: &mut Tally| check(s, i, t));
            t.checked += 1;
        }
        t
    });
    let mut total = Tally::default();
    for part in parts {
        total.merge(part, 0);
    }
    total
}

/// Enumerates when the universe fits the budget; `None` means it does not.
fn enumerator_within_budget(m: usize, lambda: usize, cfg: &VerifyConfig) -> Result<Option<SquareEnumerator>> {
    if m * lambda > cfg.exhaustive_limit {
        return Ok(None);
    }
    let e = SquareEnumerator::with_limit(m, lambda, cfg.exhaustive_limit)?;
    match e.count(Some(cfg.enumeration_budget)) {
        Ok(_) => Ok(Some(e)),
        Err(Error::BudgetExhausted { .. }) => Ok(None),
        Err(err) => Err(err),
    }
}

fn finish(mut report: VerificationReport, start: Instant) -> VerificationReport {
    report.elapsed_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    report
}

/// Labeled squares equivalent to `sq`: breadth-first closure under the
/// generators (transpose, transpositions of rows, columns and symbols).
pub fn orbit_size(sq: &FrequencySquare) -> u64 {
    let (n, m) = (sq.n(), sq.m());
    let mut gens = vec![Transform::transpose(n, m)];
    for i in 1..n {
        gens.push(Transform::swap_rows(n, m, 0, i));
        let mut t = Transform::identity(n, m);
        t.cols.swap(0, i);
        gens.push(t);
    }
    for s in 1..m {
        let mut t = Transform::identity(n, m);
        t.symbols.swap(0, s);
        gens.push(t);
    }
    let mut seen: HashSet<FrequencySquare> = HashSet::from([sq.clone()]);
    let mut queue = VecDeque::from([sq.clone()]);
    while let Some(cur) = queue.pop_front() {
        for g in &gens {
            let next = cur.apply_transform(g).expect("generator sized for the square");
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    seen.len() as u64
}

/// Every `F(2 lambda; lambda, lambda)`: a balanced diagonal exists iff
/// `lambda` is even or the square is not a rearrangement of `A_{2 lambda}`.
/// The constructive algorithm must agree, and the number of squares
/// equivalent to `A` must equal the orbit size of `A`.
pub fn check_theorem_m2(lambda: usize, cfg: &VerifyConfig) -> Result<VerificationReport> {
    let start = Instant::now();
    let e = SquareEnumerator::with_limit(2, lambda, cfg.exhaustive_limit)?;
    let a = make_a(lambda);
    let check = |sq: &FrequencySquare, t: &mut Tally| -> Finding {
        let exact = find_exact(sq, None);
        let found = exact.is_found();
        t.bump(if found { "with_balanced_diagonal" } else { "without_balanced_diagonal" });
        let a_equiv = match is_equivalent_to_a(sq) {
            Ok(c) => c.is_some(),
            Err(err) => return Some((format!("equivalence test failed: {err}"), Some(exact))),
        };
        if a_equiv {
            t.bump("a_equivalent");
        }
        let predicted = lambda.is_multiple_of(2) || !a_equiv;
        if found != predicted {
            return Some((format!("balanced diagonal exists: {found}, predicted: {predicted}"), Some(exact)));
        }
        match constructive_m2(sq) {
            Ok(M2Result::Witness(d)) => {
                t.bump("constructive_witness");
                if !found || !sq.is_balanced(&d).unwrap_or(false) {
                    return Some(("constructive witness is not a balanced diagonal".into(), Some(exact)));
                }
            }
            Ok(M2Result::Certificate(c)) => {
                t.bump("constructive_certificate");
                if found || !c.replays(sq, &a).unwrap_or(false) {
                    return Some(("constructive certificate is wrong".into(), Some(exact)));
                }
            }
            Err(err) => return Some((format!("constructive algorithm failed: {err}"), Some(exact))),
        }
        None
    };
    let tally = scan_exhaustive(&e, cfg.execution, check);
    let mut report = VerificationReport::new(Target::M2, Mode::Exhaustive).param("m", 2).param("lambda", lambda as u64);
    tally.into_report(&mut report);
    let orbit = orbit_size(&a);
    report.summary.insert("a_orbit_size".into(), orbit);
    let counted = report.summary_value("a_equivalent");
    report.cases.push(Case {
        label: "squares equivalent to A".into(),
        expected: format!("{orbit} (orbit of A)"),
        observed: counted.to_string(),
        ok: counted == orbit,
    });
    Ok(finish(report, start))
}

/// Exhaustive existence check: exact search on every square.
fn exhaustive_existence(e: &SquareEnumerator, cfg: &VerifyConfig) -> Tally {
    scan_exhaustive(e, cfg.execution, |sq, t| {
        let out = find_exact(sq, None);
        match out.status {
            SearchStatus::Found => {
                t.bump("found");
                if !sq.is_balanced(out.witness.as_ref()?).unwrap_or(false) {
                    return Some(("witness is not balanced".into(), Some(out)));
                }
                None
            }
            _ => Some(("no balanced diagonal".into(), Some(out))),
        }
    })
}

fn sampled_existence(m: usize, lambda: usize, samples: u64, seed: u64, cfg: &VerifyConfig) -> Tally {
    scan_sampled(
        samples,
        cfg.execution,
        |i| sample_square(m, lambda, seed, i),
        |sq, i, t| {
            let (out, fell_back) = decide(sq, derive_seed(seed ^ DESCENT_SALT, i), cfg);
            if fell_back {
                t.bump("exact_fallback");
            }
            match out.status {
                SearchStatus::Found => {
                    t.bump("found");
                    let ok = out.witness.as_ref().is_some_and(|w| sq.is_balanced(w).unwrap_or(false));
                    (!ok).then(|| ("witness is not balanced".to_string(), Some(out)))
                }
                SearchStatus::ProvedAbsent => Some(("no balanced diagonal".to_string(), Some(out))),
                SearchStatus::Unknown => {
                    t.bump("unresolved");
                    None
                }
            }
        },
    )
}

/// Existence over `F(3 lambda; lambda^3)`: exhaustive when the enumeration
/// fits `cfg`, otherwise `samples` seeded samples.
pub fn check_theorem_m3(lambda: usize, samples: u64, seed: u64, cfg: &VerifyConfig) -> Result<VerificationReport> {
    if lambda == 0 || lambda > 3 {
        return Err(Error::TooLarge(format!("the three-symbol check covers lambda <= 3, got {lambda}")));
    }
    existence_report(Target::M3, 3, lambda, samples, seed, cfg)
}

/// Existence over `F(m lambda; lambda^m)` for `(m - 1) lambda` even; any
/// square without a balanced diagonal is reported with its canonical key.
pub fn check_conjecture(m: usize, lambda: usize, samples: u64, seed: u64, cfg: &VerifyConfig) -> Result<VerificationReport> {
    if m == 0 || lambda == 0 {
        return Err(Error::DimensionMismatch { n: m * lambda, m, lambda });
    }
    if (m - 1) * lambda % 2 == 1 {
        return Err(Error::ParityPreconditionFailed { m, lambda });
    }
    if m * lambda > cfg.exact_limit {
        return Err(Error::TooLarge(format!("conjecture checks need m * lambda <= {}, got {}", cfg.exact_limit, m * lambda)));
    }
    existence_report(Target::Conjecture, m, lambda, samples, seed, cfg)
}

fn existence_report(target: Target, m: usize, lambda: usize, samples: u64, seed: u64, cfg: &VerifyConfig) -> Result<VerificationReport> {
    let start = Instant::now();
    let base = |mode| VerificationReport::new(target, mode).param("m", m as u64).param("lambda", lambda as u64);
    let report = match enumerator_within_budget(m, lambda, cfg)? {
        Some(e) => {
            let mut r = base(Mode::Exhaustive);
            exhaustive_existence(&e, cfg).into_report(&mut r);
            r
        }
        None => {
            let mut r = base(Mode::Sampled).param("samples", samples);
            r.seed = Some(seed);
            if m * lambda <= cfg.exhaustive_limit {
                r.notes.push("enumeration exceeds the budget; sampled instead".into());
            }
            sampled_existence(m, lambda, samples, seed, cfg).into_report(&mut r);
            r
        }
    };
    Ok(finish(report, start))
}

/// `B_n(lambda)` for `1 <= n <= n_max`, `1 <= lambda <= lambda_max`: exact
/// existence against the parity rule, `Delta = 0 (mod n)` on every cell, and
/// the `Delta` sums of random diagonals. Pairs with `n lambda` above the exact
/// limit are skipped and listed.
pub fn check_b_theorem(n_max: usize, lambda_max: usize, cfg: &VerifyConfig) -> Result<VerificationReport> {
    let start = Instant::now();
    let mut pairs = Vec::new();
    let mut skipped = Vec::new();
    for n in 1..=n_max {
        for lambda in 1..=lambda_max {
            if n * lambda <= cfg.exact_limit {
                pairs.push((n, lambda));
            } else {
                skipped.push(format!("({n},{lambda})"));
            }
        }
    }
    if pairs.is_empty() && !skipped.is_empty() {
        return Err(Error::TooLarge(format!("every pair has n * lambda > {}", cfg.exact_limit)));
    }
    let rows = par::map(cfg.execution, &pairs, |&(n, lambda)| b_pair(n, lambda, cfg));
    let mut report = VerificationReport::new(Target::Bgrid, Mode::Exhaustive)
        .param("nmax", n_max as u64)
        .param("lmax", lambda_max as u64);
    report.total_checked = pairs.len() as u64;
    for row in rows {
        let row = row?;
        *report.summary.entry("delta_cells_checked".into()).or_insert(0) += row.cells;
        *report.summary.entry("delta_diagonals_checked".into()).or_insert(0) += row.diagonals;
        *report.summary.entry("delta_failures".into()).or_insert(0) += row.delta_failures;
        *report.summary.entry(if row.case.observed.starts_with("found") { "found" } else { "absent" }.into()).or_insert(0) += 1;
        report.cases.push(row.case);
    }
    report.summary.insert("skipped_pairs".into(), skipped.len() as u64);
    if !skipped.is_empty() {
        report.notes.push(format!("skipped (n * lambda > {}): {}", cfg.exact_limit, skipped.join(" ")));
    }
    Ok(finish(report, start))
}

struct BRow {
    case: Case,
    cells: u64,
    diagonals: u64,
    delta_failures: u64,
}

fn b_pair(n: usize, lambda: usize, cfg: &VerifyConfig) -> Result<BRow> {
    let sq = blow_up(&make_b(n), lambda);
    let size = n * lambda;
    let mut failures = 0;
    for r in 0..size {
        for c in 0..size {
            if delta_value(n, lambda, r + 1, c + 1, sq.get(r, c) as usize)?.residue() != 0 {
                failures += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(DEFAULT_SEED, (n * 64 + lambda) as u64));
    let mut sigma: Vec<usize> = (0..size).collect();
    for _ in 0..DELTA_DIAGONALS {
        sigma.shuffle(&mut rng);
        if delta_diagonal_sum(n, lambda, &Diagonal::new(sigma.clone())?)?.residue != 0 {
            failures += 1;
        }
    }
    let (out, _) = decide(&sq, derive_seed(DEFAULT_SEED, size as u64), cfg);
    let predicted = ((n - 1) * lambda).is_multiple_of(2);
    let observed = match out.status {
        SearchStatus::Found => {
            let w = out.witness.as_ref().expect("found has a witness");
            if !sq.is_balanced(w)? {
                failures += 1;
            }
            // A balanced diagonal's Delta sum is lambda * C(n, 2) mod n.
            let sum = delta_diagonal_sum(n, lambda, w)?;
            if sum.residue != sum.balanced_residue {
                failures += 1;
            }
            "found"
        }
        SearchStatus::ProvedAbsent => "absent",
        SearchStatus::Unknown => "unknown",
    };
    let expected = if predicted { "found" } else { "absent" };
    let observed = if failures == 0 { observed.to_string() } else { format!("{observed}, {failures} delta failures") };
    Ok(BRow {
        case: Case {
            label: format!("n={n} lambda={lambda}"),
            ok: failures == 0 && observed == expected,
            expected: expected.into(),
            observed,
        },
        cells: (size * size) as u64,
        diagonals: DELTA_DIAGONALS,
        delta_failures: failures,
    })
}

/// Largest `k` such that some `k x k` subarray of `sq` avoids symbol `s`.
///
/// Over every row subset `R`, the columns avoiding `s` on all of `R` give a
/// `min(|R|, #columns)` square; the answer is the best such value.
pub fn max_missing_subarray(sq: &FrequencySquare, s: u8) -> usize {
    let n = sq.n();
    let avoid: Vec<u64> = (0..n).map(|r| !sq.symbol_mask(r, s) & low_bits(n)).collect();
    let mut best = 0;
    // cols[mask] for row subsets, built from the subset without its lowest row.
    let mut cols = vec![0u64; 1 << n];
    cols[0] = low_bits(n);
    for mask in 1usize..1 << n {
        let low = mask.trailing_zeros() as usize;
        cols[mask] = cols[mask & (mask - 1)] & avoid[low];
        let k = (mask.count_ones() as usize).min(cols[mask].count_ones() as usize);
        best = best.max(k);
    }
    best
}

fn low_bits(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1 << n) - 1
    }
}

fn subarray_finding(sq: &FrequencySquare, t: &mut Tally) -> Finding {
    let bound = 3 * sq.lambda() / 2;
    let worst = (1..=3u8).map(|s| (s, max_missing_subarray(sq, s))).max_by_key(|&(_, k)| k)?;
    t.bump(&format!("max_k={}", worst.1));
    (worst.1 > bound).then(|| (format!("symbol {} misses a {}x{} subarray, bound {bound}", worst.0, worst.1, worst.1), None))
}

fn check_subarray_shape(lambda: usize) -> Result<()> {
    if lambda == 0 || lambda > SUBARRAY_LAMBDA_LIMIT {
        return Err(Error::TooLarge(format!("subarray enumeration needs lambda <= {SUBARRAY_LAMBDA_LIMIT}, got {lambda}")));
    }
    Ok(())
}

/// The subarray bound on a single `F(3 lambda; lambda^3)`.
pub fn check_subarray_bound(sq: &FrequencySquare) -> Result<VerificationReport> {
    let start = Instant::now();
    if sq.m() != 3 {
        return Err(Error::WrongSymbolCount(sq.m()));
    }
    check_subarray_shape(sq.lambda())?;
    let bound = 3 * sq.lambda() / 2;
    let mut report = VerificationReport::new(Target::SubarrayBound, Mode::Exhaustive).param("lambda", sq.lambda() as u64);
    report.total_checked = 1;
    for s in 1..=3u8 {
        let k = max_missing_subarray(sq, s);
        report.cases.push(Case {
            label: format!("symbol {s}"),
            expected: format!("k <= {bound}"),
            observed: format!("k = {k}"),
            ok: k <= bound,
        });
    }
    let mut t = Tally::default();
    let finding = subarray_finding(sq, &mut t);
    record(&mut t, 0, sq, finding, &subarray_finding);
    report.violations = t.violations;
    Ok(finish(report, start))
}

/// The subarray bound over all `F(3 lambda; lambda^3)` (`samples = None`) or
/// over seeded samples.
pub fn check_subarray_family(lambda: usize, samples: Option<u64>, seed: u64, cfg: &VerifyConfig) -> Result<VerificationReport> {
    let start = Instant::now();
    check_subarray_shape(lambda)?;
    let base = |mode| VerificationReport::new(Target::SubarrayBound, mode).param("lambda", lambda as u64);
    let report = match samples {
        None => {
            let e = SquareEnumerator::with_limit(3, lambda, cfg.exhaustive_limit)?;
            let mut r = base(Mode::Exhaustive);
            scan_exhaustive(&e, cfg.execution, subarray_finding).into_report(&mut r);
            r
        }
        Some(k) => {
            let mut r = base(Mode::Sampled).param("samples", k);
            r.seed = Some(seed);
            scan_sampled(k, cfg.execution, |i| sample_square(3, lambda, seed, i), |sq, _, t| subarray_finding(sq, t))
                .into_report(&mut r);
            r
        }
    };
    Ok(finish(report, start))
}
