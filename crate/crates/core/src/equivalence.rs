//! Equivalence under row and column permutations, symbol relabelling and transpose.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::constructions::make_a;
use crate::error::{Error, Result};
use crate::search::find_pattern_2x2;
use crate::square::{FrequencySquare, Transform};

/// Symbol permutations are enumerated outright, so `m` is capped.
pub const MAX_SYMBOLS: usize = 8;
/// Largest order accepted by [`canonical_key`].
pub const MAX_CANONICAL_ORDER: usize = 12;

/// A transform taking one square onto another.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EquivalenceCertificate {
    pub transform: Transform,
}

impl EquivalenceCertificate {
    /// True iff applying the transform to `source` gives `target` exactly.
    pub fn replays(&self, source: &FrequencySquare, target: &FrequencySquare) -> Result<bool> {
        Ok(&source.apply_transform(&self.transform)? == target)
    }

    pub fn inverse(&self) -> Self {
        Self { transform: self.transform.inverse() }
    }

    /// Certificate for `a -> c` from `a -> b` and `b -> c`.
    pub fn then(&self, next: &Self) -> Self {
        Self { transform: self.transform.then(&next.transform) }
    }
}

fn check_shapes(a: &FrequencySquare, b: &FrequencySquare) -> Result<()> {
    if (a.n(), a.m(), a.lambda()) != (b.n(), b.m(), b.lambda()) {
        return Err(Error::ShapeMismatch(format!(
            "F({}; {}^{}) vs F({}; {}^{})",
            a.n(),
            a.lambda(),
            a.m(),
            b.n(),
            b.lambda(),
            b.m()
        )));
    }
    if a.m() > MAX_SYMBOLS {
        return Err(Error::TooLarge(format!("equivalence needs m <= {MAX_SYMBOLS}, got {}", a.m())));
    }
    Ok(())
}

/// Every permutation of `0..m`, lexicographic.
fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn rec(m: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for s in 0..m {
            if !used[s] {
                used[s] = true;
                cur.push(s);
                rec(m, cur, used, out);
                cur.pop();
                used[s] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(m, &mut Vec::new(), &mut vec![false; m], &mut out);
    out
}

/// Per row: the sorted list, over the other rows, of per-symbol overlap
/// counts, with symbols renamed by `pi`. Unchanged by column permutations.
fn row_fingerprints(sq: &FrequencySquare, pi: &[usize]) -> Vec<Vec<Vec<u8>>> {
    let n = sq.n();
    let m = sq.m();
    let masks: Vec<Vec<u64>> = (0..n).map(|r| (1..=m as u8).map(|s| sq.symbol_mask(r, s)).collect()).collect();
    (0..n)
        .map(|r| {
            let mut fp: Vec<Vec<u8>> = (0..n)
                .filter(|&r2| r2 != r)
                .map(|r2| {
                    let mut v = vec![0u8; m];
                    for s in 0..m {
                        v[pi[s]] = (masks[r][s] & masks[r2][s]).count_ones() as u8;
                    }
                    v
                })
                .collect();
            fp.sort_unstable();
            fp
        })
        .collect()
}

/// Row-by-row matching of `src` (symbols renamed by `pi`) onto `dst`, with
/// columns tracked as classes of equal partial columns on both sides.
struct Matcher<'a> {
    src: &'a FrequencySquare,
    dst: &'a FrequencySquare,
    pi: &'a [usize],
    src_fp: Vec<Vec<Vec<u8>>>,
    dst_fp: Vec<Vec<Vec<u8>>>,
    row_map: Vec<usize>,
    used: Vec<bool>,
}

impl Matcher<'_> {
    fn run(&mut self, i: usize, src_cls: &[u32], dst_cls: &[u32]) -> bool {
        let n = self.src.n();
        if i == n {
            return true;
        }
        let mut tried: Vec<&[u8]> = Vec::new();
        for r in 0..n {
            if self.used[r] || self.src_fp[i] != self.dst_fp[r] || tried.contains(&self.dst.row(r)) {
                continue;
            }
            tried.push(self.dst.row(r));
            let Some((s2, d2)) = self.refine(src_cls, dst_cls, i, r) else { continue };
            self.used[r] = true;
            self.row_map[i] = r;
            if self.run(i + 1, &s2, &d2) {
                return true;
            }
            self.used[r] = false;
        }
        false
    }

    /// Splits column classes by the entries of source row `i` and target row
    /// `r`; `None` if some class sizes no longer agree.
    fn refine(&self, src_cls: &[u32], dst_cls: &[u32], i: usize, r: usize) -> Option<(Vec<u32>, Vec<u32>)> {
        let n = self.src.n();
        let m = self.src.m() as u32;
        let src_key: Vec<u32> = (0..n)
            .map(|c| src_cls[c] * m + self.pi[self.src.get(i, c) as usize - 1] as u32)
            .collect();
        let dst_key: Vec<u32> = (0..n).map(|c| dst_cls[c] * m + (self.dst.get(r, c) as u32 - 1)).collect();
        let mut a = src_key.clone();
        let mut b = dst_key.clone();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return None;
        }
        // Compact the ids so they stay small.
        a.dedup();
        let compact = |k: &Vec<u32>| k.iter().map(|x| a.binary_search(x).unwrap() as u32).collect();
        Some((compact(&src_key), compact(&dst_key)))
    }
}

/// A certificate taking `a` onto `b`, or `None` if the squares are not equivalent.
pub fn are_equivalent(a: &FrequencySquare, b: &FrequencySquare) -> Result<Option<EquivalenceCertificate>> {
    check_shapes(a, b)?;
    let n = a.n();
    let m = a.m();
    let identity: Vec<usize> = (0..m).collect();
    let dst_fp = row_fingerprints(b, &identity);
    let mut dst_sorted = dst_fp.clone();
    dst_sorted.sort_unstable();
    for transposed in [false, true] {
        let src = if transposed { a.transpose() } else { a.clone() };
        for pi in permutations(m) {
            let src_fp = row_fingerprints(&src, &pi);
            let mut sorted = src_fp.clone();
            sorted.sort_unstable();
            if sorted != dst_sorted {
                continue;
            }
            let mut matcher = Matcher {
                src: &src,
                dst: b,
                pi: &pi,
                src_fp,
                dst_fp: dst_fp.clone(),
                row_map: vec![0; n],
                used: vec![false; n],
            };
            let zero = vec![0u32; n];
            if !matcher.run(0, &zero, &zero) {
                continue;
            }
            // All rows placed: columns now pair up by their full contents.
            let mut cols = vec![usize::MAX; n];
            let mut taken = vec![false; n];
            for (j, slot) in cols.iter_mut().enumerate() {
                let want = |r: usize| pi[src.get(r, j) as usize - 1] as u8 + 1;
                let hit = (0..n)
                    .find(|&c| !taken[c] && (0..n).all(|r| b.get(matcher.row_map[r], c) == want(r)))
                    .expect("column classes agree");
                taken[hit] = true;
                *slot = hit;
            }
            let symbols = pi.iter().map(|&s| s as u8 + 1).collect();
            let transform = Transform::new(transposed, matcher.row_map.clone(), cols, symbols)?;
            let cert = EquivalenceCertificate { transform };
            debug_assert!(cert.replays(a, b).unwrap_or(false));
            return Ok(Some(cert));
        }
    }
    Ok(None)
}

/// A certificate onto `make_a(lambda)` for a two-symbol square, if one exists.
///
/// The group search is cross-checked against the structural criterion: a
/// two-symbol square is a rearrangement of `A` exactly when the pattern
/// `e e / e f` is absent. Disagreement is reported as an error.
pub fn is_equivalent_to_a(square: &FrequencySquare) -> Result<Option<EquivalenceCertificate>> {
    if square.m() != 2 {
        return Err(Error::WrongSymbolCount(square.m()));
    }
    let cert = are_equivalent(square, &make_a(square.lambda()))?;
    let structural = find_pattern_2x2(square, 1).is_none() && find_pattern_2x2(square, 2).is_none();
    if cert.is_some() != structural {
        return Err(Error::Stalled(format!(
            "group search says {}, pattern test says {}",
            cert.is_some(),
            structural
        )));
    }
    Ok(cert)
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct KeyState {
    transposed: bool,
    used: u64,
    /// Ordered blocks of still-interchangeable columns.
    blocks: Vec<u64>,
    pi: Vec<u8>,
}

/// Lexicographically least row-major grid over the whole equivalence group,
/// prefixed by `[n, m, lambda]`. Equal keys iff equivalent squares.
///
/// Every row holds every symbol, so the first row fixes the relabelling; the
/// search keeps every state that ties for the least prefix so far.
pub fn canonical_key(square: &FrequencySquare) -> Result<Vec<u8>> {
    let n = square.n();
    let m = square.m();
    if n > MAX_CANONICAL_ORDER {
        return Err(Error::TooLarge(format!("canonical key needs n <= {MAX_CANONICAL_ORDER}, got {n}")));
    }
    if m > MAX_SYMBOLS {
        return Err(Error::TooLarge(format!("canonical key needs m <= {MAX_SYMBOLS}, got {m}")));
    }
    let views = [square.clone(), square.transpose()];
    let mut key = vec![n as u8, m as u8, square.lambda() as u8];

    // First row: label block k by the symbol placed k-th.
    let mut states: HashSet<KeyState> = HashSet::new();
    for (t, view) in views.iter().enumerate() {
        for r in 0..n {
            if (0..r).any(|p| view.row(p) == view.row(r)) {
                continue;
            }
            for order in permutations(m) {
                let mut pi = vec![0u8; m];
                for (label, &s) in order.iter().enumerate() {
                    pi[s] = label as u8 + 1;
                }
                let blocks = order.iter().map(|&s| view.symbol_mask(r, s as u8 + 1)).collect();
                states.insert(KeyState { transposed: t == 1, used: 1 << r, blocks, pi });
            }
        }
    }
    key.extend((1..=m as u8).flat_map(|s| std::iter::repeat_n(s, square.lambda())));

    for _ in 1..n {
        let mut best: Option<Vec<u8>> = None;
        let mut next: HashSet<KeyState> = HashSet::new();
        for st in &states {
            let view = &views[st.transposed as usize];
            for r in 0..n {
                if st.used >> r & 1 == 1 || (0..r).any(|p| st.used >> p & 1 == 0 && view.row(p) == view.row(r)) {
                    continue;
                }
                let mut row = Vec::with_capacity(n);
                let mut blocks = Vec::with_capacity(st.blocks.len());
                for &block in &st.blocks {
                    for label in 1..=m as u8 {
                        let mut part = 0u64;
                        let mut bits = block;
                        while bits != 0 {
                            let c = bits.trailing_zeros() as usize;
                            bits &= bits - 1;
                            if st.pi[view.get(r, c) as usize - 1] == label {
                                part |= 1 << c;
                            }
                        }
                        if part != 0 {
                            row.extend(std::iter::repeat_n(label, part.count_ones() as usize));
                            blocks.push(part);
                        }
                    }
                }
                let cmp = best.as_ref().map(|b| row.cmp(b));
                if cmp == Some(std::cmp::Ordering::Greater) {
                    continue;
                }
                if cmp != Some(std::cmp::Ordering::Equal) {
                    best = Some(row);
                    next.clear();
                }
                next.insert(KeyState { transposed: st.transposed, used: st.used | 1 << r, blocks, pi: st.pi.clone() });
            }
        }
        key.extend(best.expect("an unused row remains"));
        states = next;
    }
    Ok(key)
}
