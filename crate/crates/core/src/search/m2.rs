//! The two-symbol case, done constructively.
//!
//! A square of type `F(2 lambda; lambda, lambda)` either avoids the pattern
//!
//! ```text
//! e e
//! e f
//! ```
//!
//! in which case any two rows agree or are complementary and the square is a
//! rearrangement of `A_{2 lambda}`, or it contains the pattern. Then, with the
//! pattern moved to rows and columns 0 and 1, row swaps among the other rows
//! bring the number `x` of `e` cells on the main diagonal to within one of
//! `lambda`, and a swap of rows 0 and 1 settles `x = lambda - 1`.

use serde::{Deserialize, Serialize};

use crate::constructions::make_a;
use crate::equivalence::EquivalenceCertificate;
use crate::error::{Error, Result};
use crate::square::{Diagonal, FrequencySquare, Transform};

/// Cells `(rows[0], cols[0])`, `(rows[0], cols[1])`, `(rows[1], cols[0])` hold
/// `e` and `(rows[1], cols[1])` holds `f != e`. Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern2x2 {
    pub rows: [usize; 2],
    pub cols: [usize; 2],
    pub e: u8,
    pub f: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum M2Result {
    /// A balanced diagonal, in the coordinates of the input.
    Witness(Diagonal),
    /// The input is a rearrangement of `A_{2 lambda}` with `lambda` odd, so
    /// it has no balanced diagonal. The transform maps the input onto `make_a(lambda)`.
    Certificate(EquivalenceCertificate),
}

/// First occurrence of the pattern for symbol `e`, scanning row pairs in
/// lexicographic order.
pub fn find_pattern_2x2(square: &FrequencySquare, e: u8) -> Option<Pattern2x2> {
    let n = square.n();
    let masks: Vec<u64> = (0..n).map(|r| square.symbol_mask(r, e)).collect();
    for r0 in 0..n {
        for r1 in 0..n {
            if r0 == r1 {
                continue;
            }
            let common = masks[r0] & masks[r1];
            let diff = masks[r0] & !masks[r1];
            if common != 0 && diff != 0 {
                let c0 = common.trailing_zeros() as usize;
                let c1 = diff.trailing_zeros() as usize;
                return Some(Pattern2x2 { rows: [r0, r1], cols: [c0, c1], e, f: square.get(r1, c1) });
            }
        }
    }
    None
}

pub fn constructive_m2(square: &FrequencySquare) -> Result<M2Result> {
    if square.m() != 2 {
        return Err(Error::WrongSymbolCount(square.m()));
    }
    match find_pattern_2x2(square, 1).or_else(|| find_pattern_2x2(square, 2)) {
        Some(p) => balance_from_pattern(square, &p).map(M2Result::Witness),
        None => {
            let cert = a_certificate(square)?;
            let lambda = square.lambda();
            if lambda % 2 == 1 {
                return Ok(M2Result::Certificate(cert));
            }
            let d = even_a_diagonal(lambda).map(&cert.transform.inverse())?;
            debug_assert!(square.is_balanced(&d).unwrap_or(false));
            Ok(M2Result::Witness(d))
        }
    }
}

/// A balanced diagonal of `make_a(lambda)` for even `lambda`: a quarter of the
/// rows on each quadrant.
pub(crate) fn even_a_diagonal(lambda: usize) -> Diagonal {
    let h = lambda / 2;
    let sigma = (0..2 * lambda)
        .map(|i| match i / h {
            0 => i,
            1 => i + h,
            2 => i - h,
            _ => i,
        })
        .collect();
    Diagonal::new_unchecked(sigma)
}

/// For a square avoiding the pattern: rows sharing row 0's `1` columns go to
/// the top half, those columns to the left half, order kept otherwise.
fn a_certificate(square: &FrequencySquare) -> Result<EquivalenceCertificate> {
    let n = square.n();
    let lambda = square.lambda();
    let top = square.symbol_mask(0, 1);
    let (mut rows, mut cols) = (vec![0; n], vec![0; n]);
    let (mut hi, mut lo) = (0, lambda);
    for (r, slot) in rows.iter_mut().enumerate() {
        let to = if square.symbol_mask(r, 1) == top { &mut hi } else { &mut lo };
        *slot = *to;
        *to += 1;
    }
    let (mut hi, mut lo) = (0, lambda);
    for (c, slot) in cols.iter_mut().enumerate() {
        let to = if top >> c & 1 == 1 { &mut hi } else { &mut lo };
        *slot = *to;
        *to += 1;
    }
    let transform = Transform::new(false, rows, cols, vec![1, 2])?;
    let cert = EquivalenceCertificate { transform };
    if !cert.replays(square, &make_a(lambda))? {
        return Err(Error::Stalled("square avoids the pattern but is not a rearrangement of A".into()));
    }
    Ok(cert)
}

fn balance_from_pattern(square: &FrequencySquare, p: &Pattern2x2) -> Result<Diagonal> {
    let n = square.n();
    let lambda = square.lambda() as i64;
    let e = p.e;
    // Working square: position i holds original row rows[i]; column j is original column cols[j].
    let mut rows: Vec<usize> = p.rows.to_vec();
    rows.extend((0..n).filter(|r| !p.rows.contains(r)));
    let mut cols: Vec<usize> = p.cols.to_vec();
    cols.extend((0..n).filter(|c| !p.cols.contains(c)));
    let is_e = |rows: &[usize], i: usize, j: usize| square.get(rows[i], cols[j]) == e;

    for _ in 0..=n {
        let x = (0..n).filter(|&i| is_e(&rows, i, i)).count() as i64;
        let gap = x - lambda;
        if gap == 0 {
            let mut sigma = vec![0; n];
            for i in 0..n {
                sigma[rows[i]] = cols[i];
            }
            return Diagonal::new(sigma);
        }
        if gap == -1 {
            rows.swap(0, 1);
            continue;
        }
        // gap <= -2: rows with f on the diagonal where one sees e in the other's column.
        // gap >= 1: rows with e on the diagonal where one sees f in the other's column.
        let want_e = gap > 0;
        let mut pick: Option<(usize, usize)> = None;
        'scan: for r in 2..n {
            if is_e(&rows, r, r) != want_e {
                continue;
            }
            for r2 in 2..n {
                if r2 == r || is_e(&rows, r2, r2) != want_e || is_e(&rows, r, r2) == want_e {
                    continue;
                }
                // The other new diagonal cell decides whether x moves by 1 or 2.
                let by_one = is_e(&rows, r2, r) == want_e;
                if pick.is_none() || (gap == 1 && by_one) {
                    pick = Some((r, r2));
                }
                if gap != 1 || by_one {
                    break 'scan;
                }
            }
        }
        match pick {
            Some((r, r2)) => rows.swap(r, r2),
            None => return Err(Error::Stalled(format!("no improving row swap with x - lambda = {gap}"))),
        }
    }
    Err(Error::Stalled("row swaps did not converge".into()))
}
