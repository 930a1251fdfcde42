//! Endpoint-constrained dynamic time warping with squared local cost.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Alignment between two sequences, from (0, 0) to (len_a − 1, len_b − 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarpingPath {
    pub pairs: Vec<(usize, usize)>,
}

impl WarpingPath {
    /// Checks endpoints, step set {(1,0),(0,1),(1,1)} and monotonicity.
    pub fn is_admissible(&self, len_a: usize, len_b: usize) -> bool {
        let (Some(&first), Some(&last)) = (self.pairs.first(), self.pairs.last()) else {
            return false;
        };
        if first != (0, 0) || last != (len_a - 1, len_b - 1) {
            return false;
        }
        self.pairs.windows(2).all(|w| {
            let di = w[1].0 as isize - w[0].0 as isize;
            let dj = w[1].1 as isize - w[0].1 as isize;
            matches!((di, dj), (1, 0) | (0, 1) | (1, 1))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment<T> {
    pub cost: T,
    pub path: WarpingPath,
}

fn check<T: Real>(s: &[T], name: &str) -> Result<()> {
    if s.is_empty() {
        return Err(Error::param(format!("DTW input `{name}` is empty")));
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::param(format!("DTW input `{name}` has non-finite values")));
    }
    Ok(())
}

#[inline(always)]
fn min3<T: Real>(a: T, b: T, c: T) -> T {
    let ab = if b < a { b } else { a };
    if c < ab {
        c
    } else {
        ab
    }
}

/// Fills `row` for the first element of `a`: a running sum of local costs.
#[inline(always)]
fn first_row<T: Real>(a0: T, b: &[T], row: &mut [T]) {
    let mut acc = T::zero();
    for (r, &bj) in row.iter_mut().zip(b) {
        let d = a0 - bj;
        acc = acc + d * d;
        *r = acc;
    }
}

/// One DP row from the previous one. Inputs are finite, so plain
/// comparisons stand in for NaN-aware minima.
#[inline(always)]
fn next_row<T: Real>(ai: T, b: &[T], prev: &[T], cur: &mut [T]) {
    let d = ai - b[0];
    let mut left = prev[0] + d * d;
    cur[0] = left;
    for ((c, p), &bj) in cur[1..].iter_mut().zip(prev.windows(2)).zip(&b[1..]) {
        let d = ai - bj;
        left = min3(p[0], p[1], left) + d * d;
        *c = left;
    }
}

/// Accumulated-cost matrix, row-major `(len_a) x (len_b)`.
fn accumulate<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    let m = b.len();
    let mut acc = vec![T::zero(); a.len() * m];
    first_row(a[0], b, &mut acc[..m]);
    for (i, &ai) in a.iter().enumerate().skip(1) {
        let (done, rest) = acc.split_at_mut(i * m);
        next_row(ai, b, &done[(i - 1) * m..], &mut rest[..m]);
    }
    acc
}

/// DTW cost only, with a two-row buffer.
pub fn dtw_cost<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    check(a, "a")?;
    check(b, "b")?;
    let m = b.len();
    let mut prev = vec![T::zero(); m];
    let mut cur = vec![T::zero(); m];
    first_row(a[0], b, &mut prev);
    for &ai in &a[1..] {
        next_row(ai, b, &prev, &mut cur);
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m - 1])
}

/// Optimal alignment cost and path. Backtracking prefers the diagonal step,
/// then the step in `a`, then the step in `b`.
pub fn dtw<T: Real>(a: &[T], b: &[T]) -> Result<Alignment<T>> {
    check(a, "a")?;
    check(b, "b")?;
    let (n, m) = (a.len(), b.len());
    let acc = accumulate(a, b);
    let mut pairs = Vec::with_capacity(n + m);
    let (mut i, mut j) = (n - 1, m - 1);
    pairs.push((i, j));
    while (i, j) != (0, 0) {
        (i, j) = if i == 0 {
            (0, j - 1)
        } else if j == 0 {
            (i - 1, 0)
        } else {
            let diag = acc[(i - 1) * m + j - 1];
            let up = acc[(i - 1) * m + j];
            let left = acc[i * m + j - 1];
            if diag <= up && diag <= left {
                (i - 1, j - 1)
            } else if up <= left {
                (i - 1, j)
            } else {
                (i, j - 1)
            }
        };
        pairs.push((i, j));
    }
    pairs.reverse();
    Ok(Alignment {
        cost: acc[n * m - 1],
        path: WarpingPath { pairs },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Exhaustive minimum over all admissible paths.
    fn brute_force(a: &[f64], b: &[f64]) -> f64 {
        fn go(a: &[f64], b: &[f64], i: usize, j: usize) -> f64 {
            let local = (a[i] - b[j]).powi(2);
            if i + 1 == a.len() && j + 1 == b.len() {
                return local;
            }
            let mut best = f64::INFINITY;
            if i + 1 < a.len() {
                best = best.min(go(a, b, i + 1, j));
            }
            if j + 1 < b.len() {
                best = best.min(go(a, b, i, j + 1));
            }
            if i + 1 < a.len() && j + 1 < b.len() {
                best = best.min(go(a, b, i + 1, j + 1));
            }
            local + best
        }
        go(a, b, 0, 0)
    }

    fn path_cost(a: &[f64], b: &[f64], p: &WarpingPath) -> f64 {
        p.pairs.iter().map(|&(i, j)| (a[i] - b[j]).powi(2)).sum()
    }

    #[test]
    fn self_alignment_is_diagonal() {
        let s = [0.3, -1.0, 2.5, 2.5, 0.0];
        let al = dtw(&s, &s).unwrap();
        assert_eq!(al.cost, 0.0);
        assert_eq!(al.path.pairs, (0..5).map(|i| (i, i)).collect::<Vec<_>>());
    }

    #[test]
    fn worked_examples() {
        let al = dtw(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(al.cost, 2.0);
        assert_eq!(brute_force(&[0.0, 0.0], &[1.0, 1.0]), 2.0);
        assert_eq!(al.path.pairs, vec![(0, 0), (1, 1)]);

        let (a, b) = ([0.0, 1.0, 0.0], [0.0, 1.0, 1.0, 0.0]);
        assert_eq!(brute_force(&a, &b), 0.0);
        let al = dtw(&a, &b).unwrap();
        assert_eq!(al.cost, 0.0);
        assert!(al.path.is_admissible(3, 4));
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(dtw::<f64>(&[], &[1.0]).is_err());
        assert!(dtw_cost::<f64>(&[1.0], &[]).is_err());
        assert!(dtw(&[f64::NAN], &[1.0]).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let al = dtw(&[0.0f32, 1.0, 2.0], &[0.0f32, 2.0]).unwrap();
        assert_eq!(al.cost, 1.0);
    }

    proptest! {
        #[test]
        fn dp_matches_brute_force(
            a in proptest::collection::vec(-2.0f64..2.0, 1..6),
            b in proptest::collection::vec(-2.0f64..2.0, 1..6),
        ) {
            let al = dtw(&a, &b).unwrap();
            prop_assert!(al.path.is_admissible(a.len(), b.len()));
            prop_assert!((al.cost - path_cost(&a, &b, &al.path)).abs() < 1e-12);
            prop_assert!((al.cost - brute_force(&a, &b)).abs() < 1e-12);
            prop_assert_eq!(al.cost, dtw_cost(&a, &b).unwrap());
            prop_assert!((al.cost - dtw(&b, &a).unwrap().cost).abs() < 1e-12);
        }
    }
}
