//! Small dense linear algebra over row-major `f64` buffers.
//!
//! Everything here targets matrices of side at most a few dozen, so the
//! implementations favor simplicity and numerical robustness over blocking:
//! LU with partial pivoting for determinants and solves, Gaussian
//! elimination with complete pivoting for numerical rank, and a one-sided
//! Jacobi SVD for truncated minimum-norm least squares.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    math::sqrt(dot(a, a))
}

pub fn frobenius(a: &[f64]) -> f64 {
    math::sqrt(a.iter().map(|x| x * x).sum())
}

/// Determinant of the `n`x`n` matrix `a` (row major) by LU with partial
/// pivoting. The buffer is consumed as scratch. Exact zero pivots give 0.
pub fn det_lu(mut a: Vec<f64>, n: usize) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    let mut sign = 1.0;
    for k in 0..n {
        let mut piv = k;
        for r in k + 1..n {
            if a[r * n + k].abs() > a[piv * n + k].abs() {
                piv = r;
            }
        }
        if a[piv * n + k] == 0.0 {
            return 0.0;
        }
        if piv != k {
            for c in 0..n {
                a.swap(k * n + c, piv * n + c);
            }
            sign = -sign;
        }
        let d = a[k * n + k];
        for r in k + 1..n {
            let m = a[r * n + k] / d;
            a[r * n + k] = 0.0;
            for c in k + 1..n {
                a[r * n + c] -= m * a[k * n + c];
            }
        }
    }
    let mut det = sign;
    for k in 0..n {
        det *= a[k * n + k];
    }
    det
}

/// Solve `a x = b` for square `a` (row major, consumed as scratch) by LU
/// with partial pivoting. `None` when an exactly zero pivot appears.
pub fn solve_lu(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for k in 0..n {
        let mut piv = k;
        for r in k + 1..n {
            if a[r * n + k].abs() > a[piv * n + k].abs() {
                piv = r;
            }
        }
        if a[piv * n + k] == 0.0 {
            return None;
        }
        if piv != k {
            for c in 0..n {
                a.swap(k * n + c, piv * n + c);
            }
            b.swap(k, piv);
        }
        let d = a[k * n + k];
        for r in k + 1..n {
            let m = a[r * n + k] / d;
            if m != 0.0 {
                for c in k + 1..n {
                    a[r * n + c] -= m * a[k * n + c];
                }
                b[r] -= m * b[k];
            }
        }
    }
    for k in (0..n).rev() {
        let mut s = b[k];
        for c in k + 1..n {
            s -= a[k * n + c] * b[c];
        }
        b[k] = s / a[k * n + k];
    }
    Some(b)
}

/// Numerical rank of the `rows`x`cols` matrix by Gaussian elimination with
/// complete pivoting. A pivot counts while its magnitude exceeds
/// `rel_tol` times the largest entry of the original matrix.
pub fn rank(mut a: Vec<f64>, rows: usize, cols: usize, rel_tol: f64) -> usize {
    debug_assert_eq!(a.len(), rows * cols);
    let largest = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if largest == 0.0 {
        return 0;
    }
    let threshold = rel_tol * largest;
    let steps = rows.min(cols);
    let mut rank = 0;
    for k in 0..steps {
        let mut best = (k, k);
        let mut best_abs = 0.0;
        for r in k..rows {
            for c in k..cols {
                let v = a[r * cols + c].abs();
                if v > best_abs {
                    best_abs = v;
                    best = (r, c);
                }
            }
        }
        if best_abs <= threshold {
            break;
        }
        let (pr, pc) = best;
        if pr != k {
            for c in 0..cols {
                a.swap(k * cols + c, pr * cols + c);
            }
        }
        if pc != k {
            for r in 0..rows {
                a.swap(r * cols + k, r * cols + pc);
            }
        }
        let d = a[k * cols + k];
        for r in k + 1..rows {
            let m = a[r * cols + k] / d;
            if m != 0.0 {
                for c in k..cols {
                    a[r * cols + c] -= m * a[k * cols + c];
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Minimum-norm least-squares solution of `a x = b` for square `a`
/// (row major) via one-sided Jacobi SVD. Singular values at or below
/// `rcond` times the largest are treated as zero. Returns the solution and
/// the retained rank.
pub fn lstsq_min_norm(a: &[f64], b: &[f64], n: usize, rcond: f64) -> (Vec<f64>, usize) {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    // work on columns: w[k] holds column k of the rotated matrix
    let mut w: Vec<Vec<f64>> = (0..n).map(|c| (0..n).map(|r| a[r * n + c]).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|c| (0..n).map(|r| if r == c { 1.0 } else { 0.0 }).collect())
        .collect();

    // sweep column pairs until all are numerically orthogonal
    let eps = 1e-15;
    for _sweep in 0..30 {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let (wi, wj) = pair_mut(&mut w, i, j);
                let aii = dot(wi, wi);
                let ajj = dot(wj, wj);
                let g = dot(wi, wj);
                if g.abs() <= eps * math::sqrt(aii * ajj) || g == 0.0 {
                    continue;
                }
                rotated = true;
                let tau = (ajj - aii) / (2.0 * g);
                let t = {
                    let s = if tau >= 0.0 { 1.0 } else { -1.0 };
                    s / (tau.abs() + math::sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / math::sqrt(1.0 + t * t);
                let s = c * t;
                rotate(wi, wj, c, s);
                let (vi, vj) = pair_mut(&mut v, i, j);
                rotate(vi, vj, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let sigmas: Vec<f64> = w.iter().map(|col| norm2(col)).collect();
    let sigma_max = sigmas.iter().fold(0.0_f64, |m, s| m.max(*s));
    let cut = rcond * sigma_max;

    // x = sum over retained k of v_k * <w_k, b> / sigma_k^2,
    // since <w_k, b> = sigma_k * <u_k, b>
    let mut x = vec![0.0; n];
    let mut kept = 0;
    for k in 0..n {
        if sigmas[k] > cut && sigmas[k] > 0.0 {
            kept += 1;
            let coeff = dot(&w[k], b) / (sigmas[k] * sigmas[k]);
            for r in 0..n {
                x[r] += coeff * v[k][r];
            }
        }
    }
    (x, kept)
}

fn pair_mut(cols: &mut [Vec<f64>], i: usize, j: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(i < j);
    let (lo, hi) = cols.split_at_mut(j);
    (&mut lo[i], &mut hi[0])
}

/// Plane rotation of two columns: (ci, cj) <- (c*ci - s*cj, s*ci + c*cj).
fn rotate(ci: &mut [f64], cj: &mut [f64], c: f64, s: f64) {
    for (a, b) in ci.iter_mut().zip(cj.iter_mut()) {
        let (x, y) = (*a, *b);
        *a = c * x - s * y;
        *b = s * x + c * y;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_hand_cases() {
        assert_eq!(det_lu(vec![3.0], 1), 3.0);
        // det [[1,2],[3,4]] = -2
        assert!((det_lu(vec![1.0, 2.0, 3.0, 4.0], 2) + 2.0).abs() < 1e-14);
        // permutation matrix with one swap: det -1
        let p = vec![0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        assert_eq!(det_lu(p, 3), -1.0);
        // singular
        assert_eq!(det_lu(vec![1.0, 2.0, 2.0, 4.0], 2), 0.0);
    }

    #[test]
    fn solve_matches_hand_solution() {
        // [[2,1],[1,3]] x = (5,10) has x = (1,3)
        let x = solve_lu(vec![2.0, 1.0, 1.0, 3.0], vec![5.0, 10.0], 2).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 3.0).abs() < 1e-14);
        assert!(solve_lu(vec![1.0, 2.0, 2.0, 4.0], vec![1.0, 1.0], 2).is_none());
    }

    #[test]
    fn rank_with_complete_pivoting() {
        assert_eq!(rank(vec![1.0, 2.0, 2.0, 4.0], 2, 2, 1e-10), 1);
        assert_eq!(rank(vec![1.0, 0.0, 0.0, 1.0], 2, 2, 1e-10), 2);
        assert_eq!(rank(vec![0.0; 6], 2, 3, 1e-10), 0);
        // wide matrix, full row rank
        let a = vec![1.0, 0.0, 2.0, 0.0, 1.0, -1.0];
        assert_eq!(rank(a, 2, 3, 1e-10), 2);
        // tiny perturbation below the relative threshold does not add rank
        let a = vec![1.0, 2.0, 2.0, 4.0 + 1e-13];
        assert_eq!(rank(a, 2, 2, 1e-10), 1);
    }

    #[test]
    fn min_norm_least_squares() {
        // full-rank square system reduces to the exact solve
        let a = vec![2.0, 1.0, 1.0, 3.0];
        let (x, kept) = lstsq_min_norm(&a, &[5.0, 10.0], 2, 1e-10);
        assert_eq!(kept, 2);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 3.0).abs() < 1e-12);

        // rank-1 consistent system: rows (1,1) and (2,2), b=(2,4);
        // minimum-norm solution is (1,1)
        let a = vec![1.0, 1.0, 2.0, 2.0];
        let (x, kept) = lstsq_min_norm(&a, &[2.0, 4.0], 2, 1e-10);
        assert_eq!(kept, 1);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);

        // rank-2 block plus a zero row, consistent: A=[[0,2,0],[-1,0,0],[0,0,0]],
        // b=(0,1,0) gives minimum-norm x=(-1,0,0)
        let a = vec![0.0, 2.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let (x, kept) = lstsq_min_norm(&a, &[0.0, 1.0, 0.0], 3, 1e-10);
        assert_eq!(kept, 2);
        assert!((x[0] + 1.0).abs() < 1e-12 && x[1].abs() < 1e-12 && x[2].abs() < 1e-12);
    }

    #[test]
    fn min_norm_residual_is_orthogonal_projection() {
        // inconsistent rank-1 system: residual should equal the component of
        // b outside the column space
        let a = vec![1.0, 1.0, 1.0, 1.0];
        let (x, kept) = lstsq_min_norm(&a, &[1.0, 0.0], 2, 1e-10);
        assert_eq!(kept, 1);
        // columns span (1,1); projection of (1,0) is (1/2,1/2)
        let r0 = x[0] + x[1] - 1.0;
        let r1 = x[0] + x[1];
        assert!((r0 + 0.5).abs() < 1e-12 && (r1 - 0.5).abs() < 1e-12);
        // minimum norm: x proportional to (1,1)
        assert!((x[0] - x[1]).abs() < 1e-12);
    }
}
