//! One-sided (Hestenes) Jacobi SVD.

use super::Matrix;
use crate::scalar::{dot, Real};

const MAX_SWEEPS: usize = 80;

/// `A V = U diag(σ)` with `V` orthogonal `n × n`. Columns of `U` belonging to
/// zero singular values are left as zero vectors. Singular values are sorted
/// descending, so the trailing columns of `V` span the numerical kernel.
#[derive(Clone, Debug)]
pub struct Svd<T> {
    pub u: Matrix<T>,
    pub sigma: Vec<T>,
    pub v: Matrix<T>,
}

pub fn jacobi_svd<T: Real>(a: &Matrix<T>) -> Svd<T> {
    let (m, n) = (a.rows(), a.cols());
    // Work on columns stored contiguously.
    let mut cols: Vec<Vec<T>> = (0..n).map(|j| a.column(j)).collect();
    let mut vcols: Vec<Vec<T>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { T::one() } else { T::zero() }).collect())
        .collect();
    let eps = T::epsilon();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s);
                rotate(&mut vcols, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<T> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal));
    let smax = norms.iter().fold(T::zero(), |acc, x| acc.max(*x));
    let floor = smax * eps * T::from_usize_lossy(m.max(n));

    let mut u = Matrix::zeros(m, n);
    let mut v = Matrix::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        let s = norms[j];
        sigma.push(s);
        if s > floor {
            for i in 0..m {
                u[(i, k)] = cols[j][i] / s;
            }
        }
        for i in 0..n {
            v[(i, k)] = vcols[j][i];
        }
    }
    Svd { u, sigma, v }
}

fn rotate<T: Real>(cols: &mut [Vec<T>], p: usize, q: usize, c: T, s: T) {
    let (lo, hi) = cols.split_at_mut(q);
    let (cp, cq) = (&mut lo[p], &mut hi[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

impl<T: Real> Svd<T> {
    /// Number of singular values above `rel_tol · σ_max`.
    pub fn rank(&self, rel_tol: T) -> usize {
        let smax = self.sigma.first().copied().unwrap_or(T::zero());
        if smax == T::zero() {
            return 0;
        }
        self.sigma.iter().filter(|s| **s > rel_tol * smax).count()
    }

    /// Right singular vector of the smallest singular value.
    pub fn last_right_vector(&self) -> Vec<T> {
        let n = self.v.cols();
        self.v.column(n - 1)
    }

    /// Minimum-norm least-squares solution of `A x ≈ b`, truncating singular
    /// values at `rel_tol · σ_max`.
    pub fn solve(&self, b: &[T], rel_tol: T) -> Vec<T> {
        let r = self.rank(rel_tol);
        let n = self.v.rows();
        let utb = self.u.t_matvec(b);
        let mut x = vec![T::zero(); n];
        for k in 0..r {
            let coef = utb[k] / self.sigma[k];
            for i in 0..n {
                x[i] = x[i] + self.v[(i, k)] * coef;
            }
        }
        x
    }
}

/// Least squares by truncated SVD.
pub fn lstsq<T: Real>(a: &Matrix<T>, b: &[T], rel_tol: T) -> Vec<T> {
    jacobi_svd(a).solve(b, rel_tol)
}
