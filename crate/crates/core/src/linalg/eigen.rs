//! Cyclic Jacobi eigensolvers for small dense symmetric and Hermitian matrices.

use num_complex::Complex;

use super::Matrix;
use crate::scalar::Real;

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition `A = V diag(λ) Vᵀ`, eigenvalues ascending, eigenvectors
/// stored as the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

fn off_diagonal_norm<T: Real>(a: &Matrix<T>) -> T {
    let n = a.rows();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s = s + a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi. Runs sweeps until the off-diagonal Frobenius norm is below
/// `1e-13 ‖A‖_F` (or machine epsilon for narrower scalars).
pub fn symmetric_eigen<T: Real>(a: &Matrix<T>) -> SymmetricEigen<T> {
    assert!(a.is_square(), "eigen of non-square matrix");
    let n = a.rows();
    let mut m = a.symmetrize();
    let mut v = Matrix::identity(n);
    let target = T::lit(1e-13).max(T::epsilon() * T::lit(4.0)) * a.frobenius();

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&m) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    SymmetricEigen { values, vectors }
}

/// Dense complex square matrix, stored as separate real and imaginary parts.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix<T> {
    pub re: Matrix<T>,
    pub im: Matrix<T>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut re = Matrix::zeros(n, n);
        let mut im = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let z = f(i, j);
                re[(i, j)] = z.re;
                im[(i, j)] = z.im;
            }
        }
        Self { re, im }
    }

    pub fn dim(&self) -> usize {
        self.re.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        Complex::new(self.re[(i, j)], self.im[(i, j)])
    }

    pub fn matvec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j) * x[j]).fold(Complex::new(T::zero(), T::zero()), |a, b| a + b))
            .collect()
    }

    /// Leading principal `k × k` block.
    pub fn leading(&self, k: usize) -> Self {
        Self::from_fn(k, |i, j| self.get(i, j))
    }

    pub fn frobenius(&self) -> T {
        (self.re.frobenius().powi(2) + self.im.frobenius().powi(2)).sqrt()
    }

    /// The real symmetric embedding `[[Re, -Im], [Im, Re]]` of a Hermitian matrix.
    pub fn real_embedding(&self) -> Matrix<T> {
        let n = self.dim();
        Matrix::from_fn(2 * n, 2 * n, |i, j| {
            let (bi, ri) = (i / n, i % n);
            let (bj, rj) = (j / n, j % n);
            match (bi, bj) {
                (0, 0) | (1, 1) => self.re[(ri, rj)],
                (0, 1) => -self.im[(ri, rj)],
                _ => self.im[(ri, rj)],
            }
        })
    }
}

/// Hermitian eigendecomposition with eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    /// Unit eigenvectors, one per value.
    pub vectors: Vec<Vec<Complex<T>>>,
}

fn cdot<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.conj() * *y)
        .fold(Complex::new(T::zero(), T::zero()), |s, z| s + z)
}

/// Hermitian eigensolver through Jacobi on the `2n`-dimensional real
/// embedding. Every eigenvalue appears twice in the embedding; eigenvectors
/// are recovered by complex Gram–Schmidt over the embedded pairs.
pub fn hermitian_eigen<T: Real>(h: &ComplexMatrix<T>) -> HermitianEigen<T> {
    let n = h.dim();
    let eig = symmetric_eigen(&h.real_embedding());
    let mut values = Vec::with_capacity(n);
    let mut vectors: Vec<Vec<Complex<T>>> = Vec::with_capacity(n);
    let half = T::lit(0.5);
    for col in 0..2 * n {
        if vectors.len() == n {
            break;
        }
        let mut z: Vec<Complex<T>> = (0..n)
            .map(|i| Complex::new(eig.vectors[(i, col)], eig.vectors[(i + n, col)]))
            .collect();
        for u in &vectors {
            let c = cdot(u, &z);
            for (zi, ui) in z.iter_mut().zip(u) {
                *zi = *zi - *ui * c;
            }
        }
        let norm = z.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt();
        if norm > half {
            z.iter_mut().for_each(|x| *x = *x / norm);
            values.push(eig.values[col]);
            vectors.push(z);
        }
    }
    HermitianEigen { values, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_reconstructs() {
        let a = Matrix::<f64>::from_rows(&[
            vec![4.0, 1.0, -2.0, 0.5],
            vec![1.0, 3.0, 0.0, 1.0],
            vec![-2.0, 0.0, 1.0, 2.0],
            vec![0.5, 1.0, 2.0, -1.0],
        ]);
        let e = symmetric_eigen(&a);
        for w in e.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
        let d = Matrix::from_fn(4, 4, |i, j| if i == j { e.values[i] } else { 0.0 });
        let r = e.vectors.matmul(&d).matmul(&e.vectors.transpose());
        assert!(r.sub(&a).max_abs() < 1e-12);
        let vtv = e.vectors.transpose().matmul(&e.vectors);
        assert!(vtv.sub(&Matrix::identity(4)).max_abs() < 1e-12);
    }

    #[test]
    fn hermitian_pairs_are_deduplicated() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let h = ComplexMatrix::<f64>::from_fn(2, |i, j| match (i, j) {
            (0, 0) | (1, 1) => Complex::new(2.0, 0.0),
            (0, 1) => Complex::new(0.0, 1.0),
            _ => Complex::new(0.0, -1.0),
        });
        let e = hermitian_eigen(&h);
        assert_eq!(e.values.len(), 2);
        assert!((e.values[0] - 1.0).abs() < 1e-12);
        assert!((e.values[1] - 3.0).abs() < 1e-12);
        for (lam, v) in e.values.iter().zip(&e.vectors) {
            let hv = h.matvec(v);
            for (a, b) in hv.iter().zip(v) {
                assert!((*a - *b * *lam).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_hermitian_yields_orthonormal_basis() {
        let h = ComplexMatrix::<f64>::from_fn(3, |i, j| Complex::new(if i == j { 1.0 } else { 0.0 }, 0.0));
        let e = hermitian_eigen(&h);
        assert_eq!(e.vectors.len(), 3);
        for i in 0..3 {
            for j in 0..3 {
                let d = cdot(&e.vectors[i], &e.vectors[j]).norm();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-12);
            }
        }
    }
}
