//! Small dense linear algebra: LU, Jacobi eigensolvers, Jacobi SVD and
//! polynomial roots. Sized for matrices of a few dozen rows.

mod eigen;
mod lu;
mod matrix;
mod roots;
mod svd;

pub use eigen::{hermitian_eigen, symmetric_eigen, ComplexMatrix, HermitianEigen, SymmetricEigen};
pub use lu::Lu;
pub use matrix::Matrix;
pub use roots::polynomial_roots;
pub use svd::{jacobi_svd, lstsq, Svd};
