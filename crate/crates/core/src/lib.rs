//! Recovery of sparse atomic measures from trigonometric moments.
//!
//! The crate solves total-variation minimization over measures on the torus
//! by grid linear programming, sparsifies solutions to the face-dimension
//! bounds (atomic Carathéodory pruning and semidefinite rank reduction),
//! certifies optimality through dual trigonometric polynomials, and checks
//! everything against closed forms: the two-spike Dirac comb and the
//! Carathéodory–Toeplitz representation of nonnegative measures.
//!
//! All numerical code is generic over [`Real`]; the aliases below fix the
//! scalar to `f64`, which is what the solvers' tolerances are tuned for.

pub mod bp;
pub mod certificate;
pub mod error;
pub mod instances;
pub mod linalg;
pub mod lp;
pub mod measures;
pub mod oracle;
pub mod scalar;
pub mod sparsify;
pub mod spline;
pub mod toeplitz;

pub use error::{Error, Result};
pub use measures::{Atom, AtomicMeasure, ComplexMoments, MomentVector, TorusPoint, TrigPolynomial, TrigSystem};
pub use scalar::Real;

pub type Measure = AtomicMeasure<f64>;
pub type Moments = MomentVector<f64>;
pub type Poly = TrigPolynomial<f64>;
pub type Point = TorusPoint<f64>;
pub type Mat = linalg::Matrix<f64>;
