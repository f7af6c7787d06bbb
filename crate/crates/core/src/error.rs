use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("basis index {index} out of range for cutoff f_c = {f_c}")]
    IndexOutOfRange { index: usize, f_c: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("linear program is infeasible (phase-1 residual {0:e})")]
    Infeasible(f64),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("simplex iteration limit ({0}) reached")]
    IterationLimit(usize),

    #[error("no nonnegative measure has these moments (min eigenvalue {0:e})")]
    NoNonnegativeSolution(f64),

    #[error("expected {expected} unit-circle roots, found {found}; moduli {moduli:?}")]
    RootCount { expected: usize, found: usize, moduli: Vec<f64> },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("imaginary residue {0:e} too large for a real comb")]
    ImaginaryResidue(f64),

    #[error("pole of the closed form at integer argument")]
    Pole,

    #[error("numerical breakdown: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
