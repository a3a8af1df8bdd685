use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("polynomials live in different algebras ({0} vs {1} variables)")]
    VarMismatch(usize, usize),

    #[error("variable index {index} out of range 1..={n_vars}")]
    IndexOutOfRange { index: usize, n_vars: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("operand {index} is not self-adjoint (max entry deviation {deviation:.3e})")]
    NotSelfAdjoint { index: usize, deviation: f64 },

    #[error("polynomial is not self-adjoint")]
    PolyNotSelfAdjoint,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("Cauchy transform requested on the real axis at {0}")]
    RealArgument(f64),

    #[error("principal value undefined at the atom located at {0}")]
    AtAtom(f64),

    #[error("operation requires an atomless measure")]
    HasAtoms,

    #[error("Stieltjes inversion failed: recovered mass {mass:.6} before renormalization")]
    Inversion { mass: f64 },

    #[error("subordination fixed point did not converge at z = {re} + {im}i")]
    NoConvergence { re: f64, im: f64 },

    #[error("moment system ill-conditioned at degree {degree} (constraint residual {residual:.3e})")]
    IllConditioned { degree: usize, residual: f64 },

    #[error("word of length {len} exceeds the exactness limit {limit} of the truncated Fock space")]
    DepthExceeded { len: usize, limit: usize },

    #[error("truncated Fock space would hold {words} basis words (budget {budget})")]
    BasisBudget { words: usize, budget: usize },

    #[error("Gram matrix of degree {0} is not positive definite")]
    GramFactorization(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
