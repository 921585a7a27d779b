use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("polynomial degree {0} outside supported range 1..={max}", max = crate::gauss_lobatto::MAX_DEGREE)]
    InvalidDegree(usize),

    #[error("Newton iteration for Gauss-Lobatto node {node} of degree {degree} did not converge")]
    NodeNewtonFailed { degree: usize, node: usize },

    #[error("grid needs at least 2 cells per axis, got {0}")]
    TooFewCells(usize),

    #[error("grid dimension must be 1 or 2, got {0}")]
    InvalidDimension(usize),

    #[error("empty or reversed domain [{0}, {1}]")]
    InvalidDomain(f64, f64),

    #[error("vector length {got} does not match node count {expected}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("dense eigen backend limited to {limit} nodes, problem has {nodes}")]
    OversizeProblem { nodes: usize, limit: usize },

    #[error("tensor backend needs a tensor-product grid")]
    NotTensorGrid,

    #[error("phi-function order {0} outside 0..={max}", max = crate::exp_action::MAX_PHI_ORDER)]
    PhiOrderOutOfRange(usize),

    #[error("extrapolation degree {0} exceeds supported maximum")]
    DegreeOverflow(usize),

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("eigendecomposition failed")]
    Eigen,

    #[error("sparse factorization failed at contour node {0}")]
    Factorization(usize),

    #[error("logarithmic potential evaluated at |u| >= 1 (u = {0})")]
    DomainViolation(f64),

    #[error("no admissible root: theta_c / theta = {0} must exceed 1")]
    NoRoot(f64),

    #[error("step count k = {0} outside 1..=6")]
    InvalidStepCount(usize),

    #[error("invalid scheme configuration: {0}")]
    InvalidScheme(String),

    #[error("starting procedure failed at level {level}: Newton residual {residual:e} after {iterations} iterations")]
    StartingFailure {
        level: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("non-positive error value {0} in rate estimate")]
    NonPositiveError(f64),

    #[error("need at least {need} values, got {got}")]
    TooFewValues { need: usize, got: usize },

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
