use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("not a diffusion problem: alpha2 = {0} must be positive")]
    NotDiffusive(f64),

    #[error("alpha1 = 0: the canonical transformation is undefined for pure diffusion")]
    DegenerateConvection,

    #[error("invalid interval [{left}, {right}]: left endpoint must be below right")]
    InvalidInterval { left: f64, right: f64 },

    #[error("{name} = {value} must be positive and finite")]
    NonPositive { name: &'static str, value: f64 },

    #[error("incompatible data at the {side} boundary: g(0) - f = {mismatch:e}")]
    Incompatible { side: &'static str, mismatch: f64 },

    #[error("need at least 2 space intervals, got N = {0}")]
    TooFewIntervals(usize),

    #[error("need at least 1 time step, got M = {0}")]
    TooFewSteps(usize),

    #[error("space step dz = {0} violates 0 < dz < 2")]
    StepTooLarge(f64),

    #[error("dz = {dz} does not divide the interval of length {length} into whole intervals")]
    NonUniformGrid { dz: f64, length: f64 },

    #[error("closed-form Toeplitz inverse needs sub*sup > 0, got {0:e}")]
    FormulaInapplicable(f64),

    #[error("closed-form Toeplitz inverse has a vanishing denominator p_n(x)")]
    SingularDenominator,

    #[error("singular tridiagonal system (zero pivot at row {0})")]
    SingularSystem(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index ({row}, {col}) outside a matrix of order {order}")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        order: usize,
    },

    #[error("matrix order {order} exceeds the dense limit {cap}")]
    DenseCapExceeded { order: usize, cap: usize },

    #[error("dense eigensolver failed to converge")]
    EigenNotConverged,

    #[error("dense singular value decomposition failed to converge")]
    SvdNotConverged,

    #[error("eigenvalue rho = -1 makes the amplification map singular")]
    SingularAmplification,

    #[error(
        "power iteration did not converge after {iterations} iterations (best estimate {estimate})"
    )]
    NotConverged { estimate: f64, iterations: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositive { name, value })
    }
}
