use thiserror::Error;

/// Errors raised while planning or applying an operator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FioError {
    #[error("N must be a power of two (got {0})")]
    NotPowerOfTwo(usize),

    #[error("center exponent s = {s} leaves no corona for N = {n} (need log2(N) - s >= 1)")]
    NoCorona { n: usize, s: u32 },

    #[error("corona index {j} out of range 1..={count}")]
    CoronaOutOfRange { j: usize, count: usize },

    #[error("b = {0} must be a power of two and at least 4")]
    InvalidBoxWidth(usize),

    #[error("corona scale N_j = {n_j} is smaller than b^2 = {b_squared}")]
    CoronaTooSmall { n_j: usize, b_squared: usize },

    #[error("Chebyshev order q = {0} must be at least 2")]
    InvalidOrder(usize),

    #[error("unsupported dimension {0} (expected 2 or 3)")]
    InvalidDimension(usize),

    #[error("scenario {scenario} is defined in {expected}D, plan asks for {got}D")]
    DimensionMismatch {
        scenario: String,
        expected: usize,
        got: usize,
    },

    #[error("input length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("Y0 is undefined for x = {0} (requires x > 0)")]
    BesselDomain(f64),

    #[error("amplitude factorization reached rank cap {cap} with residual {residual:.3e} > {tol:.1e}")]
    RankCapExceeded { cap: usize, residual: f64, tol: f64 },

    #[error("amplitude is not finite at a sampled point")]
    NonFiniteAmplitude,

    #[error("reference potential is identically zero on the sample set")]
    ZeroReference,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("internal schedule error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, FioError>;
