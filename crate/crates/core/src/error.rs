use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{solver} did not converge: residual {residual:.3e} after {iterations} iterations")]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("{0}: breakdown (zero curvature direction)")]
    Breakdown(&'static str),

    #[error("compatibility violated: interior {interior:.6e} vs boundary {boundary:.6e}")]
    Compatibility { interior: f64, boundary: f64 },

    #[error("CFL violated: dt = {dt:.3e} exceeds limit {limit:.3e}")]
    Cfl { dt: f64, limit: f64 },

    #[error("solvability drift {0:.3e} exceeds 1e-7")]
    SolvabilityDrift(f64),

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("check failed: {0}")]
    Check(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Check(_) => 3,
            _ => 2,
        }
    }
}
