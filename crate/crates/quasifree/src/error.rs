use thiserror::Error;

/// Errors raised by the library. Each variant maps onto one exit class of the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not antisymmetric (relative asymmetry {0:.3e})")]
    NotAntisymmetric(f64),
    #[error("Hamiltonian is not translationally invariant (max deviation {0:.3e})")]
    NotTranslationInvariant(f64),
    #[error("degenerate mode {mode}: {reason}")]
    DegenerateMode { mode: usize, reason: String },
    #[error("invalid covariance matrix: {0}")]
    InvalidCovariance(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dense dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("singular superoperator (estimated nullity {nullity}, smallest/largest singular value {ratio:.3e})")]
    Singular { nullity: usize, ratio: f64 },
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
    #[error("step size {dt} exceeds stability bound {bound}")]
    StepTooLarge { dt: f64, bound: f64 },
    #[error("covariance bound violated by {0:.3e} during integration")]
    Unstable(f64),
    #[error("decay fit failed: {0}")]
    Fit(String),
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by user input rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::InvalidParameter(_) | Error::Dimension(_) | Error::DimensionCap { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
