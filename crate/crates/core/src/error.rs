use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure surfaced by the library.
///
/// Variants fall into two families: input/configuration problems
/// ([`Error::is_validation`]) and numerical failures at run time.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("OutOfChart: chart point {point:?} lies outside the chart domain of {model}")]
    OutOfChart { model: String, point: Vec<f64> },

    #[error("NotOnManifold: point is {residual:.3e} away from {model}")]
    NotOnManifold { model: String, residual: f64 },

    #[error("RejectionStall: acceptance rate {rate:.3e} after {proposals} proposals")]
    RejectionStall { rate: f64, proposals: u64 },

    #[error("FrameNotTangent: frame residual {residual:.3e}")]
    FrameNotTangent { residual: f64 },

    #[error("RankDeficient: singular value ratio {ratio:.3e} (k_z = {k})")]
    RankDeficient { ratio: f64, k: usize },

    #[error("TooFewNeighbors: found {found}, need at least {required}")]
    TooFewNeighbors { found: usize, required: usize },

    #[error("IllConditioned: cond(Z^T Z) = {cond:.3e}")]
    IllConditioned { cond: f64 },

    #[error("BadLength: expected {expected}, found {found}")]
    BadLength { expected: usize, found: usize },

    #[error("DegenerateOverlap: smallest singular value of U^T E is {sigma_min:.3e}")]
    DegenerateOverlap { sigma_min: f64 },

    #[error("UnsupportedPattern: {0}")]
    UnsupportedPattern(String),

    #[error("QuadratureNotConverged: {what} (last change {change:.3e})")]
    QuadratureNotConverged { what: String, change: f64 },

    #[error("MissingCurvatureData: {0}")]
    MissingCurvatureData(String),

    #[error("NotSymmetric: {0}")]
    NotSymmetric(String),

    #[error("DimensionMismatch: {0}")]
    DimensionMismatch(String),

    #[error("EmptyNeighborhood: no sample within eps = {eps}")]
    EmptyNeighborhood { eps: f64 },

    #[error("InvalidArgument: {0}")]
    InvalidArgument(String),

    #[error("ParseError: {0}")]
    Parse(String),

    #[error("ValidationError: `{key}`: {message}")]
    Validation { key: String, message: String },

    #[error("IoError: {0}")]
    Io(String),
}

impl Error {
    /// Input or configuration errors, as opposed to numerical failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse(_)
                | Error::Validation { .. }
                | Error::InvalidArgument(_)
                | Error::OutOfChart { .. }
                | Error::BadLength { .. }
                | Error::DimensionMismatch(_)
                | Error::UnsupportedPattern(_)
        )
    }

    pub fn validation(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
