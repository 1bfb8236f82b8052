use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystems(String),

    #[error(
        "matrix is not Hermitian (max |M - M^dagger| = {max_asymmetry:e}, tolerance {tolerance:e})"
    )]
    NotHermitian { max_asymmetry: f64, tolerance: f64 },

    #[error("not a density operator: {0}")]
    NotDensity(String),

    #[error("unsupported spin dimension {0} (expected 2 or 3)")]
    UnsupportedDimension(usize),

    #[error("negativity {raw} outside [0, 1] beyond roundoff; evolution or input is inconsistent")]
    NegativityOutOfRange { raw: f64 },

    #[error("invalid X-state coefficients: {0}")]
    InvalidXState(String),

    #[error("amplitudes not normalized (sum of squares = {0})")]
    NotNormalized(f64),

    #[error("{what} = {value} outside [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn out_of_range(what: &'static str, value: f64, min: f64, max: f64) -> Self {
        Error::OutOfRange {
            what,
            value,
            min,
            max,
        }
    }
}
