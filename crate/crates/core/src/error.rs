use thiserror::Error;

/// Errors raised by model construction, integration and the experiment drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("chain needs at least 2 sites, got {0}")]
    TooFewSites(usize),

    #[error("`{field}` has length {found}, expected {expected}")]
    LengthMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("`{field}` must be strictly positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },

    #[error("`{field}` must be non-negative, got {value}")]
    Negative { field: &'static str, value: f64 },

    #[error("`{field}` must be finite")]
    NonFinite { field: &'static str },

    #[error("site index {index} outside 1..={n_sites}")]
    SiteOutOfRange { index: usize, n_sites: usize },

    #[error("state dimension {found} does not match chain dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("initial state is not a valid density matrix: {0}")]
    InvalidState(String),

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("step budget exhausted at t = {t}")]
    TooManySteps { t: f64 },

    #[error("invalid setting: {0}")]
    InvalidSetting(String),

    #[error("beta0 = {beta0} inconsistent with 2*epsilon/gamma = {implied}")]
    DriveMismatch { beta0: f64, implied: f64 },

    #[error("boson truncation n_fock = {n_fock} leaves thermal tail {tail:e} (limit 1e-6)")]
    TruncationTail { n_fock: usize, tail: f64 },

    #[error("at beta0 = {beta0}: {source}")]
    AtBeta0 {
        beta0: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("realization {index}: {source}")]
    AtRealization {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures of the time stepper rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::StepUnderflow { .. } | Error::TooManySteps { .. } => true,
            Error::AtBeta0 { source, .. } | Error::AtRealization { source, .. } => {
                source.is_numerical()
            }
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
