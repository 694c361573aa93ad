use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid width ratio {0}: must lie in (0, 1]")]
    InvalidRatio(f64),

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("label {label} out of range for {classes} classes")]
    InvalidLabel { label: usize, classes: usize },

    #[error("closed-form decoding probabilities need Rayleigh fading; use Monte Carlo for {0}")]
    UnsupportedClosedForm(&'static str),

    #[error("no feasible power split: {0}")]
    Infeasible(String),

    #[error("bound diverges: decoding probability {0} is zero")]
    Diverges(&'static str),

    #[error("invalid configuration `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("malformed {file} ({field}): {reason}")]
    Format {
        file: String,
        field: &'static str,
        reason: String,
    },

    #[error("invalid decode sets: {0}")]
    DecodeSets(String),

    #[error("cannot partition {samples} samples across {devices} devices")]
    TooManyDevices { devices: usize, samples: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
