use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series diverges: {0}")]
    Divergence(String),

    #[error("aliasing: {grid} grid points cannot resolve frequency {degree}")]
    Aliasing { grid: usize, degree: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    /// An iterative computation stopped before reaching its tolerance.
    #[error("accuracy target not met: {context} (best estimate {estimate:e})")]
    Accuracy { context: String, estimate: f64 },

    /// Best-approximation solver stopped with a duality gap above target.
    /// Both bounds remain valid.
    #[error("solver did not converge: {context} (lower {lower:e}, upper {upper:e})")]
    Unconverged {
        context: String,
        lower: f64,
        upper: f64,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    /// Short machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Divergence(_) => "divergence",
            Error::Aliasing { .. } => "aliasing",
            Error::Contract(_) => "contract",
            Error::Accuracy { .. } => "accuracy",
            Error::Unconverged { .. } => "unconverged",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
