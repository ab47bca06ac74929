use thiserror::Error;

/// Errors produced by the simulation, estimation and reporting layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("degenerate observation: {0}")]
    DegenerateObservation(String),

    #[error("unstable estimate: {0}")]
    UnstableEstimate(String),

    #[error("integration diverged at t = {t} in mode {mode}{}", replication_suffix(*.replication))]
    IntegrationDiverged {
        t: f64,
        /// 1-based mode index.
        mode: usize,
        replication: Option<usize>,
    },

    #[error("insufficient sample: need at least {min} values, got {got}")]
    InsufficientSample { min: usize, got: usize },

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

fn replication_suffix(replication: Option<usize>) -> String {
    match replication {
        Some(r) => format!(" (replication {r})"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Attaches a replication index to a divergence error; other errors pass through.
    pub fn in_replication(self, r: usize) -> Self {
        match self {
            Error::IntegrationDiverged { t, mode, .. } => Error::IntegrationDiverged {
                t,
                mode,
                replication: Some(r),
            },
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
