use serde::Serialize;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by the CLI error records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Input,
    Domain,
    Accuracy,
    Regime,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("out of domain: {0}")]
    Domain(String),

    #[error("channel {channel}: {source}")]
    Channel {
        channel: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("Jost tail truncation failed at |z| = {radius}: {detail}")]
    TailTruncation { radius: f64, detail: String },

    #[error("iteration did not converge after {iterations} steps (last delta {delta:e}); refine the mesh")]
    NoConvergence { iterations: usize, delta: f64 },

    #[error("|rho| = {rho_abs} too small: kernel bound {bound} is not below 1/2")]
    RhoTooSmall { rho_abs: f64, bound: f64 },

    #[error("accuracy check failed: {what} (deviation {deviation:e}, tolerance {tolerance:e})")]
    Accuracy {
        what: String,
        deviation: f64,
        tolerance: f64,
    },

    #[error("lambda = {lambda} is within about {distance:e} of a pole (reciprocal condition {rcond:e})")]
    PoleProximity { lambda: String, distance: f64, rcond: f64 },

    #[error("eigenvalue localization failed: {0}")]
    Localization(String),

    #[error("outside the asymptotic regime: {0}")]
    Regime(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidInput(_) => ErrorKind::Input,
            Error::Domain(_) | Error::PoleProximity { .. } => ErrorKind::Domain,
            Error::Channel { source, .. } => source.kind(),
            Error::RhoTooSmall { .. } | Error::Regime(_) => ErrorKind::Regime,
            Error::TailTruncation { .. }
            | Error::NoConvergence { .. }
            | Error::Accuracy { .. }
            | Error::Localization(_) => ErrorKind::Accuracy,
        }
    }

    pub(crate) fn in_channel(self, channel: usize) -> Error {
        Error::Channel {
            channel,
            source: Box::new(self),
        }
    }

    pub(crate) fn accuracy(what: impl Into<String>, deviation: f64, tolerance: f64) -> Error {
        Error::Accuracy {
            what: what.into(),
            deviation,
            tolerance,
        }
    }
}
