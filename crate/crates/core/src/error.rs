use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("could not draw a channel pair with ||w1||_1 > ||w2||_1 after {attempts} attempts")]
    OrderingNotMet { attempts: usize },

    #[error("rate {rate} exceeds the decodable limit {limit} of the core user")]
    RateOutOfDomain { rate: f64, limit: f64 },

    #[error("throughput target {target} is infeasible (best achievable {max_achievable})")]
    Infeasible { target: f64, max_achievable: f64 },

    #[error("no sign change of the bracketed function on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{message}")]
    Io { kind: std::io::ErrorKind, message: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(context: &str, e: &std::io::Error) -> Self {
        Error::Io { kind: e.kind(), message: format!("{context}: {e}") }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible { .. })
    }
}
