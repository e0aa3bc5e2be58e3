use thiserror::Error;

use crate::mdp::Action;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("step {t}: invalid action {action:?}: {reason}")]
    InvalidAction {
        t: u64,
        action: Action,
        reason: String,
    },

    #[error("step {t}: non-finite reward {reward}")]
    NonFiniteReward { t: u64, reward: f64 },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::InvalidAction { .. } => "invalid_action",
            Error::NonFiniteReward { .. } => "non_finite_reward",
            Error::Unsupported(_) => "unsupported",
            Error::Mismatch(_) => "mismatch",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
