use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested operation would enumerate more configurations than
    /// allowed. `count` saturates at `u128::MAX`.
    #[error("resource limit: {} configurations exceed the enumeration cap of {cap}", count_text(*.count))]
    ResourceLimit { count: u128, cap: u128 },

    #[error("infeasible model: every configuration is forbidden")]
    Infeasible,

    #[error("unsupported model: {0}")]
    Unsupported(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

fn count_text(count: u128) -> String {
    if count == u128::MAX {
        "at least 2^128".to_string()
    } else {
        count.to_string()
    }
}
