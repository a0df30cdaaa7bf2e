use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter box: {}", .0.join("; "))]
    InvalidBox(Vec<String>),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("missing required key `{0}`")]
    MissingKey(String),

    #[error("cannot parse `{key}` = `{value}`: {reason}")]
    Parse { key: String, value: String, reason: String },

    #[error("non-finite value at step {step}")]
    NonFinite { step: usize },

    #[error("wealth became non-positive at step {step}")]
    NonPositiveWealth { step: usize },

    #[error("degenerate regression")]
    DegenerateRegression,

    #[error("no valid paths left after exclusions ({excluded} excluded)")]
    NoValidPaths { excluded: usize },
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
