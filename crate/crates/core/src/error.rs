use thiserror::Error;

use crate::tower::Diagnostic;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the operation's domain (unknown vertex, bad level, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A stated precondition of the operation does not hold.
    #[error("contract violated: {0}")]
    Contract(String),

    /// Not enough tower levels or atlas depth for the request.
    #[error("depth error: {0}")]
    Depth(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate structure: {0}")]
    Degenerate(String),

    #[error("construction failed: {0}")]
    Construction(String),

    /// An exact inequality that the construction relies on does not hold.
    #[error("certification failed: {inequality} at level {level}: {detail}")]
    Certification {
        inequality: String,
        level: usize,
        detail: String,
    },

    #[error("search failed at level {level}: {detail}")]
    SearchFailure { level: usize, detail: String },

    #[error("tower failed validation with {} diagnostic(s)", .0.len())]
    Invalid(Vec<Diagnostic>),

    #[error("too many cycles (limit {0})")]
    CycleLimit(usize),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn certification(inequality: &str, level: usize, detail: impl Into<String>) -> Self {
        Error::Certification {
            inequality: inequality.to_string(),
            level,
            detail: detail.into(),
        }
    }
}
