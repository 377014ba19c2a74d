use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("signature error: {0}")]
    Signature(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("pin error: {0}")]
    Pin(String),

    /// A resource cap was hit; `reached` is how far the computation got.
    #[error("capacity exceeded: {what} (reached {reached}, cap {cap})")]
    Capacity {
        what: String,
        reached: usize,
        cap: usize,
    },

    #[error("unassigned free variable `{0}`")]
    Assignment(String),

    #[error("kappa violation: target of size {size} is not below kappa {kappa}")]
    Kappa { size: usize, kappa: usize },

    #[error("arity error: {0}")]
    Arity(String),

    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("class does not have intersections: {0}")]
    IntersectionFailure(String),

    #[error("emission error: {0}")]
    Emission(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("class is not universal: {0}")]
    Universality(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("i/o error on {path}: {msg}")]
    Io { path: String, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            col,
            msg: msg.into(),
        }
    }

    pub(crate) fn capacity(what: impl Into<String>, reached: usize, cap: usize) -> Self {
        Error::Capacity {
            what: what.into(),
            reached,
            cap,
        }
    }
}
