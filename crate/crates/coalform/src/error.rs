use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("size cap exceeded: {what} has {size}, limit is {cap}")]
    SizeCap {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    #[error("cannot parse {token:?}: {reason}")]
    Parse { token: String, reason: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn cap(what: &'static str, size: usize, cap: usize) -> Self {
        Error::SizeCap { what, size, cap }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
