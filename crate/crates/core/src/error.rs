use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A table, horizon or level count exceeded its configured cap.
    #[error("resource limit: {0}")]
    Resource(String),
    /// An enumeration or rejection budget was exhausted.
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("no convergence: {0}")]
    Convergence(String),
    /// Malformed measure or weight specification string.
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    pub(crate) fn budget(msg: impl Into<String>) -> Self {
        Error::Budget(msg.into())
    }

    /// True for errors caused by exhausting a cap or budget rather than bad input.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Resource(_) | Error::Budget(_) | Error::Convergence(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
