use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("closed walk has total run length {total}, expected {n}")]
    NotLengthNCycle { total: usize, n: usize },
    #[error("polyhedron is unbounded")]
    Unbounded,
    #[error("dimension undefined: {0}")]
    UndefinedDimension(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
