use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("wrong representation: expected {expected} side, found {found} side")]
    Side {
        expected: &'static str,
        found: &'static str,
    },

    #[error("resource cap exceeded: {what} requires {requested}, cap is {cap}")]
    Resource {
        what: &'static str,
        requested: u128,
        cap: u128,
    },

    #[error("input is not mean-zero (|mean| = {0:e})")]
    NotMeanZero(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("multiplier family failed validation: {0}")]
    Validation(String),
}

impl Error {
    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Resource { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
