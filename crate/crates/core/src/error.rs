use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("x = {x} lies inside the guard band around the spectral jump at {jump}")]
    NearJump { x: f64, jump: f64 },

    #[error("resource limit exceeded: {0}")]
    Resource(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for errors that come from resource exhaustion rather than bad input.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Resource(_) | Error::Overflow(_))
    }
}
