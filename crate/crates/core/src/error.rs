use alloc::string::String;

/// Failure modes shared by every operation in the crate.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// Operand shapes disagree (channel counts, spatial sizes, element counts).
    #[error("shape error: {0}")]
    Shape(String),
    /// A model, layer or operator was configured with invalid parameters.
    #[error("configuration error: {0}")]
    Config(String),
    /// An API was called out of contract (e.g. backward from a non-scalar node).
    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

macro_rules! shape_err {
    ($($arg:tt)*) => { $crate::Error::Shape(alloc::format!($($arg)*)) };
}

macro_rules! config_err {
    ($($arg:tt)*) => { $crate::Error::Config(alloc::format!($($arg)*)) };
}

pub(crate) use config_err;
pub(crate) use shape_err;
