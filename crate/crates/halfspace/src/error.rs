//! Error type shared across the crate.

use std::fmt;

#[derive(Debug)]
pub enum Error {
    /// Invalid configuration or input data (bad grid, malformed file, out-of-range parameter).
    Config(String),
    /// A numerical operation could not complete (quadrature did not converge,
    /// probe left the box, precondition violated by the data).
    Numerics(String),
    Io(std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Numerics(msg) => write!(f, "numerics error: {msg}"),
            Error::Io(err) => write!(f, "io error: {err}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err)
    }
}
