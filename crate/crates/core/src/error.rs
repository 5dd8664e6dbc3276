use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("representation mismatch: expected {expected}, found {found}")]
    Representation {
        expected: &'static str,
        found: &'static str,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite multiplier value {value} at frequency ({}, {}, {})", xi[0], xi[1], xi[2])]
    NonFiniteMultiplier { xi: [f64; 3], value: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("problem size {size} exceeds the direct-convolution guard ({limit})")]
    SizeGuard { size: usize, limit: usize },

    #[error("insufficient grid headroom: {0}")]
    Headroom(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("load error: {0}")]
    Load(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
