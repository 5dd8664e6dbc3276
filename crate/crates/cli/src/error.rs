use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] qwlab::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

/// Core errors that point at the inputs rather than at a numerical outcome.
pub fn is_input_error(e: &qwlab::Error) -> bool {
    use qwlab::Error::*;
    matches!(
        e,
        InvalidGrid(_) | Representation { .. } | GridMismatch(_) | Parameter(_) | Headroom(_) | Load(_) | Io(_)
    )
}
