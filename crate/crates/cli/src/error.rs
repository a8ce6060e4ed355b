use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config files or parameter combinations.
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Model(#[from] lrchain::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    /// A validation run completed but reported failures.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 1 for bad input, 2 for numerical or runtime failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Model(e) if e.is_input_error() => 1,
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
