use thiserror::Error;

/// Failure of a command, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Data(_) | CliError::Output(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    /// Classifies an error raised while reading the input panel.
    pub fn loading(e: slcf::Error) -> Self {
        match e {
            slcf::Error::MissingColumn(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }

    /// Classifies an error raised by an estimator.
    pub fn estimation(e: slcf::Error) -> Self {
        if e.is_numeric() || matches!(e, slcf::Error::NonFinite(_)) {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Data(e.to_string())
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
