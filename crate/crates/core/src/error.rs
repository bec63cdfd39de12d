use thiserror::Error;

/// Errors raised by the estimation core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("data error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error(
        "rank deficient design: column `{column}` is collinear with earlier columns {earlier:?}"
    )]
    RankDeficient {
        column: String,
        earlier: Vec<String>,
    },

    #[error("weak fitted instrument: {0}")]
    WeakInstrument(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures that stem from the numbers rather than the inputs' shape.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Singular(_) | Error::RankDeficient { .. } | Error::WeakInstrument(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
