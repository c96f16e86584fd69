use thiserror::Error;

/// Errors raised anywhere in the ingestion, decomposition and fitting pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("format error: {0}")]
    Format(String),

    #[error("order error: date {date} at row {row} does not follow the previous row")]
    Order { row: usize, date: String },

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("non-positive price {value} at index {index}")]
    NonPositivePrice { index: usize, value: f64 },

    #[error("window error: window length {0} must be odd and at least 1")]
    Window(usize),

    #[error("rank error: design matrix is rank deficient; dependent columns: {}", .columns.join(", "))]
    Rank { columns: Vec<String> },

    #[error("degrees of freedom error: {rows} rows cannot support {terms} terms")]
    DegreesOfFreedom { rows: usize, terms: usize },

    #[error(
        "exclusion error: removing {excluded} rows would leave {remaining} rows for {terms} terms"
    )]
    Exclusion {
        excluded: usize,
        remaining: usize,
        terms: usize,
    },

    #[error("split error: n_train={n_train} must lie strictly between 0 and {rows}")]
    Split { n_train: usize, rows: usize },

    #[error("model document error: {0}")]
    Document(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
