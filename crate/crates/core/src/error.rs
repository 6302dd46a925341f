use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed input at row {row}: {message}")]
    Load { row: usize, message: String },

    #[error("row {row}: unknown node label `{label}`")]
    UnknownLabel { row: usize, label: String },

    #[error("node `{node}` has no value for column `{column}`")]
    MissingCovariate { node: String, column: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("design is rank deficient; collinear columns: {}", columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("zero variance in {0}")]
    ZeroVariance(String),

    #[error("mixture variance collapsed below floor after {restarts} restarts")]
    VarianceCollapse { restarts: usize },

    #[error("no proposals accepted for block `{block}` during burn-in; try a smaller proposal scale")]
    ZeroAcceptance { block: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad input files or arguments rather than by
    /// the model fitting itself.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Load { .. }
                | Error::UnknownLabel { .. }
                | Error::MissingCovariate { .. }
                | Error::Validation(_)
                | Error::Config(_)
                | Error::Csv(_)
                | Error::Json(_)
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
