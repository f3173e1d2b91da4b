use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong while building, fitting or applying a model.
///
/// Variants split into two families: malformed input (files, flags, schemas)
/// and numerical failures (domain violations, invalid predictions). The CLI
/// maps them to distinct exit codes through [`Error::is_numerical`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("invalid model spec: {0}")]
    Spec(String),

    #[error("invalid range table: {0}")]
    Ranges(String),

    #[error("{source_label}, line {line}: {message}")]
    Row {
        source_label: String,
        line: usize,
        message: String,
    },

    #[error("{0}")]
    Argument(String),

    #[error("row {row}: {message}")]
    Design { row: usize, message: String },

    #[error("design matrix has no rows")]
    EmptyDesign,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("predicted inverse score {value:e} is not positive at config [{config}]")]
    NonPositivePrediction { value: f64, config: String },

    #[error("coefficient sum {0:e} is too close to zero to normalise fractions")]
    DegenerateCoefficients(f64),

    #[error("grid of {size} points exceeds the cap of {cap}")]
    GridTooLarge { size: u128, cap: usize },

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for failures of the model itself rather than of its inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Domain(_)
            | Error::NonPositivePrediction { .. }
            | Error::DegenerateCoefficients(_) => true,
            Error::Fold { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
