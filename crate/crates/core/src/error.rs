use std::path::PathBuf;

/// Errors produced anywhere in the benchmark engine.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("non-numeric feature at row {row}, column {column:?}")]
    NonNumericFeature { row: usize, column: String },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("label column {0:?} not found")]
    MissingLabelColumn(String),
    #[error("labels contain a single class; at least two are required")]
    SingleClass,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("unknown algorithm {0:?}")]
    UnknownAlgorithm(String),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("duplicate result cell ({dataset}, {config_id}, repeat {repeat})")]
    DuplicateCell { dataset: String, config_id: String, repeat: u32 },
    #[error("meta-feature manifest mismatch: {0}")]
    ManifestMismatch(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
