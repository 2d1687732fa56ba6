use thiserror::Error;

use crate::metrics::FairnessMetric;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("intersection space has {size} subgroups, more than the supported {limit}")]
    SchemaTooLarge { size: u128, limit: usize },

    #[error("invalid subgroup key: {0}")]
    InvalidKey(String),

    #[error("invalid row {row}: {message}")]
    InvalidRow { row: usize, message: String },

    #[error("row {row} has no prediction but a threshold was requested")]
    MissingPrediction { row: usize },

    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("degenerate subgroup: {0}")]
    DegenerateSubgroup(String),

    #[error("metric {0} needs confusion counts (build counts with a threshold)")]
    ConfusionRequired(FairnessMetric),

    #[error("metric {0} cannot be computed from a single rate table")]
    CompositeMetric(FairnessMetric),

    #[error("bootstrap needs strictly positive smoothing, got alpha={alpha}, beta={beta}")]
    SmoothingRequired { alpha: f64, beta: f64 },

    #[error("invalid smoothing alpha={alpha}, beta={beta}")]
    InvalidSmoothing { alpha: f64, beta: f64 },

    #[error("Beta prior parameters must be positive, got alpha={alpha}, beta={beta}")]
    InvalidPrior { alpha: f64, beta: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("subgroup {subgroup}: threshold {tau} is not on the ROC grid")]
    MissingRocPoint { subgroup: String, tau: f64 },

    #[error("utility cost must lie in (0,1), got {0}")]
    InvalidCost(f64),

    #[error("metric {0} is not a model-output metric and cannot constrain a derived predictor")]
    UnsupportedConstraint(FairnessMetric),

    #[error("fairness constraints are infeasible: {0}")]
    InfeasibleConstraint(String),

    #[error("linear program failed: {0}")]
    Solver(String),

    #[error("unknown subgroup: {0}")]
    UnknownSubgroup(String),

    #[error("parse error at row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("row {row}: outcome `{value}` is not binary")]
    OutcomeNotBinary { row: usize, value: String },

    #[error("row {row}: prediction {value} outside [0,1]")]
    PredictionOutOfRange { row: usize, value: f64 },

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line tool.
    ///
    /// Input problems (bad files, bad schemas, mismatched parameter files)
    /// map to 1; everything that fails during estimation or optimization
    /// maps to 2.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidSchema(_)
            | Error::SchemaTooLarge { .. }
            | Error::InvalidKey(_)
            | Error::InvalidRow { .. }
            | Error::MissingPrediction { .. }
            | Error::UnknownAttribute(_)
            | Error::UnknownSubgroup(_)
            | Error::Parse { .. }
            | Error::OutcomeNotBinary { .. }
            | Error::PredictionOutOfRange { .. }
            | Error::UnknownColumn(_)
            | Error::VersionMismatch { .. }
            | Error::SchemaMismatch(_)
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_) => 1,
            _ => 2,
        }
    }
}
