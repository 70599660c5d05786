//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, RaincastError>;

#[derive(Debug, Error)]
pub enum RaincastError {
    /// A CSV row that cannot be parsed (bad number, impossible date, ...).
    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },

    /// Data that parses but violates a structural contract (duplicate
    /// records, non-contiguous dates, empty file, cache/shape mismatch).
    #[error("structural error: {0}")]
    Structure(String),

    /// A (point, month) cell with no usable daily values.
    #[error("no data for grid point ({lat}, {lon}) in {year}-{month:02}")]
    MissingData {
        lat: f64,
        lon: f64,
        year: i32,
        month: u32,
    },

    /// A bounding box that retains no grid points.
    #[error("empty selection: {0}")]
    EmptySelection(String),

    /// A requested point absent from the grid; carries the nearest match.
    #[error(
        "grid point ({lat}, {lon}) not found; nearest grid point is ({nearest_lat}, {nearest_lon})"
    )]
    PointNotFound {
        lat: f64,
        lon: f64,
        nearest_lat: f64,
        nearest_lon: f64,
    },

    /// A year/month interval outside the data coverage or inverted.
    #[error("range error: {0}")]
    Range(String),

    /// A projection rank outside 1..=min(n, m-1).
    #[error("rank {rank} out of range 1..={max}")]
    Rank { rank: usize, max: usize },

    /// A zero (or numerically zero) singular value inside the kept rank.
    #[error("ill-conditioned snapshot matrix: sigma_r/sigma_1 = {ratio:e}")]
    IllConditioned { ratio: f64 },

    /// A constant training prefix; min-max scaling is undefined.
    #[error("degenerate scale: training prefix is constant at {value}")]
    DegenerateScale { value: f64 },

    /// A series too short for the requested window configuration.
    #[error("insufficient data: series length {len} < required {needed}")]
    InsufficientData { len: usize, needed: usize },

    /// A train/test split that leaves one side empty.
    #[error("split error: {0}")]
    Split(String),

    /// An out-of-domain parameter (dropout rate, threshold, epochs, ...).
    #[error("invalid parameter: {0}")]
    Param(String),

    /// Mismatched tensor or vector shapes.
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    /// Metric input with no elements.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// A non-finite value produced during numeric evaluation.
    #[error("non-finite value in {context} at step {step}")]
    Numeric { context: String, step: usize },

    /// Training loss became non-finite.
    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
