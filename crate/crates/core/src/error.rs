use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {what} is {got_w}x{got_h}, expected {want_w}x{want_h}")]
    DimensionMismatch {
        what: String,
        got_w: usize,
        got_h: usize,
        want_w: usize,
        want_h: usize,
    },

    #[error("{what}: expected {expected} channels, got {got}")]
    ChannelMismatch {
        what: String,
        expected: usize,
        got: usize,
    },

    #[error("non-positive depth {value} at (row {row}, col {col})")]
    NonPositiveDepth { row: usize, col: usize, value: f64 },

    #[error("non-unit normal (norm {norm}) at (row {row}, col {col})")]
    NonUnitNormal { row: usize, col: usize, norm: f64 },

    #[error("unknown class id {id} at (row {row}, col {col})")]
    UnknownClass { row: usize, col: usize, id: u32 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid camera: {0}")]
    Camera(String),

    #[error("invalid light source: {0}")]
    Light(String),

    #[error("degenerate gray-card sample: mean green channel is zero")]
    DegenerateSample,

    #[error("non-finite loss at optimization step {step}")]
    NonFiniteLoss { step: usize },

    #[error("non-finite radiance at pixel (row {row}, col {col}), sample {sample}")]
    NonFiniteRadiance { row: usize, col: usize, sample: u32 },

    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            msg: msg.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
