use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("transform is singular (|det| = {det:e})")]
    SingularTransform { det: f64 },

    #[error("region is empty")]
    EmptyRegion,

    #[error("vertex list is not convex")]
    NonConvex,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("rotation angle is undefined: {0}")]
    UndefinedAngle(&'static str),

    #[error("invalid region op: {0}")]
    InvalidOp(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("noise schedule invalid: {0}")]
    InvalidSchedule(String),

    #[error("timestep {t} out of range 1..={max}")]
    TimestepOutOfRange { t: usize, max: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("patch at ({x}, {y}) with radius {radius} leaves the {width}x{height} grid")]
    PatchOutOfBounds {
        x: i64,
        y: i64,
        radius: usize,
        width: usize,
        height: usize,
    },

    #[error("search region is empty")]
    EmptySearchRegion,

    #[error("mask covers the whole image; background is undefined")]
    UndefinedBackground,

    #[error("run cancelled after {iterations} iterations")]
    Cancelled { iterations: usize },

    #[error("{path}: {message}")]
    Schema { path: String, message: String },

    #[error("bad latent file: {0}")]
    BadLatentFile(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image error on {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

impl Error {
    pub(crate) fn dims(expected: impl std::fmt::Display, actual: impl std::fmt::Display) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
