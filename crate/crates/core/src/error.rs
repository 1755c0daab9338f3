//! Crate-wide error type.

/// Errors raised by image operations, feature extraction, the network and
/// the file codecs.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An image with zero width or height was requested.
    #[error("image has zero width or height")]
    EmptyImage,

    /// Buffer lengths or image dimensions do not agree.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Bit-plane index outside 0..=7.
    #[error("bit plane {0} is out of range 0..=7")]
    InvalidPlane(u8),

    /// Operation needs a larger image than it was given.
    #[error("image {width}x{height} is too small (minimum {min}x{min})")]
    ImageTooSmall { width: u32, height: u32, min: u32 },

    /// A binary image without foreground where at least one component is
    /// required.
    #[error("no foreground components")]
    NoComponents,

    /// Resize target with a zero dimension.
    #[error("invalid resize target {0}x{1}")]
    InvalidTarget(u32, u32),

    /// Block size outside the supported set.
    #[error("block size {0} is not one of 8, 16, 32")]
    InvalidBlockSize(u32),

    /// Network layer sizes that cannot form a model.
    #[error("invalid network topology: {0}")]
    InvalidTopology(String),

    /// Training or evaluation was handed no samples.
    #[error("empty dataset")]
    EmptyDataset,

    /// Unusable configuration values (rates, ratios, grids).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Confusion counts with no trials at all.
    #[error("confusion counts are all zero")]
    NoTrials,

    /// Class index outside the model's output range.
    #[error("class index {index} out of range for {classes} classes")]
    InvalidClass { index: usize, classes: usize },

    /// Malformed file contents (PGM/PPM headers, model files, CSV, ...).
    #[error("malformed {what}: {detail}")]
    Malformed { what: &'static str, detail: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },

    #[error("image decode error on {path}: {source}")]
    Decode {
        path: std::path::PathBuf,
        source: image::ImageError,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn malformed(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Malformed {
            what,
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<std::path::PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
