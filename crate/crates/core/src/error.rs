use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },

    #[error("data length {len} does not match {width}x{height}")]
    DataLength { len: usize, width: usize, height: usize },

    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },

    #[error("patch size {0} is below the minimum of 2")]
    PatchTooSmall(usize),

    #[error("patch of {width}x{height} is smaller than 2x2")]
    PatchDegenerate { width: usize, height: usize },

    #[error("image of {width}x{height} is too small for {levels} wavelet level(s)")]
    TooSmallForLevels { width: usize, height: usize, levels: usize },

    #[error("wavelet levels must be at least 1")]
    ZeroLevels,

    #[error("pyramid shape does not match a {width}x{height} output")]
    PyramidShape { width: usize, height: usize },

    #[error("unknown wavelet basis `{0}`")]
    UnknownBasis(alloc::string::String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    #[error("image of {width}x{height} is smaller than the {window}x{window} window")]
    SmallerThanWindow { width: usize, height: usize, window: usize },
}

impl Error {
    pub(crate) fn mismatch(a: (usize, usize), b: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            left_width: a.0,
            left_height: a.1,
            right_width: b.0,
            right_height: b.1,
        }
    }
}
