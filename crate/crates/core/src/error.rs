use thiserror::Error;

/// Errors produced by the deconvolution toolkit.
#[derive(Debug, Error)]
pub enum DeconvError {
    #[error("invalid image shape {height}x{width}: {reason}")]
    InvalidShape {
        height: usize,
        width: usize,
        reason: String,
    },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid prior patch: {0}")]
    InvalidPrior(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),

    #[error("kernel {kernel_h}x{kernel_w} does not fit image {height}x{width}")]
    KernelTooLarge {
        kernel_h: usize,
        kernel_w: usize,
        height: usize,
        width: usize,
    },

    #[error("{pixels} pixels exceeds the dense oracle limit of {limit}")]
    TooLargeForOracle { pixels: usize, limit: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("singular system")]
    Singular,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Codec(#[from] image::ImageError),
}

impl DeconvError {
    /// True for errors caused by the filesystem rather than by the inputs' content.
    pub fn is_io(&self) -> bool {
        matches!(self, DeconvError::Io(_) | DeconvError::Codec(image::ImageError::IoError(_)))
    }
}

pub type Result<T> = std::result::Result<T, DeconvError>;
