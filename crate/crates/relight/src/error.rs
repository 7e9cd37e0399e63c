use thiserror::Error;

#[derive(Debug, Error)]
pub enum RelightError {
    #[error("pixel outside valid region: ({row}, {col})")]
    InvalidPixel { row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("light direction not unit length (|v| = {0})")]
    NonUnitDirection(f64),

    #[error("no supervised pixels")]
    EmptyMask,

    #[error("image smaller than the SSIM window")]
    ImageTooSmall,

    #[error("non-finite gradient in parameter `{0}`")]
    NonFiniteGradient(&'static str),

    #[error("loss diverged at iteration {0}")]
    Diverged(usize),

    #[error("pfm: {0}")]
    Pfm(String),

    #[error("png: {0}")]
    Png(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
