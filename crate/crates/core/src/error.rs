use thiserror::Error;

/// Errors raised by the stacking-sequence library.
#[derive(Debug, Error)]
pub enum SsrError {
    #[error("invalid ply angle set: {0}")]
    InvalidAngleSet(String),
    #[error("invalid stacking sequence: {0}")]
    InvalidStack(String),
    #[error("invalid material: {0}")]
    InvalidMaterial(String),
    #[error("invalid load case: {0}")]
    InvalidLoadCase(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("invalid objective: {0}")]
    InvalidObjective(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("problem too large: {0}")]
    TooLarge(String),
    #[error("filter overflow: {0}")]
    FilterOverflow(String),
    #[error("target generation failed: {0}")]
    TargetGeneration(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, SsrError>;
