use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("mode out of range: {0}")]
    ModeOutOfRange(String),

    #[error("empty or impossible sector: {0}")]
    EmptySector(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("series mismatch: {0}")]
    SeriesMismatch(String),

    #[error("leading coefficient does not match the expansion point (residue {residue:.3e})")]
    LeadingMismatch { residue: f64 },

    #[error("unsupported phase functional: {0}")]
    UnsupportedPhase(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
