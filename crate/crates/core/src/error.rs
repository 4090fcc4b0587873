use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot parse `{0}` as an element of Q(sqrt2)")]
    ParseQ2(String),
    #[error("cross product of parallel vectors is zero")]
    ZeroCross,
    #[error("the zero vector does not define a ray")]
    ZeroVector,
    #[error("unknown builtin model `{0}`")]
    UnknownModel(String),
    #[error("choice index out of range: {0}")]
    ChoiceOutOfRange(String),
    #[error("invalid outcome `{0}`")]
    InvalidOutcome(String),
    #[error("model file {path}: {message}")]
    Ingest { path: String, message: String },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("model is not deterministic: {0}")]
    NotDeterministic(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
