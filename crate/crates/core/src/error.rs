use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("not convex: {0}")]
    NotConvex(String),
    #[error("not normalized: {0}")]
    NotNormalized(String),
    #[error("missing tail model: {0}")]
    MissingTail(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("infeasible at radius {radius}: {msg}")]
    Infeasible { radius: f64, msg: String },
    #[error("rank deficient: {0}")]
    Rank(String),
    #[error("precision exhausted: {0}")]
    Precision(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
