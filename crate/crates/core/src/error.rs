use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("variable index {index} out of range for dimension {dim}")]
    VariableOutOfRange { index: usize, dim: usize },
    #[error("division by a jet with vanishing constant term")]
    JetDivision,
    #[error("non-finite value encountered")]
    NonFinite,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate value: {0}")]
    Degenerate(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("dynamical condition violated: {0}")]
    DynamicalCondition(String),
    #[error("weight too strong for this basis: cond(E) = {0:e}")]
    WeightTooStrong(f64),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("resolution: {0}")]
    Resolution(String),
    #[error("construction failure: {0}")]
    Construction(String),
    #[error("linear algebra: {0}")]
    LinAlg(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
