use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vector is zero")]
    ZeroVector,
    #[error("vectors live in spaces with different parameters")]
    ParamMismatch,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid index: {0}")]
    InvalidIndex(String),
    #[error("refinement grid needs {cells} cells, budget is {budget}")]
    GridBudgetExceeded { cells: u128, budget: u128 },
    #[error("support of size {size} exceeds brute-force limit {limit}")]
    SupportTooLarge { size: usize, limit: usize },
    #[error("solver stopped after {iterations} iterations with grad_sup {grad_sup:e}")]
    MaxIterExceeded { iterations: usize, grad_sup: f64 },
    #[error("malformed input: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
