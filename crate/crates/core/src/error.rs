use thiserror::Error;

use crate::pipeline::StallInfo;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("variable {var} out of range for a polynomial over {num_vars} variables")]
    Range { var: u32, num_vars: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("field mismatch: {0}")]
    Field(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("problem has {num_vars} variables, exhaustive search is limited to {limit}")]
    Capacity { num_vars: usize, limit: usize },

    #[error("decomposition stalled in loop {} after {} accepted steps: {}", .0.loop_index, .0.steps.len(), .0.reason)]
    Stall(Box<StallInfo>),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
