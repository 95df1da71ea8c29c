use thiserror::Error;

use crate::polyalg::PolyError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("Lie closure exceeded {cap} basis elements")]
    ClosureCap { cap: usize },
    #[error("already a Carnot group, no lifting needed")]
    NoLiftingNeeded,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
