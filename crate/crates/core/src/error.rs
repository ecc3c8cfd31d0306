use thiserror::Error;

use crate::dist::OrderCheckReport;

/// Errors produced by the distribution, coupling and bound routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("stochastic order violated: max violation {:.3e} at t = {}", .0.max_violation, .0.witness)]
    OrderViolation(OrderCheckReport),

    #[error("DL plan infeasible at step {step}: no remaining target at or above x = {x}")]
    Infeasible { step: usize, x: f64 },

    #[error("degenerate spread: upper bound {upper} does not exceed lower bound {lower}")]
    DegenerateSpread { lower: f64, upper: f64 },

    #[error("spread is infinite, reduction undefined")]
    InfiniteSpread,

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
