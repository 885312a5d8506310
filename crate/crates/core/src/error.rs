use thiserror::Error;

/// Errors produced by the grid model, solvers and scoring pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid network: {0}")]
    Validation(String),

    #[error("power flow diverged after {iterations} iterations (max mismatch {mismatch:.3e} pu)")]
    Diverged { iterations: usize, mismatch: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("outage of branch {branch} islands the network")]
    Islanding { branch: usize },

    #[error("factor {factor} undefined at bus {bus}: {reason}")]
    UndefinedFactor {
        factor: &'static str,
        bus: usize,
        reason: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("bus {bus}: {source}")]
    AtBus {
        bus: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("optimal power flow infeasible: {0}")]
    Infeasible(String),

    #[error("optimal power flow did not converge after {iterations} iterations: {detail}")]
    OpfDiverged { iterations: usize, detail: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn at_bus(self, bus: usize) -> Self {
        Error::AtBus {
            bus,
            source: Box::new(self),
        }
    }
}
