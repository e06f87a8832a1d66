use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("no convergence after {steps} steps (residual log2 {residual})")]
    NonConvergence { steps: usize, residual: f64 },
    #[error("ambiguous piece: point straddles {0} and {1}")]
    Ambiguous(String, String),
    #[error("precision budget exhausted: {needed} bits needed, {available} available")]
    Budget { needed: u64, available: u64 },
    #[error("config: {0}")]
    Config(String),
}
