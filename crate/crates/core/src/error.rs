use alloc::string::String;

/// Errors produced by the modelling, relaxation and solver layers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix not symmetric at ({0},{1})")]
    NotSymmetric(usize, usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("eigenvalue iteration did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("variable {0} is unbounded; derive a box with the bounding pipeline first")]
    Unbounded(usize),
    #[error("parameter recovery failed: {0}")]
    RecoveryFailed(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("conic solver failed: {0}")]
    Solver(String),
}

pub type Result<T> = core::result::Result<T, Error>;
