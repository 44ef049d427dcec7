use thiserror::Error;

/// Errors produced by mesh construction, assembly, solvers and the experiment driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate cell {cell}: |det J| = {det:e}")]
    DegenerateCell { cell: usize, det: f64 },

    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    #[error("iterative solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("direct solve residual check failed: relative residual {residual:e} exceeds {tolerance:e}")]
    ResidualCheck { residual: f64, tolerance: f64 },

    #[error("inf-sup ratio undefined for a field with zero mesh-dependent norm")]
    UndefinedRatio,

    #[error("resource limit: {0}")]
    Resource(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
