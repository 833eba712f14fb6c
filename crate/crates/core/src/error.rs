use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("equivariance index mismatch: {left} vs {right}")]
    IndexMismatch { left: i32, right: i32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("transversality condition fails: |det| = {det:e} <= {threshold:e}")]
    Transversality { det: f64, threshold: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("shooting failed: {0}")]
    Shooting(String),

    #[error("non-finite value detected at step {step} (t = {time})")]
    NonFinite { step: usize, time: f64 },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("decomposition failed at frame {frame}: {source}")]
    Frame {
        frame: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}
