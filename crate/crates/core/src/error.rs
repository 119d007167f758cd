use thiserror::Error;

/// Errors shared across the engine.
#[derive(Debug, Error)]
pub enum Error {
    /// A brute-force guard was exceeded.
    #[error("size limit exceeded: {what} = {requested} but the cap is {cap}")]
    SizeLimit {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    /// An input violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine failed to reach its target tolerance.
    #[error("numerical error: {context} (achieved {achieved:e}, wanted {wanted:e})")]
    Numerical {
        context: &'static str,
        achieved: f64,
        wanted: f64,
    },

    /// Fixed-point iteration ran out of iterations.
    #[error("no convergence after {iterations} iterations, last residual {residual:e}")]
    NonConvergence { iterations: usize, residual: f64 },

    /// The OZ denominator 1 - rho*c_hat came too close to zero.
    #[error("density too high: min |1 - rho*c_hat| = {min_denominator:e}")]
    Divergence { min_denominator: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
