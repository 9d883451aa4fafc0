use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid mode index {0}: modes are numbered from 1")]
    InvalidIndex(usize),

    #[error("{what} = {value} lies outside [{lo}, {hi}]")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("incompatible grids: {0}")]
    IncompatibleGrid(String),

    #[error("kernel hypothesis a^k > k*beta violated: a = {a}, k = {k}, beta = {beta}")]
    Hypothesis { a: f64, k: f64, beta: f64 },

    #[error("shift xi = {xi} exceeds x = {x}")]
    Ordering { x: f64, xi: f64 },

    #[error("propagator overflow for s = {s}, x = {x}")]
    Saturation { s: f64, x: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("study failed: {0}")]
    Study(String),

    #[error("solver did not converge: {0}")]
    Diverged(String),
}

pub type Result<T> = std::result::Result<T, Error>;
