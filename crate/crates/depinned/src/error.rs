use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A size parameter exceeds a configured capacity bound.
    #[error("capacity exceeded: {what} = {got} but the {bound_name} bound is {bound}")]
    Capacity {
        what: &'static str,
        got: usize,
        bound_name: &'static str,
        bound: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("size mismatch: {0}")]
    Mismatch(String),

    /// A restricted state space fell apart into several communicating classes.
    #[error("state space is not irreducible: {0}")]
    Disconnected(String),

    #[error("eigensolver did not converge: {what} (residual {residual:.3e} after {iters} iterations)")]
    NoConvergence {
        what: &'static str,
        residual: f64,
        iters: usize,
    },

    /// A bracketing/bisection search never met its target within the horizon.
    #[error("search failed: {0}")]
    SearchFailed(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
