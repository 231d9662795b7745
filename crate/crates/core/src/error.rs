use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid cutoff {cutoff}: need at least {min}")]
    InvalidCutoff { cutoff: usize, min: usize },

    #[error("cutoff mismatch: {left} vs {right}")]
    CutoffMismatch { left: usize, right: usize },

    #[error("truncation: tail mass {tail:.3e} exceeds {limit:.1e} at cutoff {cutoff}")]
    Truncation {
        tail: f64,
        limit: f64,
        cutoff: usize,
    },

    #[error("degenerate {0}: normalization vanishes")]
    Degenerate(&'static str),

    #[error("empty superposition")]
    EmptySuperposition,

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("R - n lost to cancellation: n = {n:.3e}, rounding error up to {bound:.1e}")]
    Cancellation { n: f64, bound: f64 },

    #[error("objective undefined at every stencil point")]
    ObjectiveFailure,
}

pub type Result<T> = std::result::Result<T, Error>;
