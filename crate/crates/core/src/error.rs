use thiserror::Error;

/// Crate-wide error type.
///
/// The variants map onto the CLI exit-code contract: `Invalid` is a
/// configuration/input problem, `Domain` and `Hypothesis` are mathematical
/// precondition failures, and the remaining variants are numerical failures.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument left the mathematical domain of an operation
    /// (e.g. an exponential moment queried at or past its abscissa).
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural hypothesis of the construction is violated
    /// (e.g. a < 4, d >= b, s <= s*, non-compact support).
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    /// Malformed input data or configuration.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// The wave iteration stalled above tolerance; carries the best iterate.
    #[error("{context}: no convergence after {iterations} sweeps (residual {residual:?})")]
    NonConvergence {
        context: String,
        iterations: usize,
        residual: (f64, f64),
        best: Option<Box<crate::wave::WaveProfile>>,
    },

    /// A simulation violated a state invariant; carries the offending state.
    #[error("simulation aborted at t = {t}: {reason}")]
    SimAbort {
        t: f64,
        reason: String,
        snapshot: Box<crate::simulate::SimState>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
