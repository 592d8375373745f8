//! Error type shared by the numerical modules.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of construction, evaluation, and solvers.
///
/// Numerical routines never return NaN/inf silently: anything that would
/// poison a result surfaces as one of these variants instead.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A point lies outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A function representation violates a structural invariant
    /// (non-increasing grid, non-finite values, inconsistent tail, ...).
    #[error("invalid function: {0}")]
    InvalidFunction(String),

    /// An operation's mathematical hypotheses do not hold for the inputs.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The truncation point needed to meet the tail tolerance exceeds the
    /// configured domain cap. `value` and `est_tail_error` describe the best
    /// available estimate at the cap.
    #[error(
        "truncation failed: tail tolerance {tail_tol:e} unreachable within max_domain {max_domain}; \
         best estimate {value} with tail error bound {est_tail_error:e}"
    )]
    Truncation {
        value: f64,
        est_tail_error: f64,
        tail_tol: f64,
        max_domain: f64,
    },

    /// A growth coefficient hit zero or below, so the survival integrand
    /// is singular.
    #[error("growth rate not positive at x = {x} (value {value}); survival undefined")]
    GrowthSingularity { x: f64, value: f64 },

    /// An iterative solver ran out of its iteration budget.
    #[error("no convergence after {iterations} iterations (last change {last_change:e}, tolerance {tol:e})")]
    NoConvergence {
        iterations: usize,
        last_change: f64,
        tol: f64,
    },

    /// Invalid solver or quadrature configuration.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
