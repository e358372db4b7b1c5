//! Crate-wide error taxonomy.

use thiserror::Error;

/// Errors raised by the decomposition engine.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A caller broke an API precondition (bad argument, empty list, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Vector/matrix dimensions do not line up.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// The H-representation admits a recession direction.
    #[error("polytope is unbounded along a recession direction")]
    Unbounded,

    /// The H-representation is infeasible (empty set).
    #[error("polytope is empty")]
    EmptySet,

    /// Minkowski sum of zero summands.
    #[error("Minkowski sum of an empty list of summands")]
    EmptySum,

    /// A signal does not cover the time window a task is evaluated on.
    #[error("signal horizon [{sig_start}, {sig_end}] does not cover the task window [{a}, {b}]")]
    Horizon {
        sig_start: f64,
        sig_end: f64,
        a: f64,
        b: f64,
    },

    /// A graph that must be connected is not.
    #[error("connectivity error: {0}")]
    Disconnected(String),

    /// Per-edge family enumeration would exceed the power-set cap.
    #[error("edge ({0}, {1}) carries {2} Always tasks; family enumeration is capped at {3}")]
    Capacity(usize, usize, usize, usize),

    /// The decentralized iteration is diverging.
    #[error("decentralized iteration diverged: {0}")]
    Divergence(String),

    /// The embedded conic solver failed to make progress.
    #[error("solver failure: {0}")]
    SolverFailure(String),

    /// The assembled program is primal infeasible.
    #[error("infeasible decomposition: {0}")]
    Infeasible(String),

    /// The input task set violates a structural assumption (conflicting
    /// conjunction detected before any solve).
    #[error("input conflict: {0}")]
    InputConflict(String),

    /// An internal bookkeeping invariant failed; indicates a bug.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
