use thiserror::Error;

/// Errors raised by the solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Invalid precision or solver configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A caller-supplied value violates a documented precondition.
    #[error("invalid input: {0}")]
    Input(String),

    /// The (potential, reference) pair does not lead to a closed recurrence.
    #[error("cannot derive recurrence: {0}")]
    Derivation(String),

    /// The leading divisor of the recurrence vanished while the right-hand side did not.
    #[error("recurrence divisor vanishes at index {index}")]
    DivisorVanishes { index: usize },

    /// Bisection could not shrink the bracket any further at working precision.
    #[error("bisection stagnated in bracket [{lo}, {hi}]")]
    Stagnation { lo: String, hi: String },

    /// A leading minor of the Hill matrix is (numerically) singular.
    #[error("singular leading minor at elimination stage {stage}")]
    SingularMinor { stage: usize },

    /// The requested operation is not available for this configuration.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The traces are not converged far enough to support the requested claim.
    #[error(
        "insufficient convergence: {stabilized} stabilized digits, need more than {needed}; \
         raise the expansion order or the working precision"
    )]
    InsufficientConvergence { stabilized: u32, needed: u32 },

    /// Malformed potential definition file.
    #[error("potential file line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
