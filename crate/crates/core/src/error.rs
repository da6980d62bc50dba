use thiserror::Error;

/// Errors raised while building or evaluating resonance dynamics.
#[derive(Debug, Error)]
pub enum Error {
    /// Input text could not be parsed.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A value violates a documented invariant. `invariant` names it.
    #[error("invalid input ({invariant}): {message}")]
    Validation { invariant: &'static str, message: String },

    /// Two resonances coincide; the rank-one path expansion does not apply.
    #[error("degenerate resonances: {0}")]
    Degenerate(String),

    /// Input does not belong to the regime it was declared for.
    #[error("regime violation: {0}")]
    Regime(String),

    /// Quadrature or extrapolation did not reach its tolerance.
    #[error("numerical failure in {context}: residual estimate {residual:.3e}")]
    Numeric { context: String, residual: f64 },

    /// The form factor does not have the `|k|^{-1/2}` infrared behaviour.
    #[error("infrared behaviour: {0}")]
    Infrared(String),

    /// An integral does not converge at infinity.
    #[error("divergent integral: {0}")]
    Divergence(String),

    /// Full path enumeration would exceed the configured budget.
    #[error("{segments} segments exceed the full-enumeration budget of {budget}; use a jump-truncated sum")]
    Budget { segments: usize, budget: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(invariant: &'static str, message: impl Into<String>) -> Self {
        Error::Validation { invariant, message: message.into() }
    }

    pub(crate) fn numeric(context: impl Into<String>, residual: f64) -> Self {
        Error::Numeric { context: context.into(), residual }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } => 2,
            Error::Validation { .. } | Error::Degenerate(_) | Error::Regime(_) | Error::Budget { .. } => 3,
            Error::Numeric { .. } | Error::Infrared(_) | Error::Divergence(_) => 4,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
