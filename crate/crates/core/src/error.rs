use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Regression input that cannot produce a fit (too few points, nonpositive values).
    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("singular least-squares system: {0}")]
    Singular(String),

    #[error("quadrature did not converge: estimate {value:e}, error estimate {error:e}")]
    Quadrature { value: f64, error: f64 },

    /// An ODE or SDE state left its admissible region.
    #[error("integration blew up at t = {t}: {reason}")]
    BlowUp { t: f64, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for failures of a numerical method, as opposed to bad inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. } | Error::BlowUp { .. } | Error::Numerical(_)
        )
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
