use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input violated a documented precondition. `field` names the
    /// offending parameter.
    #[error("invalid {field}: {reason}")]
    InvalidInput { field: &'static str, reason: String },

    #[error("quadrature did not converge: estimated error {estimate:.3e} > tolerance {tolerance:.3e}")]
    QuadratureNonConvergence { estimate: f64, tolerance: f64 },

    #[error("steady-state solve failed: {0}")]
    SingularChain(String),

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    PowerIterationNonConvergence { iterations: usize, residual: f64 },

    /// A chain-solver failure for a specific node of a priority cascade.
    #[error("node {node}: {source}")]
    Node {
        node: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidInput {
            field,
            reason: reason.into(),
        }
    }

    /// True for failures caused by bad inputs rather than numerics.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::InvalidInput { .. } => true,
            Error::Node { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}

pub(crate) fn check_probability(field: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::invalid(field, format!("{value} is not a probability")));
    }
    Ok(())
}

pub(crate) fn check_positive(field: &'static str, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::invalid(field, format!("{value} must be finite and > 0")));
    }
    Ok(())
}
