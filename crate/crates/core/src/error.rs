use thiserror::Error;

use crate::expr::ExprError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("integral is not integrable: {0}")]
    NonIntegrable(String),

    #[error("grid too coarse: {0}")]
    Resolution(String),

    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Expr(#[from] ExprError),

    /// `f` failed to evaluate while applying the integral operator.
    #[error("f(t, x) failed at t={tau}, x={x}: {source}")]
    SourceEval {
        tau: f64,
        x: f64,
        #[source]
        source: ExprError,
    },

    #[error("table chart: {0}")]
    Table(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for violations of the hypotheses a report or certificate relies on.
    pub fn is_assumption(&self) -> bool {
        matches!(self, Error::Assumption(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
