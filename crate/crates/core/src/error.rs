use thiserror::Error;

use crate::solver::Regime;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("beta = {beta} (mu = {mu}) is {regime}: {reason}")]
    Regime {
        beta: f64,
        mu: f64,
        regime: Regime,
        reason: &'static str,
    },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("ambiguous count: 1/2 - eps = {threshold} lies within {window:e} of eigenvalue {root}")]
    Ambiguous {
        threshold: f64,
        root: f64,
        window: f64,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
