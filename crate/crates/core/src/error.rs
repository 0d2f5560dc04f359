use thiserror::Error;

use crate::expr::{EvalError, ParseError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error in `{source_text}`: {error}")]
    Parse { source_text: String, error: ParseError },

    #[error("evaluation failed at t = {t}: {error}")]
    Eval { t: f64, error: EvalError },

    #[error("atom delay {delay} at t = {t} lies outside [0, {r}]")]
    DelayOutOfRange { t: f64, delay: f64, r: f64 },

    #[error("atom delay at t = {t} is not real: {delay}")]
    ComplexDelay { t: f64, delay: num_complex::Complex64 },

    #[error("t = {t} is outside the domain [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },

    #[error("invalid setup: {0}")]
    InvalidSetup(String),

    #[error("solution became non-finite at t = {t}")]
    Divergence { t: f64 },

    #[error("fixed-point iteration did not converge after {iterations} sweeps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("criterion supremum {mu} is not below 1; the decay envelope does not apply")]
    HypothesisNotVerified { mu: f64 },

    #[error("horizon too short: need T >= {required}, have {actual}")]
    HorizonTooShort { required: f64, actual: f64 },

    #[error("problem spec: {0}")]
    Spec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn eval(t: f64) -> impl FnOnce(EvalError) -> Error {
        move |error| Error::Eval { t, error }
    }
}
