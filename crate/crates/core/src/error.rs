use std::path::PathBuf;

use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the minimizers, root finders and the benchmark harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("polynomial must have at least one coefficient")]
    EmptyPolynomial,

    #[error("polynomial coefficient {index} is not finite ({value})")]
    NonFiniteCoefficient { index: usize, value: f64 },

    #[error("cannot deflate constant polynomial")]
    DeflateConstant,

    #[error("roots are not closed under complex conjugation (unmatched root {re}{im:+}i)")]
    NotConjugateClosed { re: f64, im: f64 },

    #[error("Laguerre iteration did not converge: found {} of {degree} roots", partial.len())]
    RootsNotConverged {
        partial: Vec<Complex64>,
        degree: usize,
    },

    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("precision step must be positive and finite, got {0}")]
    InvalidStep(f64),

    #[error("objective is not finite at x = {x}")]
    NonFinite { x: f64 },

    #[error("closed-form minimization handles degree <= 2, got degree {0}")]
    DegreeTooHigh(usize),

    #[error("derivative bounds grow too fast: no order <= {max_order} meets the tolerance")]
    OrderNotFound { max_order: usize },

    #[error("step selection failed: coefficients did not stabilize above h = {floor:e}")]
    StepSelectionFailed { floor: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot parse polynomial: {0}")]
    Parse(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
