//! Univariate global minimization with evolutionary leaps.
//!
//! * [`poly`]: dense real polynomials, Horner deflation, Laguerre roots.
//! * [`lga`]: the leap gradient minimizer, black-box and polynomial forms.
//! * [`analytic`]: minimization of analytic functions on `[-1, 1]` through a
//!   central-difference Taylor surrogate.
//! * [`competitors`]: brute-force grid, zero-derivative and Piyavskii-Shubert
//!   baselines.
//! * [`bench`]: the randomized timing protocol and its CSV output.
//! * [`cli`]: the `leapgrad` command-line front end.

pub mod analytic;
pub mod bench;
pub mod cli;
pub mod competitors;
pub mod error;
pub mod lga;
pub mod poly;

pub use error::{Error, Result};
pub use lga::{
    closed_form_min_deg_le2, count_second_derivative_sign_changes, descend_poly, lga_generic,
    lga_poly_min, lga_poly_min_traced, Interval, Leap, LeapTrace, LgaConfig, MinResult,
};
pub use num_complex::Complex64;
pub use poly::{laguerre_roots, Polynomial};
