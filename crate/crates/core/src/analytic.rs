//! Global minimization of real analytic functions on `[-1, 1]`.
//!
//! The target is replaced by the surrogate
//! `P(x) = sum_{j<=n} x^j / j! * (D_h)^j f(0)` built from iterated central
//! differences `D_h f(x) = (f(x + h) - f(x - h)) / (2h)`, and the surrogate is
//! minimized with [`lga_poly_min`]. The order `n` comes from a bound on the
//! Taylor remainder, the step `h` from a halving search on the surrogate
//! coefficients.
//!
//! Callers working on another interval must map it affinely onto `[-1, 1]`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lga::{check_step, lga_poly_min, Interval, MinResult};
use crate::poly::Polynomial;

/// Largest order [`choose_order`] will consider.
pub const MAX_ORDER: usize = 64;
/// Smallest step [`choose_step`] will try.
pub const STEP_FLOOR: f64 = 1e-6;

/// Upper bounds on the derivatives of the target over `[-1, 1]`.
pub trait DerivativeBound {
    /// `B(k) >= max_{|x| <= 1} |f^(k)(x)|`.
    fn bound(&self, k: usize) -> f64;

    /// Bound on `sup_{|x| <= 1} |f(x) - T_n(x)|` for the degree-`n` Taylor
    /// polynomial at 0. The default uses the integral remainder with `B(n+1)`;
    /// implementors with a sharper majorant may override it.
    fn remainder_bound(&self, n: usize) -> f64 {
        self.bound(n + 1) / factorial(n + 1)
    }
}

impl<F> DerivativeBound for F
where
    F: Fn(usize) -> f64,
{
    fn bound(&self, k: usize) -> f64 {
        self(k)
    }
}

/// Surrogate polynomial and the parameters that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Surrogate {
    pub poly: Polynomial,
    pub order: usize,
    pub step: f64,
    pub epsilon: f64,
}

/// Result of [`analytic_min`]: the surrogate minimizer and the certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticMin {
    /// `x_arg` is the surrogate minimizer, `value` the surrogate value there.
    pub result: MinResult,
    pub surrogate: Surrogate,
    pub step: StepChoice,
}

impl AnalyticMin {
    /// Certified gap between the surrogate minimum and the true minimum.
    pub fn epsilon(&self) -> f64 {
        self.surrogate.epsilon
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

fn binomial_row(j: usize) -> Vec<f64> {
    let mut row = vec![1.0; j + 1];
    for i in 1..j {
        row[i] = row[i - 1] * (j - i + 1) as f64 / i as f64;
    }
    row
}

fn checked<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { x })
    }
}

/// `(f(x + h) - f(x - h)) / (2h)`.
pub fn central_diff<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// `(D_h)^j f(x)` through the closed stencil
/// `sum_i (-1)^i C(j, i) f(x + (j - 2i) h) / (2h)^j`.
///
/// Mirror points `x +- m h` share a weight up to sign and are combined first,
/// so even and odd parts cancel exactly when `f` has that symmetry about `x`.
/// A non-finite sample (the stencil left the domain of `f`) is an error.
pub fn iterated_central_diff<F: Fn(f64) -> f64>(f: F, x: f64, h: f64, j: usize) -> Result<f64> {
    check_step(h)?;
    if j == 0 {
        return checked(&f, x);
    }
    let weights = binomial_row(j);
    let mut acc = 0.0;
    // i and j - i sit at offsets +m h and -m h with m = j - 2i
    for i in 0..(j + 1) / 2 {
        let m = (j - 2 * i) as f64;
        let right = checked(&f, x + m * h)?;
        let left = checked(&f, x - m * h)?;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        // weight of the mirror term is (-1)^(j-i) C(j, i)
        let pair = if j % 2 == 0 { right + left } else { right - left };
        acc += sign * weights[i] * pair;
    }
    if j % 2 == 0 {
        let i = j / 2;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * weights[i] * checked(&f, x)?;
    }
    Ok(acc / (2.0 * h).powi(j as i32))
}

/// `sum_i C(j, i) |f(x + (j - 2i) h)| / (2h)^j`, the magnitude of the terms
/// [`iterated_central_diff`] cancels. Rounding error in the stencil is a few
/// ulps of this quantity.
pub fn stencil_magnitude<F: Fn(f64) -> f64>(f: F, x: f64, h: f64, j: usize) -> Result<f64> {
    check_step(h)?;
    let weights = binomial_row(j);
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        let m = j as f64 - 2.0 * i as f64;
        acc += w * checked(&f, x + m * h)?.abs();
    }
    Ok(acc / (2.0 * h).powi(j as i32))
}

/// Coefficients `(D_h)^j f(0) / j!` for `j = 0..=n`.
pub fn surrogate_coeffs<F: Fn(f64) -> f64>(f: &F, n: usize, h: f64) -> Result<Vec<f64>> {
    (0..=n)
        .map(|j| iterated_central_diff(f, 0.0, h, j).map(|d| d / factorial(j)))
        .collect()
}

/// Builds the order-`n` surrogate with differencing step `h`.
pub fn build_surrogate<F: Fn(f64) -> f64>(f: F, n: usize, h: f64, epsilon: f64) -> Result<Surrogate> {
    check_epsilon(epsilon)?;
    let coeffs = surrogate_coeffs(&f, n, h)?;
    Ok(Surrogate {
        poly: Polynomial::new(coeffs)?,
        order: n,
        step: h,
        epsilon,
    })
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )))
    }
}

/// Smallest `n <= MAX_ORDER` whose remainder bound is at most `epsilon / 2`.
pub fn choose_order<B: DerivativeBound + ?Sized>(bound: &B, epsilon: f64) -> Result<usize> {
    check_epsilon(epsilon)?;
    (0..=MAX_ORDER)
        .find(|&n| bound.remainder_bound(n) <= epsilon / 2.0)
        .ok_or(Error::OrderNotFound {
            max_order: MAX_ORDER,
        })
}

/// Outcome of the step search in [`choose_step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepChoice {
    pub h: f64,
    /// Max-norm coefficient change between `h` and `h / 2`.
    pub change: f64,
    /// Whether `change` met the tolerance `epsilon / (4 (n + 1))`.
    pub stabilized: bool,
}

/// Halves `h` from `1 / (4n + 4)` until the surrogate coefficients move by
/// less than `epsilon / (4 (n + 1))` in max-norm between consecutive steps,
/// and returns the coarser step of the first stable pair.
///
/// High-order stencils lose accuracy to rounding as `h` shrinks, so the
/// change can bottom out above the tolerance. When the floor is reached
/// without a stable pair, the step with the smallest observed change is
/// returned with `stabilized == false`.
pub fn choose_step<F: Fn(f64) -> f64>(f: F, n: usize, epsilon: f64) -> Result<StepChoice> {
    check_epsilon(epsilon)?;
    let tol = epsilon / (4.0 * (n as f64 + 1.0));
    let mut h = 1.0 / (4.0 * n as f64 + 4.0);
    let mut coeffs = surrogate_coeffs(&f, n, h)?;
    let mut best: Option<StepChoice> = None;
    while h / 2.0 >= STEP_FLOOR {
        let finer = surrogate_coeffs(&f, n, h / 2.0)?;
        let change = coeffs
            .iter()
            .zip(&finer)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if change < tol {
            return Ok(StepChoice {
                h,
                change,
                stabilized: true,
            });
        }
        if change.is_finite() && best.is_none_or(|b| change < b.change) {
            best = Some(StepChoice {
                h,
                change,
                stabilized: false,
            });
        }
        h /= 2.0;
        coeffs = finer;
    }
    best.ok_or(Error::StepSelectionFailed { floor: STEP_FLOOR })
}

/// Minimizes `f` over `[-1, 1]` through its central-difference surrogate.
///
/// `walk_step` is the precision step of the polynomial minimizer, independent
/// of the differencing step.
pub fn analytic_min<F, B>(f: F, bound: &B, epsilon: f64, walk_step: f64) -> Result<AnalyticMin>
where
    F: Fn(f64) -> f64,
    B: DerivativeBound + ?Sized,
{
    check_epsilon(epsilon)?;
    check_step(walk_step)?;
    let n = choose_order(bound, epsilon)?;
    let step = choose_step(&f, n, epsilon)?;
    let surrogate = build_surrogate(&f, n, step.h, epsilon)?;
    let result = lga_poly_min(&surrogate.poly, Interval::unit(), walk_step)?;
    Ok(AnalyticMin {
        result,
        surrogate,
        step,
    })
}

/// Named analytic test functions with derivative bounds on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CatalogFunction {
    /// `e^x`
    Exp,
    /// `sin(3x)`
    Sin3x,
    /// `1 / (2 + x)`
    Rational,
}

impl CatalogFunction {
    pub const ALL: [CatalogFunction; 3] = [Self::Exp, Self::Sin3x, Self::Rational];

    pub fn name(self) -> &'static str {
        match self {
            Self::Exp => "exp",
            Self::Sin3x => "sin3x",
            Self::Rational => "rational",
        }
    }

    pub fn eval(self, x: f64) -> f64 {
        match self {
            Self::Exp => x.exp(),
            Self::Sin3x => (3.0 * x).sin(),
            Self::Rational => 1.0 / (2.0 + x),
        }
    }

    /// Derivative bounds valid on `[-1, 1]`.
    pub fn bounds(self) -> CatalogBound {
        CatalogBound(self)
    }
}

impl fmt::Display for CatalogFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CatalogFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown function {s:?}; expected one of exp, sin3x, rational"
                ))
            })
    }
}

/// Derivative bounds of a [`CatalogFunction`].
#[derive(Debug, Clone, Copy)]
pub struct CatalogBound(CatalogFunction);

impl DerivativeBound for CatalogBound {
    fn bound(&self, k: usize) -> f64 {
        match self.0 {
            CatalogFunction::Exp => std::f64::consts::E,
            CatalogFunction::Sin3x => 3f64.powi(k as i32),
            // |d^k/dx^k (2 + x)^-1| = k! / (2 + x)^(k+1), largest at x = -1
            CatalogFunction::Rational => factorial(k),
        }
    }

    fn remainder_bound(&self, n: usize) -> f64 {
        match self.0 {
            // f - T_n = (-x/2)^(n+1) / (2 + x), at most 2^-(n+1) on [-1, 1]
            CatalogFunction::Rational => 0.5f64.powi(n as i32 + 1),
            _ => self.bound(n + 1) / factorial(n + 1),
        }
    }
}
