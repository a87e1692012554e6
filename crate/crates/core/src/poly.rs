//! Dense real polynomials with coefficients stored in ascending degree order.
//!
//! Everything the exact minimizers need lives here: Horner evaluation,
//! derivative evaluation, synthetic division by `(x - xk)`, construction
//! from a conjugate-closed root multiset, and a Laguerre root finder.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default convergence tolerance for [`Polynomial::roots`].
pub const LAGUERRE_TOL: f64 = 1e-12;
/// Default iteration budget per Laguerre attempt.
pub const LAGUERRE_MAX_ITER: usize = 100;

const CONJUGATE_TOL: f64 = 1e-9;
const MAX_RESTARTS: usize = 16;
const POLISH_STEPS: usize = 2;

/// A real polynomial `p_0 + p_1 x + ... + p_n x^n`.
///
/// The coefficient vector is never empty. Leading zeros are allowed until
/// [`Polynomial::trim`] removes them.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial from ascending coefficients.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptyPolynomial);
        }
        if let Some((index, &value)) = coeffs.iter().enumerate().find(|(_, c)| !c.is_finite()) {
            return Err(Error::NonFiniteCoefficient { index, value });
        }
        Ok(Self { coeffs })
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// The polynomial `x`.
    pub fn identity() -> Self {
        Self {
            coeffs: vec![0.0, 1.0],
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Nominal degree, `len - 1`. Untrimmed polynomials may have a zero
    /// leading coefficient.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    /// Horner evaluation: `v <- v * x + p_j` for `j = n, n-1, ..., 0`.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        horner(&self.coeffs, x)
    }

    /// Evaluates `p'(x)` without materializing the derivative.
    #[inline]
    pub fn eval_derivative(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (j, &c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * x + j as f64 * c;
        }
        acc
    }

    /// Evaluates the polynomial at a complex point.
    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Synthetic division by `(x - xk)`.
    ///
    /// Returns `q` of degree `n - 1` with `q(x) (x - xk) + p(xk) = p(x)`,
    /// i.e. `q(x) = (p(x) - p(xk)) / (x - xk)`.
    pub fn deflate(&self, xk: f64) -> Result<Polynomial> {
        let n = self.degree();
        if n == 0 {
            return Err(Error::DeflateConstant);
        }
        let p = &self.coeffs;
        let mut q = vec![0.0; n];
        q[n - 1] = p[n];
        for j in (1..n).rev() {
            q[j - 1] = xk * q[j] + p[j];
        }
        Ok(Polynomial { coeffs: q })
    }

    /// Drops zero leading coefficients, never below length 1.
    pub fn trim(&self) -> Polynomial {
        let mut end = self.coeffs.len();
        while end > 1 && self.coeffs[end - 1] == 0.0 {
            end -= 1;
        }
        Polynomial {
            coeffs: self.coeffs[..end].to_vec(),
        }
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() == 1 {
            return Polynomial::constant(0.0);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, &c)| j as f64 * c)
            .collect();
        Polynomial { coeffs }
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: f64) -> Polynomial {
        Polynomial {
            coeffs: self.coeffs.iter().map(|&v| v * c).collect(),
        }
    }

    /// Adds a constant to the polynomial.
    pub fn shift(&self, d: f64) -> Polynomial {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] += d;
        Polynomial { coeffs }
    }

    /// Product with another polynomial.
    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial { coeffs: out }
    }

    /// Monic polynomial `prod (x - r_i)` over a conjugate-closed root multiset.
    ///
    /// Non-real roots are paired with their conjugates before multiplying, so
    /// each pair contributes the real quadratic `x^2 - 2 Re(r) x + |r|^2`. A
    /// root whose conjugate partner is missing fails with
    /// [`Error::NotConjugateClosed`].
    pub fn from_roots(roots: &[Complex64]) -> Result<Polynomial> {
        let mut pending: Vec<Complex64> = roots.to_vec();
        let mut out = Polynomial::constant(1.0);
        while let Some(r) = pending.pop() {
            if r.im.abs() <= CONJUGATE_TOL {
                out = out.mul(&Polynomial {
                    coeffs: vec![-r.re, 1.0],
                });
                continue;
            }
            let target = r.conj();
            let partner = pending
                .iter()
                .enumerate()
                .map(|(i, z)| (i, (z - target).norm()))
                .min_by(|x, y| x.1.total_cmp(&y.1));
            let (idx, _) = match partner {
                Some(found) => found,
                None => return Err(Error::NotConjugateClosed { re: r.re, im: r.im }),
            };
            let s = pending.swap_remove(idx);
            let c1 = -(r + s);
            let c0 = r * s;
            if c1.im.abs() > CONJUGATE_TOL || c0.im.abs() > CONJUGATE_TOL {
                return Err(Error::NotConjugateClosed { re: r.re, im: r.im });
            }
            out = out.mul(&Polynomial {
                coeffs: vec![c0.re, c1.re, 1.0],
            });
        }
        Ok(out)
    }

    /// All complex roots (with multiplicity) using the default tolerances.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        laguerre_roots(self, LAGUERRE_TOL, LAGUERRE_MAX_ITER)
    }
}

#[inline]
pub(crate) fn horner(coeffs: &[f64], x: f64) -> f64 {
    let mut v = 0.0;
    for &c in coeffs.iter().rev() {
        v = v * x + c;
    }
    v
}

impl fmt::Display for Polynomial {
    /// Space-separated ascending coefficients, e.g. `-1 0 1` for `x^2 - 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Polynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let coeffs = s
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("invalid coefficient {tok:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Polynomial::new(coeffs)
    }
}

/// Finds all `degree(p)` complex roots of `p`.
///
/// Each root is located by Laguerre iteration from the origin on the
/// current deflated polynomial, deflated out in complex arithmetic, and then
/// polished with a couple of Laguerre steps against the original `p`. An
/// attempt that stalls is restarted from a perturbed starting point.
pub fn laguerre_roots(p: &Polynomial, tol: f64, max_iter: usize) -> Result<Vec<Complex64>> {
    let degree = p.degree();
    if degree == 0 {
        return Err(Error::InvalidParameter(
            "root finding needs degree >= 1".into(),
        ));
    }
    if p.leading() == 0.0 {
        return Err(Error::InvalidParameter(
            "leading coefficient must be nonzero".into(),
        ));
    }
    let original: Vec<Complex64> = p.coeffs().iter().map(|&c| Complex64::new(c, 0.0)).collect();
    let mut work = original.clone();
    let mut roots = Vec::with_capacity(degree);
    let mut perturb = Perturbation::new(p);

    while work.len() > 1 {
        let mut found = None;
        let mut start = Complex64::new(0.0, 0.0);
        for _ in 0..=MAX_RESTARTS {
            if let Some(z) = laguerre(&work, start, tol, max_iter) {
                found = Some(z);
                break;
            }
            start = perturb.next_start();
        }
        let z = match found {
            Some(z) => z,
            None => {
                return Err(Error::RootsNotConverged {
                    partial: roots,
                    degree,
                })
            }
        };
        work = deflate_complex(&work, z);
        roots.push(z);
    }

    for r in roots.iter_mut() {
        *r = polish(&original, *r, POLISH_STEPS);
        if r.im.abs() <= 2.0 * f64::EPSILON * r.re.abs() {
            r.im = 0.0;
        }
    }
    Ok(roots)
}

/// Deterministic sequence of restart points spread over a disc that
/// contains every root (Cauchy bound).
struct Perturbation {
    radius: f64,
    k: u32,
}

impl Perturbation {
    fn new(p: &Polynomial) -> Self {
        let lead = p.leading().abs();
        let bound = p.coeffs()[..p.degree()]
            .iter()
            .map(|c| c.abs() / lead)
            .fold(0.0_f64, f64::max);
        Self {
            radius: 1.0 + bound,
            k: 0,
        }
    }

    fn next_start(&mut self) -> Complex64 {
        self.k += 1;
        // golden-angle spiral, radius cycling through (0, R]
        let angle = self.k as f64 * 2.399_963_229_728_653;
        let frac = ((self.k as f64 * 0.618_033_988_749_895) % 1.0).max(0.05);
        Complex64::from_polar(self.radius * frac, angle)
    }
}

struct LaguerreEval {
    value: Complex64,
    d1: Complex64,
    d2_half: Complex64,
    err_bound: f64,
}

fn eval_with_derivatives(a: &[Complex64], x: Complex64) -> LaguerreEval {
    let m = a.len() - 1;
    let mut b = a[m];
    let mut d = Complex64::new(0.0, 0.0);
    let mut f = Complex64::new(0.0, 0.0);
    let mut err = b.norm();
    let abx = x.norm();
    for j in (0..m).rev() {
        f = x * f + d;
        d = x * d + b;
        b = x * b + a[j];
        err = b.norm() + abx * err;
    }
    LaguerreEval {
        value: b,
        d1: d,
        d2_half: f,
        err_bound: err * f64::EPSILON,
    }
}

fn laguerre_direction(a: &[Complex64], x: Complex64, ev: &LaguerreEval, iter: usize) -> Complex64 {
    let m = (a.len() - 1) as f64;
    let g = ev.d1 / ev.value;
    let g2 = g * g;
    let h = g2 - 2.0 * ev.d2_half / ev.value;
    let sq = ((m - 1.0) * (m * h - g2)).sqrt();
    let gp = g + sq;
    let gm = g - sq;
    let denom = if gp.norm() >= gm.norm() { gp } else { gm };
    if denom.norm() > 0.0 {
        Complex64::new(m, 0.0) / denom
    } else {
        Complex64::from_polar(1.0 + x.norm(), iter as f64)
    }
}

/// One Laguerre run on `a` from `x`. `None` when `max_iter` is exhausted.
fn laguerre(a: &[Complex64], mut x: Complex64, tol: f64, max_iter: usize) -> Option<Complex64> {
    const FRAC: [f64; 8] = [0.5, 0.25, 0.75, 0.13, 0.38, 0.62, 0.88, 1.0];
    for iter in 1..=max_iter {
        let ev = eval_with_derivatives(a, x);
        if ev.value.norm() <= ev.err_bound {
            return Some(x);
        }
        let dx = laguerre_direction(a, x, &ev, iter);
        let x1 = x - dx;
        if x1 == x || dx.norm() <= tol * x1.norm().max(tol) {
            return Some(x1);
        }
        // break limit cycles every 10 iterations with a fractional step
        x = if iter % 10 == 0 {
            x - dx * FRAC[(iter / 10) % FRAC.len()]
        } else {
            x1
        };
        if !x.re.is_finite() || !x.im.is_finite() {
            return None;
        }
    }
    None
}

fn polish(a: &[Complex64], mut x: Complex64, steps: usize) -> Complex64 {
    for iter in 1..=steps {
        let ev = eval_with_derivatives(a, x);
        if ev.value.norm() <= ev.err_bound {
            break;
        }
        let x1 = x - laguerre_direction(a, x, &ev, iter);
        if !x1.re.is_finite() || !x1.im.is_finite() {
            break;
        }
        // keep the polished point only if it does not worsen the residual
        if eval_with_derivatives(a, x1).value.norm() <= ev.value.norm() {
            x = x1;
        } else {
            break;
        }
    }
    x
}

fn deflate_complex(a: &[Complex64], z: Complex64) -> Vec<Complex64> {
    let m = a.len() - 1;
    let mut q = vec![Complex64::new(0.0, 0.0); m];
    let mut b = a[m];
    for j in (0..m).rev() {
        q[j] = b;
        b = a[j] + b * z;
    }
    q
}
