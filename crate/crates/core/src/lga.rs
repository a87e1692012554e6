//! Leap gradient minimization on a closed interval.
//!
//! The walk advances on the grid `start + k h` while the objective does not
//! increase. When it stalls at `x_k`, the minimizer of the difference
//! quotient `(f(x) - f(x_k)) / (x - x_k)` over `[x_k, b]` is computed by the
//! same procedure; if that point strictly improves on `f(x_k)` the search
//! leaps there and resumes the walk, otherwise `x_k` is reported.
//!
//! For polynomials the quotient is again a polynomial (one Horner pass), so
//! the recursion bottoms out at the closed-form tier for degree <= 2. The
//! number of leaps is bounded by a weighted jump counter capped at `n - 2`.

use std::cell::Cell;

use crate::error::{Error, Result};
use crate::poly::Polynomial;

/// Closed search domain `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() || a > b {
            return Err(Error::InvalidInterval { a, b });
        }
        Ok(Self { a, b })
    }

    /// `[-1, 1]`, the domain used throughout the experiments.
    pub fn unit() -> Self {
        Self { a: -1.0, b: 1.0 }
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a <= x && x <= self.b
    }
}

/// Argmin estimate returned by every minimizer in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinResult {
    pub x_arg: f64,
    pub value: f64,
    /// Evolutionary leaps taken by the top-level search.
    pub leaps: usize,
    /// Objective evaluations, including those spent in subproblems.
    pub evals: usize,
    /// False when an iterative method stopped on its iteration budget.
    pub converged: bool,
}

impl MinResult {
    pub(crate) fn at(x_arg: f64, value: f64, leaps: usize, evals: usize) -> Self {
        Self {
            x_arg,
            value,
            leaps,
            evals,
            converged: true,
        }
    }
}

/// Parameters of the black-box form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LgaConfig {
    /// Precision step of the walk.
    pub h: f64,
    /// Nesting depth at which the quotient subproblem is solved by a grid scan.
    pub max_depth: usize,
    /// Points in the terminal grid scan.
    pub fallback_grid: usize,
}

impl LgaConfig {
    pub fn new(h: f64) -> Self {
        Self {
            h,
            ..Self::default()
        }
    }

    fn validate(&self, iv: &Interval) -> Result<()> {
        check_step(self.h)?;
        if self.max_depth < 1 {
            return Err(Error::InvalidParameter("max_depth must be >= 1".into()));
        }
        if self.fallback_grid < 2 {
            return Err(Error::InvalidParameter("fallback_grid must be >= 2".into()));
        }
        if iv.width() / self.h > i64::MAX as f64 {
            return Err(Error::InvalidParameter(
                "interval too long for the precision step".into(),
            ));
        }
        Ok(())
    }
}

impl Default for LgaConfig {
    fn default() -> Self {
        Self {
            h: 1e-4,
            max_depth: 8,
            fallback_grid: 1024,
        }
    }
}

pub(crate) fn check_step(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidStep(h))
    }
}

/// One evolutionary leap of the top-level polynomial search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leap {
    /// Iterate preceding `from` (previous grid point, or the origin of the
    /// previous leap when the walk did not move).
    pub prev: f64,
    /// Point where the walk stalled.
    pub from: f64,
    /// Leap target.
    pub to: f64,
}

/// Bookkeeping of a top-level [`lga_poly_min_traced`] run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LeapTrace {
    /// Final value of the weighted jump counter.
    pub jump_counter: usize,
    pub leaps: Vec<Leap>,
    /// Every point where the top-level walk stalled or landed, in order.
    pub path: Vec<f64>,
}

/// Minimizes `p` over `iv` with precision step `h`.
pub fn lga_poly_min(p: &Polynomial, iv: Interval, h: f64) -> Result<MinResult> {
    lga_poly_min_traced(p, iv, h).map(|(r, _)| r)
}

/// Same as [`lga_poly_min`], also returning the top-level leap trace.
pub fn lga_poly_min_traced(
    p: &Polynomial,
    iv: Interval,
    h: f64,
) -> Result<(MinResult, LeapTrace)> {
    check_step(h)?;
    let p = p.trim();
    let mut run = PolyRun {
        evals: 0,
        h,
        trace: LeapTrace::default(),
    };
    let result = run.minimize(&p, iv, true);
    Ok((result, run.trace))
}

struct PolyRun {
    evals: usize,
    h: f64,
    trace: LeapTrace,
}

struct Walk {
    x: f64,
    value: f64,
    /// Grid point before `x`, if the walk moved.
    prev: Option<f64>,
    reached_end: bool,
}

impl PolyRun {
    fn eval(&mut self, p: &Polynomial, x: f64) -> f64 {
        self.evals += 1;
        p.eval(x)
    }

    fn walk(&mut self, p: &Polynomial, start: f64, b: f64) -> Walk {
        let h = self.h;
        let mut x = start;
        let mut fx = self.eval(p, x);
        let mut prev = None;
        let mut k: u64 = 0;
        loop {
            if x >= b {
                return Walk {
                    x: b,
                    value: if x == b { fx } else { self.eval(p, b) },
                    prev,
                    reached_end: true,
                };
            }
            k += 1;
            let next = (start + k as f64 * h).min(b);
            let f_next = self.eval(p, next);
            if f_next > fx {
                return Walk {
                    x,
                    value: fx,
                    prev,
                    reached_end: false,
                };
            }
            prev = Some(x);
            x = next;
            fx = f_next;
        }
    }

    fn minimize(&mut self, p: &Polynomial, iv: Interval, top: bool) -> MinResult {
        if p.degree() <= 2 {
            let (x, v, evals) = closed_form(p, iv);
            self.evals += evals;
            return MinResult::at(x, v, 0, self.evals);
        }
        let cap = p.degree() - 2;
        let mut jumps = 0usize;
        let mut leaps = 0usize;
        let mut start = iv.a;
        let mut last_origin = iv.a;
        loop {
            let walk = self.walk(p, start, iv.b);
            if top {
                self.trace.path.push(walk.x);
            }
            if walk.reached_end {
                return self.finish(walk.x, walk.value, leaps, jumps, top);
            }
            let xk = walk.x;
            if jumps >= cap {
                return self.finish(xk, walk.value, leaps, jumps, top);
            }
            let q = p.deflate(xk).expect("degree >= 3");
            let sub = self.minimize(&q, Interval { a: xk, b: iv.b }, false);
            if !(sub.x_arg > xk && sub.value < 0.0) {
                return self.finish(xk, walk.value, leaps, jumps, top);
            }
            jumps += if xk == iv.a { 1 } else { 2 };
            leaps += 1;
            if top {
                self.trace.leaps.push(Leap {
                    prev: walk.prev.unwrap_or(last_origin),
                    from: xk,
                    to: sub.x_arg,
                });
            }
            last_origin = xk;
            start = sub.x_arg;
        }
    }

    fn finish(&mut self, x: f64, value: f64, leaps: usize, jumps: usize, top: bool) -> MinResult {
        if top {
            self.trace.jump_counter = jumps;
        }
        MinResult::at(x, value, leaps, self.evals)
    }
}

/// Walks from `start` on the grid `start + k h` while `p` does not increase.
///
/// Returns the first grid point `x` with `p(x + h) > p(x)`, or `b` when the
/// walk reaches the end of the interval. The last grid step is clamped to `b`.
pub fn descend_poly(p: &Polynomial, start: f64, b: f64, h: f64) -> Result<f64> {
    check_step(h)?;
    let mut run = PolyRun {
        evals: 0,
        h,
        trace: LeapTrace::default(),
    };
    Ok(run.walk(p, start, b).x)
}

/// Exact minimum of a polynomial of degree <= 2 on `iv`.
pub fn closed_form_min_deg_le2(p: &Polynomial, iv: Interval) -> Result<MinResult> {
    let p = p.trim();
    if p.degree() > 2 {
        return Err(Error::DegreeTooHigh(p.degree()));
    }
    let (x, v, evals) = closed_form(&p, iv);
    Ok(MinResult::at(x, v, 0, evals))
}

/// `p` trimmed, degree <= 2. Returns `(x, p(x), evaluations)`.
fn closed_form(p: &Polynomial, iv: Interval) -> (f64, f64, usize) {
    let c = p.coeffs();
    let endpoints = || {
        let (fa, fb) = (p.eval(iv.a), p.eval(iv.b));
        if fa <= fb {
            (iv.a, fa, 2)
        } else {
            (iv.b, fb, 2)
        }
    };
    match c.len() {
        1 => (iv.a, c[0], 0),
        2 => endpoints(),
        _ if c[2] > 0.0 => {
            let x = (-c[1] / (2.0 * c[2])).clamp(iv.a, iv.b);
            (x, p.eval(x), 1)
        }
        _ => endpoints(),
    }
}

/// Counts sign changes of `p''` sampled on `grid` uniform points of `[lo, hi]`.
///
/// Zero samples are skipped, so a tangency counts as no change.
pub fn count_second_derivative_sign_changes(p: &Polynomial, lo: f64, hi: f64, grid: usize) -> usize {
    let d2 = p.derivative().derivative();
    let grid = grid.max(2);
    let step = (hi - lo) / (grid - 1) as f64;
    let mut last_sign = 0.0_f64;
    let mut changes = 0;
    for i in 0..grid {
        let x = if i + 1 == grid { hi } else { lo + i as f64 * step };
        let v = d2.eval(x);
        if v == 0.0 {
            continue;
        }
        let s = v.signum();
        if last_sign != 0.0 && s != last_sign {
            changes += 1;
        }
        last_sign = s;
    }
    changes
}

/// Leap gradient minimization of a black-box objective on `iv`.
///
/// The quotient subproblem at `x_k` is solved recursively on
/// `g(x) = (f(x) - f(x_k)) / (x - x_k)`, with `g(x_k)` replaced by the
/// forward difference over the step that stopped the walk. At
/// `cfg.max_depth` the subproblem is solved by a uniform grid scan.
pub fn lga_generic<F>(f: F, iv: Interval, cfg: &LgaConfig) -> Result<MinResult>
where
    F: Fn(f64) -> f64,
{
    cfg.validate(&iv)?;
    let evals = Cell::new(0usize);
    let bad = Cell::new(None::<f64>);
    let oracle = |x: f64| {
        evals.set(evals.get() + 1);
        let v = f(x);
        if !v.is_finite() && bad.get().is_none() {
            bad.set(Some(x));
        }
        v
    };
    let solver = GenericSolver { cfg };
    let (x, value, leaps) = solver.solve(&oracle, iv, 0);
    if let Some(x) = bad.get() {
        return Err(Error::NonFinite { x });
    }
    Ok(MinResult::at(x, value, leaps, evals.get()))
}

struct GenericSolver<'c> {
    cfg: &'c LgaConfig,
}

impl GenericSolver<'_> {
    fn solve(&self, g: &dyn Fn(f64) -> f64, iv: Interval, depth: usize) -> (f64, f64, usize) {
        if depth >= self.cfg.max_depth {
            let (x, v) = grid_scan(g, iv, self.cfg.fallback_grid);
            return (x, v, 0);
        }
        let h = self.cfg.h;
        let mut leaps = 0;
        let mut start = iv.a;
        let mut gs = g(start);
        loop {
            // walk
            let mut x = start;
            let mut gx = gs;
            let mut k: u64 = 0;
            let (next, g_next) = loop {
                if x >= iv.b {
                    return (iv.b, gx, leaps);
                }
                k += 1;
                let next = (start + k as f64 * h).min(iv.b);
                let g_next = g(next);
                // NaN compares false and keeps walking; the caller reports it
                if g_next > gx {
                    break (next, g_next);
                }
                x = next;
                gx = g_next;
            };
            let (xk, gk) = (x, gx);
            let slope_at_anchor = (g_next - gk) / (next - xk);
            let quotient = move |t: f64| {
                if t == xk {
                    slope_at_anchor
                } else {
                    (g(t) - gk) / (t - xk)
                }
            };
            let (xs, _, _) = self.solve(&quotient, Interval { a: xk, b: iv.b }, depth + 1);
            if !(xs > xk) {
                return (xk, gk, leaps);
            }
            let g_star = g(xs);
            if !(g_star < gk) {
                return (xk, gk, leaps);
            }
            leaps += 1;
            start = xs;
            gs = g_star;
        }
    }
}

/// Uniform scan over `n >= 2` points of `iv`; first index wins ties.
fn grid_scan(g: &dyn Fn(f64) -> f64, iv: Interval, n: usize) -> (f64, f64) {
    let n = n.max(2);
    let mut best = (iv.a, g(iv.a));
    for i in 1..n {
        let x = if i + 1 == n {
            iv.b
        } else {
            iv.a + iv.width() * i as f64 / (n - 1) as f64
        };
        let v = g(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[f64]) -> Polynomial {
        Polynomial::new(c.to_vec()).unwrap()
    }

    fn brute_force(p: &Polynomial, iv: Interval, n: usize) -> (f64, f64) {
        (0..=n)
            .map(|j| {
                let x = iv.a + iv.width() * j as f64 / n as f64;
                (x, p.eval(x))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap()
    }

    #[test]
    fn interval_validation() {
        assert!(Interval::new(1.0, 0.0).is_err());
        assert!(Interval::new(f64::NAN, 0.0).is_err());
        assert!(Interval::new(0.0, 0.0).is_ok());
    }

    #[test]
    fn closed_form_examples() {
        let sq = poly(&[0.0, 0.0, 1.0]);
        let r = closed_form_min_deg_le2(&sq, Interval::new(-1.0, 1.0).unwrap()).unwrap();
        assert_eq!((r.x_arg, r.value), (0.0, 0.0));
        let r = closed_form_min_deg_le2(&sq, Interval::new(2.0, 5.0).unwrap()).unwrap();
        assert_eq!((r.x_arg, r.value), (2.0, 4.0));
        let r = closed_form_min_deg_le2(&poly(&[0.0, 0.0, -1.0]), Interval::new(-1.0, 2.0).unwrap())
            .unwrap();
        assert_eq!((r.x_arg, r.value), (2.0, -4.0));
        let r = closed_form_min_deg_le2(&poly(&[3.0]), Interval::unit()).unwrap();
        assert_eq!((r.x_arg, r.value), (-1.0, 3.0));
        // untrimmed quadratic with zero leading term falls back to the linear rule
        let r = closed_form_min_deg_le2(&poly(&[0.0, -1.0, 0.0]), Interval::unit()).unwrap();
        assert_eq!((r.x_arg, r.value), (1.0, -1.0));
        assert!(matches!(
            closed_form_min_deg_le2(&poly(&[0.0, 0.0, 0.0, 1.0]), Interval::unit()),
            Err(Error::DegreeTooHigh(3))
        ));
    }

    #[test]
    fn descend_examples() {
        // grid -1, -0.75, ..., 0: p(0) < p(-0.25) so the walk reaches 0, then 0.25 ascends
        let x = descend_poly(&poly(&[0.0, 0.0, 1.0]), -1.0, 1.0, 0.25).unwrap();
        assert_eq!(x, 0.0);
        assert_eq!(descend_poly(&poly(&[0.0, 1.0]), -1.0, 1.0, 0.1).unwrap(), -1.0);
        assert_eq!(descend_poly(&poly(&[0.0, -1.0]), -1.0, 1.0, 0.5).unwrap(), 1.0);
        // clamped last step
        assert_eq!(descend_poly(&poly(&[0.0, -1.0]), -1.0, 1.0, 0.3).unwrap(), 1.0);
        assert!(descend_poly(&poly(&[0.0, -1.0]), -1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn sign_change_examples() {
        assert_eq!(count_second_derivative_sign_changes(&poly(&[0.0, 0.0, 0.0, 0.0, 1.0]), -1.0, 1.0, 1000), 0);
        assert_eq!(count_second_derivative_sign_changes(&poly(&[0.0, 0.0, 0.0, 1.0]), -1.0, 1.0, 1000), 1);
        assert_eq!(count_second_derivative_sign_changes(&poly(&[0.0, 0.0, -1.0, 0.0, 1.0]), -1.0, 1.0, 1000), 2);
    }

    #[test]
    fn poly_min_examples() {
        let r = lga_poly_min(&poly(&[0.0, 0.0, 1.0]), Interval::unit(), 1e-4).unwrap();
        assert_eq!((r.x_arg, r.value), (0.0, 0.0));

        // x^4 + x^2: 3a^2 <= 8b, pure descent
        let r = lga_poly_min(&poly(&[0.0, 0.0, 1.0, 0.0, 1.0]), Interval::unit(), 1e-4).unwrap();
        assert_eq!(r.leaps, 0);
        assert!(r.x_arg.abs() <= 1e-4);

        // (x+0.8)(x+0.2)(x-0.3)(x-0.9)
        let p = poly(&[0.8, 1.0])
            .mul(&poly(&[0.2, 1.0]))
            .mul(&poly(&[-0.3, 1.0]))
            .mul(&poly(&[-0.9, 1.0]));
        let iv = Interval::unit();
        let r = lga_poly_min(&p, iv, 1e-4).unwrap();
        let (_, g) = brute_force(&p, iv, 100_000);
        let lip = (0..=1000)
            .map(|j| p.eval_derivative(-1.0 + 2.0 * j as f64 / 1000.0).abs())
            .fold(0.0, f64::max);
        assert!(r.value <= g + lip * 1e-4, "{} vs {}", r.value, g);
        assert!(r.leaps <= 1);
    }

    #[test]
    fn poly_min_linear_and_constant() {
        let r = lga_poly_min(&poly(&[0.0, 1.0]), Interval::unit(), 1e-3).unwrap();
        assert_eq!((r.x_arg, r.value), (-1.0, -1.0));
        let r = lga_poly_min(&poly(&[2.0, 0.0, 0.0, 0.0]), Interval::unit(), 1e-3).unwrap();
        assert_eq!((r.x_arg, r.value), (-1.0, 2.0));
        assert!(matches!(
            lga_poly_min(&poly(&[1.0]), Interval::unit(), -1.0),
            Err(Error::InvalidStep(_))
        ));
    }

    #[test]
    fn poly_min_degenerate_interval() {
        let p = poly(&[0.0, 0.0, -1.0, 0.0, 1.0]);
        let r = lga_poly_min(&p, Interval::new(0.3, 0.3).unwrap(), 1e-3).unwrap();
        assert_eq!(r.x_arg, 0.3);
        // shorter than one step
        let r = lga_poly_min(&p, Interval::new(0.3, 0.30001).unwrap(), 1e-3).unwrap();
        assert!(r.x_arg == 0.3 || r.x_arg == 0.30001);
    }

    #[test]
    fn traced_run_records_leaps() {
        // two wells, the right one deeper: x^4 - x^2 + 0.1 x shifted
        let p = poly(&[0.0, -0.1, -1.0, 0.0, 1.0]);
        let (r, trace) = lga_poly_min_traced(&p, Interval::unit(), 1e-4).unwrap();
        assert_eq!(r.leaps, trace.leaps.len());
        assert_eq!(r.leaps, 1);
        assert!(trace.jump_counter <= 2);
        let leap = trace.leaps[0];
        assert!(leap.prev < leap.from && leap.from < leap.to);
        let (xg, _) = brute_force(&p, Interval::unit(), 200_000);
        assert!((r.x_arg - xg).abs() < 2e-4, "{} vs {}", r.x_arg, xg);
    }

    #[test]
    fn generic_examples() {
        let cfg = LgaConfig::new(1e-3);
        let r = lga_generic(|x| x * x, Interval::unit(), &cfg).unwrap();
        assert!(r.x_arg.abs() <= 1e-3);
        assert_eq!(r.leaps, 0);

        let r = lga_generic(|x| x, Interval::unit(), &cfg).unwrap();
        assert_eq!((r.x_arg, r.value, r.leaps), (-1.0, -1.0, 0));

        let cfg = LgaConfig::new(1e-4);
        let f = |x: f64| x.powi(4) - x * x;
        let r = lga_generic(f, Interval::new(-1.2, 1.2).unwrap(), &cfg).unwrap();
        let grid_min = (0..=200_000)
            .map(|j| f(-1.2 + 2.4 * j as f64 / 200_000.0))
            .fold(f64::INFINITY, f64::min);
        assert!((grid_min + 0.25).abs() < 1e-9);
        assert!((r.value + 0.25).abs() < 1e-6, "value {}", r.value);
        assert!((r.x_arg.abs() - 0.5f64.sqrt()).abs() < 2e-4);
    }

    #[test]
    fn generic_leaps_to_deeper_well() {
        let f = |x: f64| x.powi(4) - x * x - 0.1 * x;
        let r = lga_generic(f, Interval::unit(), &LgaConfig::new(1e-4)).unwrap();
        assert_eq!(r.leaps, 1);
        let (xg, _) = brute_force(&poly(&[0.0, -0.1, -1.0, 0.0, 1.0]), Interval::unit(), 200_000);
        assert!((r.x_arg - xg).abs() < 2e-4, "{} vs {}", r.x_arg, xg);
    }

    #[test]
    fn generic_reports_non_finite() {
        let r = lga_generic(|x| if x > 0.5 { f64::NAN } else { -x }, Interval::unit(), &LgaConfig::new(1e-2));
        match r {
            Err(Error::NonFinite { x }) => assert!(x > 0.5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn generic_config_validation() {
        let mut cfg = LgaConfig::new(1e-3);
        cfg.fallback_grid = 1;
        assert!(lga_generic(|x| x, Interval::unit(), &cfg).is_err());
        cfg = LgaConfig::new(1e-3);
        cfg.max_depth = 0;
        assert!(lga_generic(|x| x, Interval::unit(), &cfg).is_err());
    }
}
