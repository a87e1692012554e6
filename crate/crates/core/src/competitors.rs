//! Baseline global minimizers: uniform grid search, critical-point
//! enumeration, and the classic Piyavskii-Shubert lower-envelope method.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::lga::{Interval, MinResult};
use crate::poly::{laguerre_roots, Polynomial, LAGUERRE_MAX_ITER, LAGUERRE_TOL};

/// Imaginary parts below this are treated as real critical points.
pub const REAL_ROOT_TOL: f64 = 1e-8;

/// Evaluates `f` at `a + (b - a) j / n` for `j = 0..=n` and returns the grid
/// argmin (first index on ties).
pub fn bfs_min<F>(f: F, iv: Interval, n: usize) -> Result<MinResult>
where
    F: Fn(f64) -> f64,
{
    if n < 1 {
        return Err(Error::InvalidParameter("grid needs n >= 1".into()));
    }
    let width = iv.width();
    let mut best_x = iv.a;
    let mut best_v = f(iv.a);
    for j in 1..=n {
        let x = if j == n { iv.b } else { iv.a + width * j as f64 / n as f64 };
        let v = f(x);
        if v < best_v {
            best_x = x;
            best_v = v;
        }
    }
    Ok(MinResult::at(best_x, best_v, 0, n + 1))
}

/// Minimizes `p` over the real critical points inside `iv` and both endpoints.
pub fn zdm_min(p: &Polynomial, iv: Interval) -> Result<MinResult> {
    let p = p.trim();
    let mut candidates = vec![iv.a];
    let d = p.derivative().trim();
    if d.degree() >= 1 {
        let mut crit: Vec<f64> = laguerre_roots(&d, LAGUERRE_TOL, LAGUERRE_MAX_ITER)?
            .into_iter()
            .filter(|z| z.im.abs() <= REAL_ROOT_TOL && iv.contains(z.re))
            .map(|z| z.re)
            .collect();
        crit.sort_by(f64::total_cmp);
        candidates.extend(crit);
    }
    candidates.push(iv.b);

    let mut best = (candidates[0], p.eval(candidates[0]));
    for &x in &candidates[1..] {
        let v = p.eval(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    Ok(MinResult::at(best.0, best.1, 0, candidates.len()))
}

/// `1.1` times the steepest adjacent-pair slope of `f` on an `n`-point grid.
pub fn estimate_lipschitz<F>(f: F, iv: Interval, n: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if n < 2 {
        return Err(Error::InvalidParameter("Lipschitz grid needs n >= 2".into()));
    }
    if iv.width() == 0.0 {
        return Ok(0.0);
    }
    let dx = iv.width() / (n - 1) as f64;
    let mut prev_x = iv.a;
    let mut prev_v = f(iv.a);
    let mut slope = 0.0_f64;
    for i in 1..n {
        let x = if i + 1 == n { iv.b } else { iv.a + dx * i as f64 };
        let v = f(x);
        slope = slope.max(((v - prev_v) / (x - prev_x)).abs());
        prev_x = x;
        prev_v = v;
    }
    Ok(1.1 * slope)
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    x0: f64,
    f0: f64,
    x1: f64,
    f1: f64,
    /// Envelope minimum over the segment and where it is attained.
    lower: f64,
    argmin: f64,
}

impl Segment {
    fn new(x0: f64, f0: f64, x1: f64, f1: f64, lipschitz: f64) -> Self {
        let mid = 0.5 * (x0 + x1) + (f0 - f1) / (2.0 * lipschitz);
        let argmin = mid.clamp(x0, x1);
        let lower = (f0 - lipschitz * (argmin - x0)).max(f1 - lipschitz * (x1 - argmin));
        Self {
            x0,
            f0,
            x1,
            f1,
            lower,
            argmin,
        }
    }
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    // reversed: BinaryHeap pops the smallest lower bound first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .lower
            .total_cmp(&self.lower)
            .then_with(|| other.x0.total_cmp(&self.x0))
    }
}

/// Piyavskii-Shubert search state: the sampled points and the sawtooth lower
/// envelope with slopes `±L` they induce.
#[derive(Debug, Clone)]
pub struct PsmState {
    samples: Vec<(f64, f64)>,
    lipschitz: f64,
    best: (f64, f64),
    segments: BinaryHeap<Segment>,
    iv: Interval,
}

impl PsmState {
    /// Samples both endpoints of `iv`.
    pub fn new<F>(f: &F, lipschitz: f64, iv: Interval) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Lipschitz constant must be positive, got {lipschitz}"
            )));
        }
        let fa = f(iv.a);
        let mut state = Self {
            samples: vec![(iv.a, fa)],
            lipschitz,
            best: (iv.a, fa),
            segments: BinaryHeap::new(),
            iv,
        };
        if iv.b > iv.a {
            let fb = f(iv.b);
            state.record(iv.b, fb);
            state
                .segments
                .push(Segment::new(iv.a, fa, iv.b, fb, lipschitz));
        }
        Ok(state)
    }

    fn record(&mut self, x: f64, v: f64) {
        self.samples.push((x, v));
        if v < self.best.1 {
            self.best = (x, v);
        }
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn best(&self) -> (f64, f64) {
        self.best
    }

    /// Sampled points ordered by `x`.
    pub fn samples(&self) -> Vec<(f64, f64)> {
        let mut s = self.samples.clone();
        s.sort_by(|a, b| a.0.total_cmp(&b.0));
        s
    }

    pub fn evals(&self) -> usize {
        self.samples.len()
    }

    /// Minimum of the lower envelope over the interval (the best sampled
    /// value once every segment is closed).
    pub fn lower_bound(&self) -> f64 {
        self.segments.peek().map_or(self.best.1, |s| s.lower)
    }

    /// Gap between the best sample and the envelope minimum.
    pub fn gap(&self) -> f64 {
        self.best.1 - self.lower_bound()
    }

    /// Envelope value `max_i (f_i - L |x - x_i|)`.
    pub fn envelope_at(&self, x: f64) -> f64 {
        self.samples
            .iter()
            .map(|&(xi, fi)| fi - self.lipschitz * (x - xi).abs())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Samples `f` at the envelope argmin. Returns false when nothing is left
    /// to refine.
    pub fn step<F>(&mut self, f: &F) -> bool
    where
        F: Fn(f64) -> f64,
    {
        let seg = match self.segments.pop() {
            Some(s) => s,
            None => return false,
        };
        let x = seg.argmin;
        if x <= seg.x0 || x >= seg.x1 {
            // envelope minimum sits on a sample; the segment is exhausted
            return true;
        }
        let v = f(x);
        self.record(x, v);
        let l = self.lipschitz;
        self.segments.push(Segment::new(seg.x0, seg.f0, x, v, l));
        self.segments.push(Segment::new(x, v, seg.x1, seg.f1, l));
        true
    }

    pub fn interval(&self) -> Interval {
        self.iv
    }
}

/// Classic Piyavskii-Shubert minimization with a global Lipschitz constant.
///
/// Stops when the best sample is within `tol` of the envelope minimum. When
/// `max_iter` refinements do not suffice the best sample is returned with
/// `converged = false`.
pub fn psm_min<F>(f: F, lipschitz: f64, iv: Interval, tol: f64, max_iter: usize) -> Result<MinResult>
where
    F: Fn(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let mut state = PsmState::new(&f, lipschitz, iv)?;
    let mut converged = false;
    for _ in 0..max_iter {
        if state.gap() <= tol || !state.step(&f) {
            converged = true;
            break;
        }
    }
    if !converged {
        converged = state.gap() <= tol;
    }
    let (x, v) = state.best();
    Ok(MinResult {
        x_arg: x,
        value: v,
        leaps: 0,
        evals: state.evals(),
        converged,
    })
}
