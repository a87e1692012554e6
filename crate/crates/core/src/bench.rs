//! Randomized timing protocol: root-sampled polynomials, repeated trials of
//! the leap minimizer against one baseline, per-degree mean times.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::competitors::{bfs_min, estimate_lipschitz, psm_min, zdm_min};
use crate::error::{Error, Result};
use crate::lga::{lga_poly_min, Interval, MinResult};
use crate::poly::Polynomial;

/// Header of the results CSV.
pub const RESULTS_HEADER: [&str; 4] = ["degree", "t_lga_us", "t_competitor_us", "excluded"];

/// Grid size used to estimate the Lipschitz constant for PSM runs.
pub const LIPSCHITZ_GRID: usize = 1000;
/// Lower clamp on the estimated Lipschitz constant.
pub const LIPSCHITZ_FLOOR: f64 = 1e-12;

/// Baseline timed against the leap minimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Competitor {
    Bfs,
    Zdm,
    Psm,
}

impl Competitor {
    pub fn name(self) -> &'static str {
        match self {
            Self::Bfs => "bfs",
            Self::Zdm => "zdm",
            Self::Psm => "psm",
        }
    }
}

impl fmt::Display for Competitor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Competitor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bfs" => Ok(Self::Bfs),
            "zdm" => Ok(Self::Zdm),
            "psm" => Ok(Self::Psm),
            _ => Err(Error::InvalidParameter(format!(
                "unknown competitor {s:?}; expected bfs, zdm or psm"
            ))),
        }
    }
}

/// How [`random_polynomial`] places roots in `[-1, b_param] x [-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum RootSampling {
    /// Conjugate pairs with imaginary part in `(0, 1]`, plus one real root
    /// for odd degree.
    #[default]
    Complex,
    /// Real roots only.
    Real,
}

impl fmt::Display for RootSampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Complex => "complex",
            Self::Real => "real",
        })
    }
}

impl FromStr for RootSampling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complex" => Ok(Self::Complex),
            "real" => Ok(Self::Real),
            _ => Err(Error::InvalidParameter(format!(
                "unknown root sampling {s:?}; expected complex or real"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub degrees: Vec<usize>,
    pub trials: usize,
    pub b_param: f64,
    pub h: f64,
    pub seed: u64,
    pub competitor: Competitor,
    /// Grid intervals for BFS; `None` means `ceil(2 / h)`.
    pub bfs_points: Option<usize>,
    pub roots: RootSampling,
    pub psm_tol: f64,
    pub psm_max_iter: usize,
    /// Run degrees on separate worker threads. Each timed call still runs on
    /// a single thread.
    pub parallel: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            degrees: (3..=12).collect(),
            trials: 500,
            b_param: 1.0,
            h: 1e-4,
            seed: 0,
            competitor: Competitor::Bfs,
            bfs_points: None,
            roots: RootSampling::Complex,
            psm_tol: 1e-6,
            psm_max_iter: 1_000_000,
            parallel: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.degrees.is_empty() {
            return bad("at least one degree is required".into());
        }
        if let Some(&d) = self.degrees.iter().find(|&&d| d < 1) {
            return bad(format!("degrees must be >= 1, got {d}"));
        }
        if self.trials < 1 {
            return bad("trials must be >= 1".into());
        }
        if !(self.b_param > -1.0 && self.b_param <= 1.0) {
            return bad(format!("b_param must lie in (-1, 1], got {}", self.b_param));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidStep(self.h));
        }
        if self.bfs_points == Some(0) {
            return bad("bfs_points must be >= 1".into());
        }
        if !(self.psm_tol > 0.0) {
            return bad(format!("psm_tol must be positive, got {}", self.psm_tol));
        }
        Ok(())
    }

    /// BFS grid intervals actually used.
    pub fn bfs_grid(&self) -> usize {
        self.bfs_points
            .unwrap_or_else(|| (Interval::unit().width() / self.h).ceil() as usize)
    }
}

/// Algorithm that produced a [`TrialRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algo {
    Lga,
    Bfs,
    Zdm,
    Psm,
}

impl From<Competitor> for Algo {
    fn from(c: Competitor) -> Self {
        match c {
            Competitor::Bfs => Algo::Bfs,
            Competitor::Zdm => Algo::Zdm,
            Competitor::Psm => Algo::Psm,
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Lga => "lga",
            Self::Bfs => "bfs",
            Self::Zdm => "zdm",
            Self::Psm => "psm",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialStatus {
    Ok,
    /// PSM hit its iteration budget.
    Unconverged,
    /// The minimizer returned an error.
    Failed,
}

impl fmt::Display for TrialStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ok => "ok",
            Self::Unconverged => "unconverged",
            Self::Failed => "failed",
        })
    }
}

/// One timed minimizer call.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub degree: usize,
    pub algo: Algo,
    pub elapsed_us: f64,
    pub x_arg: f64,
    pub value: f64,
    pub status: TrialStatus,
    /// Lipschitz estimate used by PSM.
    pub lipschitz: Option<f64>,
}

impl TrialRecord {
    fn new(degree: usize, algo: Algo, elapsed_us: f64, outcome: Result<MinResult>) -> Self {
        let (x_arg, value, status) = match outcome {
            Ok(r) if r.converged => (r.x_arg, r.value, TrialStatus::Ok),
            Ok(r) => (r.x_arg, r.value, TrialStatus::Unconverged),
            Err(_) => (f64::NAN, f64::NAN, TrialStatus::Failed),
        };
        Self {
            degree,
            algo,
            elapsed_us,
            x_arg,
            value,
            status,
            lipschitz: None,
        }
    }

    pub fn is_flagged(&self) -> bool {
        self.status != TrialStatus::Ok
    }
}

/// Both records of one trial plus the polynomial they ran on.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub degree: usize,
    pub index: usize,
    pub poly: Polynomial,
    pub lga: TrialRecord,
    pub competitor: TrialRecord,
}

impl Trial {
    pub fn is_excluded(&self) -> bool {
        self.lga.is_flagged() || self.competitor.is_flagged()
    }
}

/// Per-degree means over the trials that were not excluded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResultRow {
    pub degree: usize,
    pub t_lga_us: f64,
    pub t_competitor_us: f64,
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub rows: Vec<ResultRow>,
    pub trials: Vec<Trial>,
}

/// Random stream for one `(degree, trial)` cell. Cells are independent, so
/// the polynomial sequence does not depend on execution order.
pub fn trial_rng(seed: u64, degree: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((degree as u64) << 32) | trial as u64);
    rng
}

/// Monic real polynomial of degree `n` with roots sampled in
/// `[-1, b_param] x [-1, 1]`.
pub fn random_polynomial<R: Rng + ?Sized>(
    n: usize,
    b_param: f64,
    rng: &mut R,
    mode: RootSampling,
) -> Result<Polynomial> {
    if n < 1 {
        return Err(Error::InvalidParameter("degree must be >= 1".into()));
    }
    if !(b_param > -1.0 && b_param <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "b_param must lie in (-1, 1], got {b_param}"
        )));
    }
    let mut roots = Vec::with_capacity(n);
    if mode == RootSampling::Complex {
        for _ in 0..n / 2 {
            let re = rng.random_range(-1.0..=b_param);
            // random() is in [0, 1)
            let im = 1.0 - rng.random::<f64>();
            roots.push(Complex64::new(re, im));
            roots.push(Complex64::new(re, -im));
        }
    }
    while roots.len() < n {
        roots.push(Complex64::new(rng.random_range(-1.0..=b_param), 0.0));
    }
    Polynomial::from_roots(&roots)
}

fn timed<T>(run: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = run();
    (out, start.elapsed().as_secs_f64() * 1e6)
}

/// Times the leap minimizer and the configured competitor on `p` over
/// `[-1, 1]`. Failures are recorded, not propagated.
pub fn run_trial(p: &Polynomial, cfg: &ExperimentConfig) -> (TrialRecord, TrialRecord) {
    let iv = Interval::unit();
    let n = p.degree();
    let (out, us) = timed(|| lga_poly_min(p, iv, cfg.h));
    let lga = TrialRecord::new(n, Algo::Lga, us, out);

    let f = |x: f64| p.eval(x);
    let competitor = match cfg.competitor {
        Competitor::Bfs => {
            let grid = cfg.bfs_grid();
            let (out, us) = timed(|| bfs_min(f, iv, grid));
            TrialRecord::new(n, Algo::Bfs, us, out)
        }
        Competitor::Zdm => {
            let (out, us) = timed(|| zdm_min(p, iv));
            TrialRecord::new(n, Algo::Zdm, us, out)
        }
        Competitor::Psm => {
            let ((out, lip), us) = timed(|| {
                match estimate_lipschitz(f, iv, LIPSCHITZ_GRID) {
                    Ok(l) => {
                        let l = l.max(LIPSCHITZ_FLOOR);
                        (psm_min(f, l, iv, cfg.psm_tol, cfg.psm_max_iter), Some(l))
                    }
                    Err(e) => (Err(e), None),
                }
            });
            let mut rec = TrialRecord::new(n, Algo::Psm, us, out);
            rec.lipschitz = lip;
            rec
        }
    };
    (lga, competitor)
}

fn run_degree(cfg: &ExperimentConfig, degree: usize) -> Result<Vec<Trial>> {
    (0..cfg.trials)
        .map(|index| {
            let mut rng = trial_rng(cfg.seed, degree, index);
            let poly = random_polynomial(degree, cfg.b_param, &mut rng, cfg.roots)?;
            let (lga, competitor) = run_trial(&poly, cfg);
            Ok(Trial {
                degree,
                index,
                poly,
                lga,
                competitor,
            })
        })
        .collect()
}

fn summarize(degree: usize, trials: &[Trial]) -> ResultRow {
    let kept: Vec<&Trial> = trials.iter().filter(|t| !t.is_excluded()).collect();
    let mean = |pick: fn(&Trial) -> f64| {
        if kept.is_empty() {
            f64::NAN
        } else {
            kept.iter().map(|t| pick(t)).sum::<f64>() / kept.len() as f64
        }
    };
    ResultRow {
        degree,
        t_lga_us: mean(|t| t.lga.elapsed_us),
        t_competitor_us: mean(|t| t.competitor.elapsed_us),
        excluded: trials.len() - kept.len(),
    }
}

/// Runs every degree of `cfg` and returns the per-degree means together with
/// all trial records, in the order of `cfg.degrees`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Experiment> {
    cfg.validate()?;
    let per_degree: Vec<Vec<Trial>> = if cfg.parallel {
        cfg.degrees
            .par_iter()
            .map(|&d| run_degree(cfg, d))
            .collect::<Result<_>>()?
    } else {
        cfg.degrees
            .iter()
            .map(|&d| run_degree(cfg, d))
            .collect::<Result<_>>()?
    };
    let rows = cfg
        .degrees
        .iter()
        .zip(&per_degree)
        .map(|(&d, trials)| summarize(d, trials))
        .collect();
    Ok(Experiment {
        rows,
        trials: per_degree.into_iter().flatten().collect(),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `degree,t_lga_us,t_competitor_us,excluded` with 3-decimal means.
pub fn write_results(rows: &[ResultRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(RESULTS_HEADER).map_err(csv_err(path))?;
    for r in rows {
        w.write_record([
            r.degree.to_string(),
            format!("{:.3}", r.t_lga_us),
            format!("{:.3}", r.t_competitor_us),
            r.excluded.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Parses a file written by [`write_results`].
pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let mut rd = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = rd.headers().map_err(csv_err(path))?;
    if header.iter().ne(RESULTS_HEADER) {
        return Err(Error::Parse(format!(
            "{}: unexpected header {:?}",
            path.display(),
            header
        )));
    }
    let field_err = |line: usize, what: &str| {
        Error::Parse(format!("{}: line {line}: bad {what}", path.display()))
    };
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let line = i + 2;
        let get = |k: usize| rec.get(k).ok_or_else(|| field_err(line, RESULTS_HEADER[k]));
        rows.push(ResultRow {
            degree: get(0)?.parse().map_err(|_| field_err(line, "degree"))?,
            t_lga_us: get(1)?.parse().map_err(|_| field_err(line, "t_lga_us"))?,
            t_competitor_us: get(2)?.parse().map_err(|_| field_err(line, "t_competitor_us"))?,
            excluded: get(3)?.parse().map_err(|_| field_err(line, "excluded"))?,
        });
    }
    Ok(rows)
}

/// Writes `degree time` series, one block per algorithm, separated by two
/// blank lines (gnuplot `index` layout).
pub fn emit_plot_data(rows: &[ResultRow], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let mut body = String::new();
    for (label, pick) in [
        ("lga", (|r: &ResultRow| r.t_lga_us) as fn(&ResultRow) -> f64),
        ("competitor", |r: &ResultRow| r.t_competitor_us),
    ] {
        if label != "lga" {
            body.push_str("\n\n");
        }
        body.push_str(&format!("# {label}\n"));
        for r in rows {
            body.push_str(&format!("{} {:.3}\n", r.degree, pick(r)));
        }
    }
    w.write_all(body.as_bytes()).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

/// Per-trial CSV: polynomial, both argmins and values, timings and status.
/// Everything except the timing columns is a pure function of seed and
/// config.
pub fn write_trials(trials: &[Trial], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record([
        "degree",
        "trial",
        "poly",
        "lga_x",
        "lga_value",
        "competitor",
        "competitor_x",
        "competitor_value",
        "status",
        "t_lga_us",
        "t_competitor_us",
    ])
    .map_err(csv_err(path))?;
    for t in trials {
        w.write_record([
            t.degree.to_string(),
            t.index.to_string(),
            t.poly.to_string(),
            format!("{:e}", t.lga.x_arg),
            format!("{:e}", t.lga.value),
            t.competitor.algo.to_string(),
            format!("{:e}", t.competitor.x_arg),
            format!("{:e}", t.competitor.value),
            if t.lga.is_flagged() {
                format!("lga {}", t.lga.status)
            } else {
                t.competitor.status.to_string()
            },
            format!("{:.3}", t.lga.elapsed_us),
            format!("{:.3}", t.competitor.elapsed_us),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}
