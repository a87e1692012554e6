//! `leapgrad` command-line front end.
//!
//! Exit codes: 0 on success, 2 for usage errors (bad flags, unparsable input,
//! invalid parameters), 3 for numerical failures, 1 for I/O errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analytic::{analytic_min, CatalogFunction};
use crate::bench::{
    emit_plot_data, run_experiment, write_results, write_trials, Competitor, ExperimentConfig,
    RootSampling,
};
use crate::competitors::{bfs_min, estimate_lipschitz, psm_min, zdm_min};
use crate::error::{Error, Result};
use crate::lga::{lga_generic, lga_poly_min, Interval, LgaConfig, MinResult};
use crate::poly::Polynomial;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "leapgrad", version, about = "Univariate global minimization with evolutionary leaps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimize a polynomial on an interval.
    Minimize(MinimizeArgs),
    /// Time the leap minimizer against a baseline on random polynomials.
    Bench(BenchArgs),
    /// Print all complex roots of a polynomial.
    Roots(PolyInput),
    /// Minimize a catalog analytic function on [-1, 1].
    Analytic(AnalyticArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct PolyInput {
    /// Ascending coefficients, e.g. "-1 0 1" for x^2 - 1.
    #[arg(long, allow_hyphen_values = true)]
    pub poly: Option<String>,
    /// File holding ascending coefficients separated by whitespace.
    #[arg(long)]
    pub poly_file: Option<PathBuf>,
}

impl PolyInput {
    fn load(&self) -> Result<Polynomial> {
        match (&self.poly, &self.poly_file) {
            (Some(text), _) => text.parse(),
            (None, Some(path)) => std::fs::read_to_string(path)
                .map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?
                .parse(),
            (None, None) => Err(Error::InvalidParameter("--poly or --poly-file is required".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Lga,
    LgaGeneric,
    Bfs,
    Zdm,
    Psm,
}

#[derive(Debug, Args)]
pub struct MinimizeArgs {
    #[command(flatten)]
    pub input: PolyInput,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub b: f64,
    /// Precision step.
    #[arg(long, default_value_t = 1e-4)]
    pub h: f64,
    #[arg(long, value_enum, default_value_t = AlgoArg::Lga)]
    pub algo: AlgoArg,
    /// BFS grid intervals (default ceil((b - a) / h)).
    #[arg(long)]
    pub n: Option<usize>,
    /// PSM stopping gap.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// PSM Lipschitz constant (default: grid estimate).
    #[arg(long)]
    pub lipschitz: Option<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CompetitorArg {
    Bfs,
    Zdm,
    Psm,
}

impl From<CompetitorArg> for Competitor {
    fn from(c: CompetitorArg) -> Self {
        match c {
            CompetitorArg::Bfs => Competitor::Bfs,
            CompetitorArg::Zdm => Competitor::Zdm,
            CompetitorArg::Psm => Competitor::Psm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RootsArg {
    Complex,
    Real,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated degrees.
    #[arg(long, value_delimiter = ',', default_value = "3,4,5,6,7,8,9,10,11,12")]
    pub degrees: Vec<usize>,
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    /// Right edge of the root rectangle, in (-1, 1].
    #[arg(long = "b", default_value_t = 1.0, allow_negative_numbers = true)]
    pub b_param: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub h: f64,
    #[arg(long, value_enum, default_value_t = CompetitorArg::Bfs)]
    pub competitor: CompetitorArg,
    #[arg(long, env = "LEAPGRAD_SEED", default_value_t = 0)]
    pub seed: u64,
    /// BFS grid intervals (default ceil(2 / h)).
    #[arg(long)]
    pub bfs_points: Option<usize>,
    #[arg(long, value_enum, default_value_t = RootsArg::Complex)]
    pub roots: RootsArg,
    /// Results CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Two-series plot data file.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Per-trial CSV with polynomials and values.
    #[arg(long)]
    pub records: Option<PathBuf>,
    /// Run degrees in parallel workers.
    #[arg(long)]
    pub parallel: bool,
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    /// Catalog function: exp, sin3x or rational.
    #[arg(long = "fn")]
    pub function: String,
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    /// Precision step of the polynomial minimizer.
    #[arg(long, default_value_t = 1e-4)]
    pub walk_step: f64,
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } | Error::Csv { .. } => EXIT_IO,
        Error::DeflateConstant
        | Error::RootsNotConverged { .. }
        | Error::NonFinite { .. }
        | Error::OrderNotFound { .. }
        | Error::StepSelectionFailed { .. } => EXIT_NUMERIC,
        _ => EXIT_USAGE,
    }
}

fn fixed(v: f64) -> String {
    let s = format!("{v:.6}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|c| c == b'0' || c == b'.') => rest.to_string(),
        _ => s,
    }
}

fn print_min(out: &mut dyn Write, r: &MinResult) -> std::io::Result<()> {
    writeln!(out, "x={}", fixed(r.x_arg))?;
    writeln!(out, "value={}", fixed(r.value))?;
    writeln!(out, "leaps={}", r.leaps)?;
    writeln!(out, "evals={}", r.evals)?;
    if !r.converged {
        writeln!(out, "converged=false")?;
    }
    Ok(())
}

fn io(e: std::io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

fn cmd_minimize(args: &MinimizeArgs, out: &mut dyn Write) -> Result<()> {
    let p = args.input.load()?;
    let iv = Interval::new(args.a, args.b)?;
    if !(args.h > 0.0 && args.h.is_finite()) {
        return Err(Error::InvalidStep(args.h));
    }
    let f = |x: f64| p.eval(x);
    let r = match args.algo {
        AlgoArg::Lga => lga_poly_min(&p, iv, args.h)?,
        AlgoArg::LgaGeneric => lga_generic(f, iv, &LgaConfig::new(args.h))?,
        AlgoArg::Bfs => {
            let n = args.n.unwrap_or_else(|| (iv.width() / args.h).ceil().max(1.0) as usize);
            bfs_min(f, iv, n)?
        }
        AlgoArg::Zdm => zdm_min(&p, iv)?,
        AlgoArg::Psm => {
            let l = match args.lipschitz {
                Some(l) => l,
                None => estimate_lipschitz(f, iv, crate::bench::LIPSCHITZ_GRID)?
                    .max(crate::bench::LIPSCHITZ_FLOOR),
            };
            psm_min(f, l, iv, args.tol, args.max_iter)?
        }
    };
    print_min(out, &r).map_err(io)
}

fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = ExperimentConfig {
        degrees: args.degrees.clone(),
        trials: args.trials,
        b_param: args.b_param,
        h: args.h,
        seed: args.seed,
        competitor: args.competitor.into(),
        bfs_points: args.bfs_points,
        roots: match args.roots {
            RootsArg::Complex => RootSampling::Complex,
            RootsArg::Real => RootSampling::Real,
        },
        parallel: args.parallel,
        ..ExperimentConfig::default()
    };
    cfg.validate()?;
    let exp = run_experiment(&cfg)?;
    if let Some(path) = &args.out {
        write_results(&exp.rows, path)?;
    }
    if let Some(path) = &args.plot {
        emit_plot_data(&exp.rows, path)?;
    }
    if let Some(path) = &args.records {
        write_trials(&exp.trials, path)?;
    }
    let comp = format!("t_{}_us", cfg.competitor);
    writeln!(out, "{:>6} {:>14} {:>14} {:>8} {:>8}", "degree", "t_lga_us", comp, "ratio", "excluded")
        .map_err(io)?;
    for r in &exp.rows {
        writeln!(
            out,
            "{:>6} {:>14.3} {:>14.3} {:>8.2} {:>8}",
            r.degree,
            r.t_lga_us,
            r.t_competitor_us,
            r.t_competitor_us / r.t_lga_us,
            r.excluded
        )
        .map_err(io)?;
    }
    Ok(())
}

fn cmd_roots(input: &PolyInput, out: &mut dyn Write) -> Result<()> {
    let p = input.load()?.trim();
    for z in p.roots()? {
        writeln!(out, "{} {}", z.re, z.im).map_err(io)?;
    }
    Ok(())
}

fn cmd_analytic(args: &AnalyticArgs, out: &mut dyn Write) -> Result<()> {
    let c: CatalogFunction = args.function.parse()?;
    let r = analytic_min(|x| c.eval(x), &c.bounds(), args.eps, args.walk_step)?;
    writeln!(out, "x={}", fixed(r.result.x_arg)).map_err(io)?;
    writeln!(out, "value={}", fixed(r.result.value)).map_err(io)?;
    writeln!(out, "n={}", r.surrogate.order).map_err(io)?;
    writeln!(out, "h={:e}", r.surrogate.step).map_err(io)?;
    writeln!(out, "eps={:e}", r.epsilon()).map_err(io)?;
    writeln!(out, "stabilized={}", r.step.stabilized).map_err(io)?;
    Ok(())
}

/// Runs one parsed invocation.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Minimize(a) => cmd_minimize(a, out),
        Command::Bench(a) => cmd_bench(a, out),
        Command::Roots(a) => cmd_roots(a, out),
        Command::Analytic(a) => cmd_analytic(a, out),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.exit_code() == 0 {
                let _ = write!(out, "{}", e.render());
                return EXIT_OK;
            }
            let _ = write!(err, "{}", e.render());
            return EXIT_USAGE;
        }
    };
    match execute(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
