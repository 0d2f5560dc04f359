//! Command-line front end.
//!
//! Every command reads a TOML problem file (see [`crate::problem`]) and
//! writes CSV/text files into the output directory:
//!
//! | command     | files                                  |
//! |-------------|----------------------------------------|
//! | `simulate`  | `trajectory.csv`                       |
//! | `lambda`    | `lambda.csv`                           |
//! | `verify`    | `criterion.csv`                        |
//! | `asymptote` | `asymptotics.txt`, `asymptotics.csv`   |
//! | `report`    | all of the above                       |
//!
//! Exit status is 1 on any error. `verify` and `report` return the
//! criterion verdict: 0 holds, 2 fails, 3 inconclusive.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::asymptotics::{self, AsymptoticsReport};
use crate::criterion::{self, CriterionReport};
use crate::error::{Error, Result};
use crate::integrator;
use crate::output::fmt_f64;
use crate::problem::{LambdaOutcome, Problem, ProblemSpec};
use crate::trajectory::Trajectory;

#[derive(Debug, Parser)]
#[command(name = "rfde", version, about = "Generalized characteristic equations and asymptotics for linear retarded FDEs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Problem file (TOML).
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    /// Output directory; overrides `output` in the spec, defaults to `.`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print the normalized problem file and exit.
    #[arg(long, global = true)]
    pub print_spec: bool,
    /// Number of criterion samples.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Criterion window as `a,b`.
    #[arg(long, global = true, value_parser = parse_window)]
    pub window: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Integrate the equation and write the trajectory.
    Simulate,
    /// Obtain λ and report its residual.
    Lambda,
    /// Evaluate the decay criterion; exit status encodes the verdict.
    Verify,
    /// Measure convergence of x(t) e^{-∫λ}.
    Asymptote,
    /// Run every stage.
    Report,
}

fn parse_window(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected `a,b`")?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if !(a <= b) {
        return Err(format!("empty window [{a}, {b}]"));
    }
    Ok((a, b))
}

/// Parses arguments, runs, and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    match run(&cli, &mut stdout.lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn run(cli: &Cli, out: &mut impl Write) -> Result<i32> {
    let path = cli.spec.as_ref().ok_or_else(|| Error::Spec("--spec <path> is required".into()))?;
    let mut spec = ProblemSpec::load(path)?;
    if let Some(n) = cli.samples {
        spec.criterion.samples = n;
    }
    if let Some((a, b)) = cli.window {
        spec.criterion.window = Some([a, b]);
    }
    if cli.print_spec {
        write!(out, "{}", spec.to_toml_string()?)?;
        return Ok(0);
    }
    let dir = cli
        .out
        .clone()
        .or_else(|| spec.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let problem = Problem::from_spec(spec)?;
    std::fs::create_dir_all(&dir)?;
    match cli.command {
        Command::Simulate => {
            cmd_simulate(&problem, &dir, out)?;
            Ok(0)
        }
        Command::Lambda => {
            cmd_lambda(&problem, &dir, out)?;
            Ok(0)
        }
        Command::Verify => {
            let lam = problem.solve_lambda()?;
            Ok(cmd_verify(&problem, &lam, &dir, out)?.verdict.exit_code())
        }
        Command::Asymptote => {
            let lam = problem.solve_lambda()?;
            let x = integrator::solve(&problem.setup)?;
            cmd_asymptote(&problem, &x, &lam, &dir, out)?;
            Ok(0)
        }
        Command::Report => {
            let x = cmd_simulate(&problem, &dir, out)?;
            let lam = cmd_lambda(&problem, &dir, out)?;
            let report = cmd_verify(&problem, &lam, &dir, out)?;
            cmd_asymptote(&problem, &x, &lam, &dir, out)?;
            Ok(report.verdict.exit_code())
        }
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Integrates and writes `trajectory.csv`.
pub fn cmd_simulate(problem: &Problem, dir: &Path, out: &mut impl Write) -> Result<Trajectory> {
    let x = integrator::solve(&problem.setup)?;
    let mut w = create(dir, "trajectory.csv")?;
    x.write_csv(&mut w)?;
    w.flush()?;
    let last = x.values().last().unwrap();
    writeln!(out, "T={} x_re={} x_im={}", fmt_f64(x.end()), fmt_f64(last.re), fmt_f64(last.im))?;
    Ok(x)
}

/// Solves or certifies λ and writes `lambda.csv`.
pub fn cmd_lambda(problem: &Problem, dir: &Path, out: &mut impl Write) -> Result<LambdaOutcome> {
    let lam = problem.solve_lambda()?;
    let mut w = create(dir, "lambda.csv")?;
    lam.lambda.write_csv(&mut w, &lam.lambda.sample_times(problem.grid_step))?;
    w.flush()?;
    match lam.iterations {
        Some(n) => writeln!(out, "residual={} iterations={n}", fmt_f64(lam.residual))?,
        None => writeln!(out, "residual={} iterations=closed-form", fmt_f64(lam.residual))?,
    }
    Ok(lam)
}

/// Scans the criterion and writes `criterion.csv`.
pub fn cmd_verify(problem: &Problem, lam: &LambdaOutcome, dir: &Path, out: &mut impl Write) -> Result<CriterionReport> {
    let c = &problem.spec.criterion;
    let report = criterion::scan(problem.kernel(), &lam.lambda, problem.criterion_window(), c.samples, c.margin)?;
    let mut w = create(dir, "criterion.csv")?;
    report.write_csv(&mut w)?;
    w.flush()?;
    writeln!(out, "{}", report.summary())?;
    Ok(report)
}

/// μ = max V over the trajectory knots in [t₀, T].
pub fn criterion_supremum(problem: &Problem, x: &Trajectory, lam: &LambdaOutcome) -> Result<f64> {
    let mut mu = 0.0f64;
    for i in x.forward_indices() {
        mu = mu.max(criterion::criterion_value(problem.kernel(), &lam.lambda, x.knots()[i])?);
    }
    Ok(mu)
}

/// Transforms x, measures its limits and, when μ < 1, the decay envelope.
/// Writes `asymptotics.txt` and `asymptotics.csv`.
pub fn cmd_asymptote(
    problem: &Problem,
    x: &Trajectory,
    lam: &LambdaOutcome,
    dir: &Path,
    out: &mut impl Write,
) -> Result<AsymptoticsReport> {
    let y = asymptotics::transform_y(x, &lam.lambda)?;
    let a = &problem.spec.asymptotics;
    let mut report = asymptotics::estimate_limits(&y, a.tail_fraction)?;
    let mu = criterion_supremum(problem, x, lam)?;
    if mu < 1.0 {
        report = report.with_envelope(asymptotics::check_envelope(&y, mu, problem.r(), a.slack)?);
    }
    let mut text = create(dir, "asymptotics.txt")?;
    report.write_text(&mut text)?;
    text.flush()?;
    let mut csv = create(dir, "asymptotics.csv")?;
    report.write_csv(&y, &mut csv)?;
    csv.flush()?;
    report.write_text(&mut *out)?;
    Ok(report)
}
