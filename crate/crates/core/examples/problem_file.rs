//! Load a TOML problem file and run every stage, writing the CSV outputs.
//!
//! Run with `cargo run --release --example problem_file -- [path.toml] [out_dir]`.
//! Defaults to the bundled distributed-delay problem.

use std::path::PathBuf;

use rfde::cli::{cmd_asymptote, cmd_lambda, cmd_simulate, cmd_verify};
use rfde::Problem;

fn main() -> rfde::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("problems/distributed_delay.toml"));
    let dir = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("rfde-example"));

    let problem = Problem::load(&path)?;
    std::fs::create_dir_all(&dir)?;
    let mut out = std::io::stdout();
    let x = cmd_simulate(&problem, &dir, &mut out)?;
    let lam = cmd_lambda(&problem, &dir, &mut out)?;
    let verdict = cmd_verify(&problem, &lam, &dir, &mut out)?.verdict;
    cmd_asymptote(&problem, &x, &lam, &dir, &mut out)?;
    println!("outputs in {}; verdict {verdict}", dir.display());
    Ok(())
}
