//! Evaluate the decay criterion V(t) and its verdict for a stable and an
//! unstable autonomous equation and for the distributed-delay example.
//!
//! Run with `cargo run --release --example criterion_scan`.

use rfde::charsolve::LambdaFunction;
use rfde::criterion::{criterion_value, scan, DEFAULT_MARGIN};
use rfde::measure::StieltjesKernel;

fn main() -> rfde::Result<()> {
    let cases = [("0.1", "0.09127652716086226"), ("3", "1.04990889496404")];
    for (b, root) in cases {
        let kernel = StieltjesKernel::new(1.0)?.atom("1", b)?;
        let lam = LambdaFunction::parse_closed_form(root, -1.0, 10.0)?;
        let rep = scan(&kernel, &lam, (0.0, 10.0), 200, DEFAULT_MARGIN)?;
        println!("x' = {b} x(t-1): {}  exit status {}", rep.summary(), rep.verdict.exit_code());
    }

    let kernel = StieltjesKernel::new(1.0)?.density("1/(t-theta)", 0.0, 1.0)?;
    let lam = LambdaFunction::parse_closed_form("1/t", 1.0, 100.0)?;
    for t in [10.0, 50.0, 100.0] {
        println!("distributed delay: V({t}) = {:.15} (1/(2t) = {:.15})", criterion_value(&kernel, &lam, t)?, 0.5 / t);
    }
    println!("{}", scan(&kernel, &lam, (2.0, 100.0), 200, DEFAULT_MARGIN)?.summary());
    Ok(())
}
