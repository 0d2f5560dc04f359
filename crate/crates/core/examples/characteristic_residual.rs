//! Check closed-form solutions λ of the characteristic equation.
//!
//! Run with `cargo run --release --example characteristic_residual`.

use rfde::charsolve::{self, LambdaFunction};
use rfde::measure::StieltjesKernel;

fn main() -> rfde::Result<()> {
    let variable = StieltjesKernel::new(1.0)?.atom("1", "1/(t+2-1)")?;
    let lam = LambdaFunction::parse_closed_form("1/(t+2)", -1.0, 100.0)?;
    let res = charsolve::residual(&variable, &lam, &charsolve::uniform(0.0, 100.0, 1.0 / 16.0))?;
    println!("variable delay,    λ = 1/(t+2): residual {res:.3e} on [0, 100]");

    let distributed = StieltjesKernel::new(1.0)?.density("1/(t-theta)", 0.0, 1.0)?;
    let lam = LambdaFunction::parse_closed_form("1/t", 1.0, 100.0)?;
    let res = charsolve::residual(&distributed, &lam, &charsolve::uniform(2.0, 100.0, 1.0 / 16.0))?;
    println!("distributed delay, λ = 1/t:     residual {res:.3e} on [2, 100]");

    // A wrong candidate is visibly wrong.
    let lam = LambdaFunction::parse_closed_form("2/t", 1.0, 100.0)?;
    let res = charsolve::residual(&distributed, &lam, &charsolve::uniform(2.0, 100.0, 1.0 / 16.0))?;
    println!("distributed delay, λ = 2/t:     residual {res:.3e}");
    Ok(())
}
