//! Follow x'(t) = ∫₀¹ x(t - θ)/(t - θ) dθ from x ≡ 1 and measure the limit of
//! y(t) = x(t) exp(-∫₂ᵗ λ) = 2 x(t)/t.
//!
//! Run with `cargo run --release --example asymptotic_limits`.

use rfde::asymptotics::{derivation_residual, estimate_limits, tail_stats, transform_y};
use rfde::charsolve::LambdaFunction;
use rfde::expr::Expression;
use rfde::integrator::{self, ProblemSetup};
use rfde::measure::StieltjesKernel;

fn main() -> rfde::Result<()> {
    let kernel = StieltjesKernel::new(1.0)?.density("1/(t-theta)", 0.0, 1.0)?;
    let setup = ProblemSetup::new(kernel.clone(), 2.0, 100.0, Expression::constant(1.0), 1.0 / 64.0)?;
    let x = integrator::solve(&setup)?;
    let lam = LambdaFunction::parse_closed_form("1/t", 1.0, 100.0)?;
    let y = transform_y(&x, &lam)?;

    let report = estimate_limits(&y, 0.25)?;
    report.write_text(std::io::stdout())?;
    for from in [51.0, 75.0] {
        let (var, der) = tail_stats(&y, from);
        println!("on [{from}, 100]: tail variation {var:.3e}, max |y'| {der:.3e}");
    }
    let worst = [3.5, 10.0, 40.0, 90.0]
        .iter()
        .map(|&t| derivation_residual(&kernel, &y, &lam, t).map(|v| v.norm()))
        .collect::<rfde::Result<Vec<_>>>()?;
    println!("derivative identity residuals: {worst:?}");
    Ok(())
}
