//! Integrate x'(t) = x(t - 1)/(t + 1) from x = t + 2 on [-1, 0].
//!
//! The exact solution stays t + 2, so the printed errors show the
//! integrator's accuracy.
//!
//! Run with `cargo run --release --example simulate`.

use rfde::expr::Expression;
use rfde::integrator::{self, ProblemSetup};
use rfde::measure::StieltjesKernel;

fn main() -> rfde::Result<()> {
    let kernel = StieltjesKernel::new(1.0)?.atom("1", "1/(t+2-1)")?;
    let initial = Expression::parse("t+2").expect("valid expression");
    let setup = ProblemSetup::new(kernel, 0.0, 100.0, initial, 1.0 / 16.0)?;
    let x = integrator::solve(&setup)?;

    println!("{} knots on [{}, {}]", x.knots().len(), x.start(), x.end());
    for t in [0.5, 10.0, 33.3, 100.0] {
        let v = x.eval(t)?;
        println!("x({t:>5}) = {:.12}   error {:.2e}", v.re, (v.re - (t + 2.0)).abs());
    }
    Ok(())
}
