//! Solve the characteristic equation of x'(t) = 0.1 x(t - 1) by Picard
//! iteration and compare with the constant root W(0.1).
//!
//! Run with `cargo run --release --example fixed_point`.

use num_complex::Complex64;
use rfde::charsolve::{solve_fixed_point, FixedPointOptions, LambdaFunction};
use rfde::measure::StieltjesKernel;

/// Real root of w e^w = b by bisection.
fn lambert_w(b: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, b.max(1.0));
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if mid * mid.exp() < b {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn main() -> rfde::Result<()> {
    let kernel = StieltjesKernel::new(1.0)?.atom("1", "0.1")?;
    let guess = LambdaFunction::from_grid(vec![-1.0, 0.0], vec![Complex64::new(0.0, 0.0); 2])?;
    let opts = FixedPointOptions { tol: 1e-12, ..FixedPointOptions::new(200.0, 0.125) };
    let sol = solve_fixed_point(&kernel, &guess, 0.0, &opts)?;

    let w = lambert_w(0.1);
    println!("converged in {} sweeps, residual {:.3e}", sol.iterations, sol.residual);
    for t in [0.0, 1.0, 5.0, 20.0, 200.0] {
        let v = sol.lambda.value(t)?.re;
        println!("λ({t:>5}) = {v:.15}   |λ - W(0.1)| = {:.2e}", (v - w).abs());
    }
    Ok(())
}
