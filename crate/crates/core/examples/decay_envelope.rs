//! Check the geometric decay bound on y' for x'(t) = 0.1 x(t - 1), x ≡ 1.
//!
//! Run with `cargo run --release --example decay_envelope`.

use rfde::asymptotics::{check_envelope, transform_y, DEFAULT_SLACK};
use rfde::charsolve::LambdaFunction;
use rfde::expr::Expression;
use rfde::integrator::{self, ProblemSetup};
use rfde::measure::StieltjesKernel;

fn main() -> rfde::Result<()> {
    let mu = 0.09127652716086226;
    let kernel = StieltjesKernel::new(1.0)?.atom("1", "0.1")?;
    let setup = ProblemSetup::new(kernel, 0.0, 10.0, Expression::constant(1.0), 1.0 / 64.0)?;
    let x = integrator::solve(&setup)?;
    let lam = LambdaFunction::closed_form(Expression::constant(mu), -1.0, 10.0)?;
    let y = transform_y(&x, &lam)?;

    let env = check_envelope(&y, mu, 1.0, DEFAULT_SLACK)?;
    println!("M_x = {:.6e}, mu = {mu}, envelope holds: {}, worst ratio {:.3}", env.m_x, env.ok, env.worst_ratio);
    for t in [0.5, 2.0, 5.0, 10.0] {
        println!("t = {t:>4}: |y'| = {:.3e}  bound = {:.3e}", y.derivative(t)?.norm(), env.bound(0.0, t));
    }

    // A criterion value of 1 or more means the bound does not apply.
    println!("mu = 1.05 is refused: {}", check_envelope(&y, 1.05, 1.0, DEFAULT_SLACK).unwrap_err());
    Ok(())
}
