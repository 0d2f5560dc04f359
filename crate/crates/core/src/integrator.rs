//! Method of steps with classical RK4 for x'(t) = L(t)xₜ.
//!
//! Delayed values come from the Hermite dense output of the steps already
//! taken. An atom sitting at θ = 0 is the only term that reads the current
//! unknown; it is fed the RK stage value. Any other node whose delayed
//! time lands inside the step being taken (densities near θ = 0, variable
//! delays shorter than the stage offset) reads the previous interval's
//! cubic continued forward.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::measure::StieltjesKernel;
use crate::trajectory::Trajectory;

/// Relative tolerance used when snapping step counts to integers.
const SNAP: f64 = 1e-9;

/// Everything needed to integrate one initial value problem.
#[derive(Debug, Clone)]
pub struct ProblemSetup {
    pub kernel: StieltjesKernel,
    pub t0: f64,
    pub horizon: f64,
    /// x(t) on [t₀ - r, t₀] as an expression in `t`.
    pub initial_data: Expression,
    pub step: f64,
}

impl ProblemSetup {
    pub fn new(kernel: StieltjesKernel, t0: f64, horizon: f64, initial_data: Expression, step: f64) -> Result<Self> {
        let setup = ProblemSetup { kernel, t0, horizon, initial_data, step };
        setup.validate()?;
        Ok(setup)
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.kernel.r();
        if !(self.t0.is_finite() && self.horizon.is_finite() && self.horizon > self.t0) {
            return Err(Error::InvalidSetup(format!("need t0 < T, got t0 = {}, T = {}", self.t0, self.horizon)));
        }
        if !(self.step > 0.0 && self.step <= r / 8.0 * (1.0 + SNAP)) {
            return Err(Error::InvalidSetup(format!(
                "step {} must lie in (0, r/8] = (0, {}]",
                self.step,
                r / 8.0
            )));
        }
        if self.initial_data.uses(crate::expr::Var::Theta) {
            return Err(Error::InvalidSetup("initial data may depend on t only".into()));
        }
        Ok(())
    }

    /// The step actually used: shrunk so that it divides r when every atom
    /// delay is constant, so that delay breakpoints fall on knots.
    pub fn effective_step(&self) -> f64 {
        let r = self.kernel.r();
        if self.kernel.has_constant_delays() {
            r / steps_for(r, self.step) as f64
        } else {
            self.step
        }
    }

    pub fn step_count(&self) -> usize {
        steps_for(self.horizon - self.t0, self.effective_step())
    }

    /// T rounded up to a whole number of steps.
    pub fn effective_horizon(&self) -> f64 {
        self.t0 + self.step_count() as f64 * self.effective_step()
    }
}

fn steps_for(length: f64, step: f64) -> usize {
    ((length / step) * (1.0 - SNAP)).ceil().max(1.0) as usize
}

/// Integrates the problem from t₀ to the effective horizon.
pub fn solve(setup: &ProblemSetup) -> Result<Trajectory> {
    setup.validate()?;
    let kernel = &setup.kernel;
    let r = kernel.r();
    let t0 = setup.t0;
    let h = setup.effective_step();
    let steps = setup.step_count();

    let history_intervals = steps_for(r, h);
    let dh = r / history_intervals as f64;
    let mut knots: Vec<f64> = (0..history_intervals).map(|i| t0 - r + i as f64 * dh).collect();
    knots.push(t0);
    let mut values = Vec::with_capacity(knots.len());
    let mut derivs = Vec::with_capacity(knots.len());
    for &s in &knots {
        values.push(setup.initial_data.evaluate(s, None).map_err(Error::eval(s))?);
        derivs.push(initial_slope(&setup.initial_data, s, t0 - r, t0)?);
    }
    let history_slope = *derivs.last().unwrap();
    let mut tr = Trajectory::from_knots(t0, knots, values, derivs)?.with_left_derivative_at_t0(history_slope);

    let x0 = tr.values()[tr.t0_index()];
    let d0 = rhs(kernel, &tr, t0, x0)?;
    tr.set_last_derivative(d0);

    for n in 0..steps {
        let tn = t0 + n as f64 * h;
        let tn1 = t0 + (n + 1) as f64 * h;
        let h = tn1 - tn;
        let x = *tr.values().last().unwrap();
        let k1 = *tr.derivs().last().unwrap();
        let k2 = rhs(kernel, &tr, tn + 0.5 * h, x + k1 * (0.5 * h))?;
        let k3 = rhs(kernel, &tr, tn + 0.5 * h, x + k2 * (0.5 * h))?;
        let k4 = rhs(kernel, &tr, tn1, x + k3 * h)?;
        let next = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if !(next.re.is_finite() && next.im.is_finite()) {
            return Err(Error::Divergence { t: tn1 });
        }
        // k4 stands in for x'(t_{n+1}) until the true slope is known; it
        // only matters for delays shorter than one step.
        tr.push(tn1, next, k4);
        let slope = rhs(kernel, &tr, tn1, next)?;
        if !(slope.re.is_finite() && slope.im.is_finite()) {
            return Err(Error::Divergence { t: tn1 });
        }
        tr.set_last_derivative(slope);
    }
    Ok(tr)
}

/// L(t)xₜ where x(t) itself is `current` and earlier values come from the
/// dense output, continued past its end when a stage looks ahead.
fn rhs(kernel: &StieltjesKernel, tr: &Trajectory, t: f64, current: Complex64) -> Result<Complex64> {
    let end = tr.end();
    let mut acc = Complex64::new(0.0, 0.0);
    kernel.for_each_point(t, |p| {
        let value = if p.atom && p.theta == 0.0 {
            current
        } else {
            let u = t - p.theta;
            if u <= end {
                tr.eval(u)?
            } else {
                tr.extrapolate(u)
            }
        };
        acc += p.weight * value;
        Ok(())
    })?;
    Ok(acc)
}

/// Slope of the initial data at s by a fourth-order central difference,
/// falling back to a one-sided second-order difference pointing into
/// [lo, hi] when the expression cannot be evaluated outside it.
fn initial_slope(data: &Expression, s: f64, lo: f64, hi: f64) -> Result<Complex64> {
    let d = 1e-3 * s.abs().max(1.0);
    let f = |u: f64| data.evaluate(u, None).map_err(Error::eval(u));
    let central = || -> Result<Complex64> {
        Ok((f(s - 2.0 * d)? - f(s - d)? * 8.0 + f(s + d)? * 8.0 - f(s + 2.0 * d)?) / (12.0 * d))
    };
    if let Ok(v) = central() {
        return Ok(v);
    }
    let d = d.min(0.25 * (hi - lo));
    let dir = if s - lo > hi - s { -1.0 } else { 1.0 };
    let step = dir * d;
    Ok((f(s)? * -3.0 + f(s + step)? * 4.0 - f(s + 2.0 * step)?) / (2.0 * step))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn e(src: &str) -> Expression {
        Expression::parse(src).unwrap()
    }

    #[test]
    fn instantaneous_atom_reduces_to_ode() {
        let k = StieltjesKernel::new(1.0).unwrap().atom("0", "-1").unwrap();
        let setup = ProblemSetup::new(k, 0.0, 1.0, e("1"), 1.0 / 64.0).unwrap();
        let tr = solve(&setup).unwrap();
        let x1 = tr.eval(1.0).unwrap();
        assert!((x1 - c((-1.0f64).exp())).norm() < 1e-8);
    }

    #[test]
    fn variable_delay_example_linear_solution() {
        // x' = x(t-1)/(t+2-1) with x = t+2 on [-1, 0] keeps x = t+2.
        let k = StieltjesKernel::new(1.0).unwrap().atom("1", "1/(t+2-1)").unwrap();
        let setup = ProblemSetup::new(k, 0.0, 10.0, e("t+2"), 1.0 / 16.0).unwrap();
        let tr = solve(&setup).unwrap();
        for (&s, x) in tr.knots().iter().zip(tr.values()) {
            assert!((x - c(s + 2.0)).norm() < 1e-9);
        }
        for i in 0..200 {
            let s = i as f64 * 0.05;
            assert!((tr.eval(s).unwrap() - c(s + 2.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn zero_kernel_is_constant() {
        let k = StieltjesKernel::new(1.0).unwrap();
        let setup = ProblemSetup::new(k, 0.0, 5.0, e("3"), 0.125).unwrap();
        let tr = solve(&setup).unwrap();
        assert!(tr.forward_indices().all(|i| tr.values()[i] == c(3.0)));
    }

    #[test]
    fn step_snaps_to_divide_constant_delay() {
        let k = StieltjesKernel::new(1.0).unwrap().atom("1", "0.5").unwrap();
        let setup = ProblemSetup::new(k, 0.0, 1.05, e("1"), 0.1).unwrap();
        assert_eq!(setup.effective_step(), 0.1);
        assert_eq!(setup.step_count(), 11);
        let k = StieltjesKernel::new(1.0).unwrap().atom("1", "0.5").unwrap();
        let setup = ProblemSetup::new(k, 0.0, 1.0, e("1"), 0.12).unwrap();
        assert_eq!(setup.effective_step(), 0.1111111111111111);
        assert_eq!(setup.effective_horizon(), 1.0);
    }

    #[test]
    fn rejects_bad_setups() {
        let k = || StieltjesKernel::new(1.0).unwrap();
        assert!(ProblemSetup::new(k(), 0.0, 1.0, e("1"), 0.2).is_err());
        assert!(ProblemSetup::new(k(), 1.0, 1.0, e("1"), 0.1).is_err());
        assert!(ProblemSetup::new(k(), 0.0, 1.0, e("theta"), 0.1).is_err());
        assert!(ProblemSetup::new(k(), 0.0, 1.0, e("1"), 0.0).is_err());
    }

    #[test]
    fn delay_out_of_range_surfaces() {
        let k = StieltjesKernel::new(1.0).unwrap().atom("t", "1").unwrap();
        let setup = ProblemSetup::new(k, 0.0, 2.0, e("1"), 0.125).unwrap();
        assert!(matches!(solve(&setup), Err(Error::DelayOutOfRange { .. })));
    }

    #[test]
    fn blow_up_is_reported() {
        let k = StieltjesKernel::new(1.0).unwrap().atom("0", "1e300").unwrap();
        let setup = ProblemSetup::new(k, 0.0, 1.0, e("1"), 0.125).unwrap();
        assert!(matches!(solve(&setup), Err(Error::Divergence { .. })));
    }

    #[test]
    fn history_slope_kept_for_interpolation() {
        let k = StieltjesKernel::new(1.0).unwrap().atom("1", "0.1").unwrap();
        let setup = ProblemSetup::new(k, 0.0, 3.0, e("1"), 0.125).unwrap();
        let tr = solve(&setup).unwrap();
        assert_eq!(tr.left_derivative_at_t0(), Some(c(0.0)));
        assert!((tr.derivative(0.0).unwrap() - c(0.1)).norm() < 1e-15);
        assert_eq!(tr.eval(-0.0625).unwrap(), c(1.0));
        // x = 1 + 0.1 t on [0, 1]
        assert!((tr.eval(0.7).unwrap() - c(1.07)).norm() < 1e-13);
    }

    #[test]
    fn small_variable_delay_looks_ahead() {
        // x'(t) = -x(t - τ(t)) with τ tiny: close to x' = -x.
        let k = StieltjesKernel::new(1.0).unwrap().atom("1e-6*(1+sin(t)^2)", "-1").unwrap();
        let setup = ProblemSetup::new(k, 0.0, 2.0, e("exp(-t)"), 1.0 / 32.0).unwrap();
        let tr = solve(&setup).unwrap();
        assert!((tr.eval(2.0).unwrap() - c((-2.0f64).exp())).norm() < 1e-5);
    }
}
