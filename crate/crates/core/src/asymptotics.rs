//! Long-time behaviour of y(t) = x(t) exp(-∫_{t₀}^t λ(s) ds).
//!
//! When the criterion supremum μ is below 1, y converges, y' → 0, and
//! |y'(t)| ≤ M_x μ^{(t-t₀)/r - 1} where M_x = max |y'| over [t₀, t₀ + r].
//! The functions here measure each of those statements on a computed
//! trajectory.

use std::io::Write;

use num_complex::Complex64;

use crate::charsolve::LambdaFunction;
use crate::error::{Error, Result};
use crate::measure::StieltjesKernel;
use crate::output::fmt_f64;
use crate::trajectory::Trajectory;

pub const DEFAULT_SLACK: f64 = 0.1;
pub const DEFAULT_TAIL_FRACTION: f64 = 0.25;

/// y = x e^{-(Λ(t) - Λ(t₀))} and y' = (x' - λx) e^{-(Λ(t) - Λ(t₀))} at
/// every knot of `x`.
pub fn transform_y(x: &Trajectory, lam: &LambdaFunction) -> Result<Trajectory> {
    let slack = 1e-12 * (x.end() - x.start()).max(1.0);
    if lam.start() > x.start() + slack || lam.end() < x.end() - slack {
        return Err(Error::InvalidSetup(format!(
            "λ is defined on [{}, {}] but the trajectory spans [{}, {}]",
            lam.start(),
            lam.end(),
            x.start(),
            x.end()
        )));
    }
    let base = lam.cumulative(x.t0())?;
    x.map_knots(|s, v, dv| {
        let scale = (base - lam.cumulative(s)?).exp();
        Ok((v * scale, (dv - lam.value(s)? * v) * scale))
    })
}

/// Inverse of [`transform_y`] at the knots.
pub fn untransform(y: &Trajectory, lam: &LambdaFunction) -> Result<Trajectory> {
    let base = lam.cumulative(y.t0())?;
    y.map_knots(|s, v, dv| {
        let scale = (lam.cumulative(s)? - base).exp();
        let x = v * scale;
        Ok((x, dv * scale + lam.value(s)? * x))
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    /// max |y'| over [t₀, t₀ + r].
    pub m_x: f64,
    pub mu: f64,
    pub r: f64,
    pub slack: f64,
    pub ok: bool,
    /// Largest |y'(t)| / bound(t) over t > t₀ + r (0 when the bound is 0
    /// and y' vanishes).
    pub worst_ratio: f64,
    /// First knot where the bound is exceeded: (t, |y'(t)|, bound).
    pub first_violation: Option<(f64, f64, f64)>,
}

impl Envelope {
    /// M_x μ^{(t - t₀)/r - 1} (1 + slack); infinite on [t₀, t₀ + r) when μ = 0.
    pub fn bound(&self, t0: f64, t: f64) -> f64 {
        let exponent = (t - t0) / self.r - 1.0;
        if self.m_x == 0.0 {
            return 0.0;
        }
        self.m_x * self.mu.powf(exponent) * (1.0 + self.slack)
    }
}

/// Checks |y'(t)| ≤ M_x μ^{(t-t₀)/r - 1} (1 + slack) at every knot in [t₀, T].
pub fn check_envelope(y: &Trajectory, mu: f64, r: f64, slack: f64) -> Result<Envelope> {
    if mu >= 1.0 || mu.is_nan() {
        return Err(Error::HypothesisNotVerified { mu });
    }
    if mu < 0.0 || !(r > 0.0) || !(slack >= 0.0) {
        return Err(Error::InvalidSetup(format!("envelope needs mu >= 0, r > 0, slack >= 0 (mu = {mu}, r = {r}, slack = {slack})")));
    }
    let t0 = y.t0();
    let required = t0 + 3.0 * r;
    if y.end() < required * (1.0 - 1e-12) - 1e-12 {
        return Err(Error::HorizonTooShort { required, actual: y.end() });
    }
    let first_span = t0 + r * (1.0 + 1e-12);
    let forward = || y.forward_indices().map(|i| (y.knots()[i], y.derivs()[i].norm()));
    let m_x = forward().filter(|&(t, _)| t <= first_span).map(|(_, d)| d).fold(0.0, f64::max);
    let mut env = Envelope { m_x, mu, r, slack, ok: true, worst_ratio: 0.0, first_violation: None };
    for (t, d) in forward().filter(|&(t, _)| t > first_span) {
        let bound = env.bound(t0, t);
        if d > bound && env.ok {
            env.ok = false;
            env.first_violation = Some((t, d, bound));
        }
        let ratio = if bound > 0.0 { d / bound } else if d == 0.0 { 0.0 } else { f64::INFINITY };
        env.worst_ratio = env.worst_ratio.max(ratio);
    }
    Ok(env)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticsReport {
    /// y(T), the estimate of lim x(t) e^{-∫λ}.
    pub l_x: Complex64,
    /// max |y(t) - L_x| over the tail window.
    pub y_tail_variation: f64,
    /// max |y'(t)| over the tail window.
    pub yprime_tail: f64,
    /// max over the tail of |x' e^{-∫λ} - λ x e^{-∫λ}|, which is |y'| by
    /// the chain rule. Whether the limit of λ x e^{-∫λ} exists is not
    /// checked.
    pub eq24_gap: f64,
    pub tail: (f64, f64),
    pub envelope: Option<Envelope>,
}

/// (max |y - y(T)|, max |y'|) over knots in [from, T].
pub fn tail_stats(y: &Trajectory, from: f64) -> (f64, f64) {
    let last = *y.values().last().unwrap();
    y.forward_indices()
        .filter(|&i| y.knots()[i] >= from)
        .fold((0.0f64, 0.0f64), |(var, der), i| (var.max((y.values()[i] - last).norm()), der.max(y.derivs()[i].norm())))
}

/// Measures convergence of y over the last `tail_fraction` of [t₀, T].
pub fn estimate_limits(y: &Trajectory, tail_fraction: f64) -> Result<AsymptoticsReport> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidSetup(format!("tail fraction {tail_fraction} must lie in (0, 1]")));
    }
    let t0 = y.t0();
    let r = t0 - y.start();
    let required = t0 + 5.0 * r;
    if y.end() < required * (1.0 - 1e-12) - 1e-12 {
        return Err(Error::HorizonTooShort { required, actual: y.end() });
    }
    let end = y.end();
    let from = end - tail_fraction * (end - t0);
    let (y_tail_variation, yprime_tail) = tail_stats(y, from);
    Ok(AsymptoticsReport {
        l_x: *y.values().last().unwrap(),
        y_tail_variation,
        yprime_tail,
        eq24_gap: yprime_tail,
        tail: (from, end),
        envelope: None,
    })
}

impl AsymptoticsReport {
    pub fn with_envelope(mut self, envelope: Envelope) -> Self {
        self.envelope = Some(envelope);
        self
    }

    /// Flat `key=value` lines.
    pub fn write_text(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "L_x_re={}", fmt_f64(self.l_x.re))?;
        writeln!(w, "L_x_im={}", fmt_f64(self.l_x.im))?;
        writeln!(w, "y_tail_variation={}", fmt_f64(self.y_tail_variation))?;
        writeln!(w, "yprime_tail={}", fmt_f64(self.yprime_tail))?;
        writeln!(w, "eq24_gap={}", fmt_f64(self.eq24_gap))?;
        writeln!(w, "tail_start={}", fmt_f64(self.tail.0))?;
        writeln!(w, "tail_end={}", fmt_f64(self.tail.1))?;
        match &self.envelope {
            Some(env) => {
                writeln!(w, "M_x={}", fmt_f64(env.m_x))?;
                writeln!(w, "mu_used={}", fmt_f64(env.mu))?;
                writeln!(w, "envelope_ok={}", env.ok)?;
                writeln!(w, "envelope_worst_ratio={}", fmt_f64(env.worst_ratio))?;
                if let Some((t, d, b)) = env.first_violation {
                    writeln!(w, "envelope_first_violation_t={}", fmt_f64(t))?;
                    writeln!(w, "envelope_first_violation_abs_yprime={}", fmt_f64(d))?;
                    writeln!(w, "envelope_first_violation_bound={}", fmt_f64(b))?;
                }
            }
            None => writeln!(w, "envelope_ok=unchecked")?,
        }
        Ok(())
    }

    /// CSV with columns `t,abs_y_minus_L,abs_yprime,envelope`; the last
    /// column is empty without an envelope check.
    pub fn write_csv(&self, y: &Trajectory, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "t,abs_y_minus_L,abs_yprime,envelope")?;
        for i in y.forward_indices() {
            let t = y.knots()[i];
            let env = match &self.envelope {
                Some(e) => fmt_f64(e.bound(y.t0(), t)),
                None => String::new(),
            };
            writeln!(w, "{},{},{},{}", fmt_f64(t), fmt_f64((y.values()[i] - self.l_x).norm()), fmt_f64(y.derivs()[i].norm()), env)?;
        }
        Ok(())
    }
}

/// y'(t) + ∫₀ʳ d_θη(t, θ) [y(t) - y(t-θ)] e^{Λ(t-θ) - Λ(t)}, which vanishes
/// for an exact solution y of the transformed equation.
pub fn derivation_residual(kernel: &StieltjesKernel, y: &Trajectory, lam: &LambdaFunction, t: f64) -> Result<Complex64> {
    let yt = y.eval(t)?;
    let lt = lam.cumulative(t)?;
    let integral = kernel.try_stieltjes_integral(t, |theta| Ok((yt - y.eval(t - theta)?) * (lam.cumulative(t - theta)? - lt).exp()))?;
    Ok(y.derivative(t)? + integral)
}
