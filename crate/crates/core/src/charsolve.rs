//! Solutions λ(t) of the generalized characteristic equation
//!
//! ```text
//! λ(t) = ∫₀ʳ d_θη(t, θ) exp(-∫_{t-θ}^t λ(s) ds),   t ≥ t₀,
//! ```
//!
//! either supplied in closed form and certified by their residual, or
//! computed by Picard iteration on a uniform grid.
//!
//! Sweeps of the iteration evaluate the right-hand side at every grid
//! point in parallel. Each evaluation reads only the frozen previous
//! iterate, so the result is identical to a sequential sweep.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::{BinOp, Expression, Node, Var};
use crate::measure::StieltjesKernel;
use crate::output::fmt_f64;
use crate::quadrature::GaussLegendre;

const DOMAIN_SLACK: f64 = 1e-12;
/// Cell width of the cumulative table for closed forms without a known
/// antiderivative.
const CUMULATIVE_CELL: f64 = 1.0 / 64.0;
const CUMULATIVE_ORDER: usize = 8;

#[derive(Debug, Clone)]
pub enum LambdaForm {
    ClosedForm(Expression),
    /// Piecewise linear through `(knots[i], values[i])`.
    Grid { knots: Vec<f64>, values: Vec<Complex64> },
}

#[derive(Debug, Clone)]
enum Cumulative {
    /// Λ(t) = scale · (ln(t + shift) - ln(start + shift)).
    Reciprocal { scale: f64, shift: f64 },
    /// Λ(t) = value · (t - start).
    Constant(Complex64),
    /// Λ at the knots; exact for the piecewise linear form, Gauss–Legendre
    /// partial cells for closed forms.
    Table { knots: Vec<f64>, values: Vec<Complex64> },
}

/// A continuous λ on [start, end] with its running integral
/// Λ(t) = ∫_start^t λ(s) ds.
#[derive(Debug, Clone)]
pub struct LambdaFunction {
    start: f64,
    end: f64,
    form: LambdaForm,
    cumulative: Cumulative,
}

impl LambdaFunction {
    /// λ given by an expression in `t` on [start, end]. The antiderivative
    /// is exact for constants and for `k/(t + c)`; anything else is
    /// integrated by Gauss–Legendre on cells of width 1/64.
    pub fn closed_form(expr: Expression, start: f64, end: f64) -> Result<Self> {
        if expr.uses(Var::Theta) {
            return Err(Error::InvalidSetup("λ may depend on t only".into()));
        }
        if !(start.is_finite() && end.is_finite() && start < end) {
            return Err(Error::InvalidSetup(format!("empty λ domain [{start}, {end}]")));
        }
        let cumulative = if let Some(value) = expr.as_constant() {
            Cumulative::Constant(value)
        } else if let Some((scale, shift)) = reciprocal_shape(expr.root()) {
            if start + shift <= 0.0 && end + shift >= 0.0 {
                return Err(Error::InvalidSetup(format!("λ = {expr} is singular on [{start}, {end}]")));
            }
            if start + shift <= 0.0 {
                return Err(Error::InvalidSetup(format!("λ = {expr} has no real logarithmic antiderivative on [{start}, {end}]")));
            }
            Cumulative::Reciprocal { scale, shift }
        } else {
            let cells = ((end - start) / CUMULATIVE_CELL).ceil().max(1.0) as usize;
            let width = (end - start) / cells as f64;
            let rule = GaussLegendre::new(CUMULATIVE_ORDER);
            let mut knots = Vec::with_capacity(cells + 1);
            let mut values = Vec::with_capacity(cells + 1);
            let mut acc = Complex64::new(0.0, 0.0);
            knots.push(start);
            values.push(acc);
            for i in 0..cells {
                let a = start + i as f64 * width;
                let b = if i + 1 == cells { end } else { start + (i + 1) as f64 * width };
                acc += integrate(&rule, &expr, a, b)?;
                knots.push(b);
                values.push(acc);
            }
            Cumulative::Table { knots, values }
        };
        let lam = LambdaFunction { start, end, form: LambdaForm::ClosedForm(expr), cumulative };
        // Surface evaluation failures at construction rather than mid-solve.
        lam.value(start)?;
        lam.value(end)?;
        Ok(lam)
    }

    pub fn parse_closed_form(src: &str, start: f64, end: f64) -> Result<Self> {
        let expr = Expression::parse(src).map_err(|error| Error::Parse { source_text: src.to_string(), error })?;
        LambdaFunction::closed_form(expr, start, end)
    }

    /// Piecewise linear λ through the given samples; Λ by the trapezoid rule.
    pub fn from_grid(knots: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if knots.len() < 2 || knots.len() != values.len() {
            return Err(Error::InvalidSetup("λ grid needs at least two samples".into()));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidSetup("λ grid must be strictly increasing".into()));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidSetup("λ grid values must be finite".into()));
        }
        let mut table = Vec::with_capacity(knots.len());
        let mut acc = Complex64::new(0.0, 0.0);
        table.push(acc);
        for i in 1..knots.len() {
            acc += (values[i - 1] + values[i]) * (0.5 * (knots[i] - knots[i - 1]));
            table.push(acc);
        }
        Ok(LambdaFunction {
            start: knots[0],
            end: *knots.last().unwrap(),
            cumulative: Cumulative::Table { knots: knots.clone(), values: table },
            form: LambdaForm::Grid { knots, values },
        })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn form(&self) -> &LambdaForm {
        &self.form
    }

    fn check(&self, t: f64) -> Result<f64> {
        let slack = DOMAIN_SLACK * (self.end - self.start).max(1.0);
        if !(t >= self.start - slack && t <= self.end + slack) {
            return Err(Error::OutOfDomain { t, lo: self.start, hi: self.end });
        }
        Ok(t.clamp(self.start, self.end))
    }

    pub fn value(&self, t: f64) -> Result<Complex64> {
        let t = self.check(t)?;
        match &self.form {
            LambdaForm::ClosedForm(e) => e.evaluate(t, None).map_err(Error::eval(t)),
            LambdaForm::Grid { knots, values } => Ok(linear(knots, values, t)),
        }
    }

    /// Λ(t) = ∫_start^t λ(s) ds.
    pub fn cumulative(&self, t: f64) -> Result<Complex64> {
        let t = self.check(t)?;
        match (&self.cumulative, &self.form) {
            (Cumulative::Constant(v), _) => Ok(v * (t - self.start)),
            (Cumulative::Reciprocal { scale, shift }, _) => {
                Ok(Complex64::new(scale * ((t + shift).ln() - (self.start + shift).ln()), 0.0))
            }
            (Cumulative::Table { knots, values }, LambdaForm::Grid { knots: _, values: lam }) => {
                let i = cell(knots, t);
                let a = knots[i];
                if t == a {
                    return Ok(values[i]);
                }
                let lt = linear(knots, lam, t);
                Ok(values[i] + (lam[i] + lt) * (0.5 * (t - a)))
            }
            (Cumulative::Table { knots, values }, LambdaForm::ClosedForm(e)) => {
                let i = cell(knots, t);
                let a = knots[i];
                if t == a {
                    return Ok(values[i]);
                }
                let rule = GaussLegendre::new(CUMULATIVE_ORDER);
                Ok(values[i] + integrate(&rule, e, a, t)?)
            }
        }
    }

    /// ∫_a^b λ(s) ds.
    pub fn integral(&self, a: f64, b: f64) -> Result<Complex64> {
        Ok(self.cumulative(b)? - self.cumulative(a)?)
    }

    /// exp(-∫_{t-θ}^t λ(s) ds).
    pub fn decay_factor(&self, t: f64, theta: f64) -> Result<Complex64> {
        Ok(self.integral(t, t - theta)?.exp())
    }

    /// CSV with columns `t,re_lambda,im_lambda,re_Lambda,im_Lambda`.
    pub fn write_csv(&self, mut w: impl Write, times: &[f64]) -> Result<()> {
        writeln!(w, "t,re_lambda,im_lambda,re_Lambda,im_Lambda")?;
        for &t in times {
            let v = self.value(t)?;
            let c = self.cumulative(t)?;
            writeln!(w, "{},{},{},{},{}", fmt_f64(t), fmt_f64(v.re), fmt_f64(v.im), fmt_f64(c.re), fmt_f64(c.im))?;
        }
        Ok(())
    }

    /// Grid knots, or an even sampling with spacing `step` for closed forms.
    pub fn sample_times(&self, step: f64) -> Vec<f64> {
        match &self.form {
            LambdaForm::Grid { knots, .. } => knots.clone(),
            LambdaForm::ClosedForm(_) => uniform(self.start, self.end, step),
        }
    }
}

/// Matches `k / (t + c)`, `k / (c + t)`, `k / (t - c)` and `k / t`.
fn reciprocal_shape(node: &Node) -> Option<(f64, f64)> {
    let Node::Binary(BinOp::Div, num, den) = node else {
        return None;
    };
    let Node::Const(k) = **num else {
        return None;
    };
    let shift = match &**den {
        Node::Var(Var::T) => 0.0,
        Node::Binary(BinOp::Add, a, b) => match (&**a, &**b) {
            (Node::Var(Var::T), Node::Const(c)) | (Node::Const(c), Node::Var(Var::T)) => *c,
            _ => return None,
        },
        Node::Binary(BinOp::Sub, a, b) => match (&**a, &**b) {
            (Node::Var(Var::T), Node::Const(c)) => -*c,
            _ => return None,
        },
        _ => return None,
    };
    Some((k, shift))
}

fn integrate(rule: &GaussLegendre, e: &Expression, a: f64, b: f64) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut status = Ok(());
    rule.for_each_point(a, b, 1, |s, w| {
        if status.is_ok() {
            match e.evaluate(s, None) {
                Ok(v) => acc += v * w,
                Err(err) => status = Err(Error::Eval { t: s, error: err }),
            }
        }
    });
    status.map(|_| acc)
}

fn cell(knots: &[f64], t: f64) -> usize {
    knots.partition_point(|&k| k <= t).saturating_sub(1).min(knots.len() - 2)
}

fn linear(knots: &[f64], values: &[Complex64], t: f64) -> Complex64 {
    let i = cell(knots, t);
    let (a, b) = (knots[i], knots[i + 1]);
    if t == a {
        return values[i];
    }
    let u = (t - a) / (b - a);
    values[i] * (1.0 - u) + values[i + 1] * u
}

/// start, start + step, ..., with the last point exactly `end`.
pub fn uniform(start: f64, end: f64, step: f64) -> Vec<f64> {
    let n = (((end - start) / step) * (1.0 - 1e-9)).ceil().max(1.0) as usize;
    let mut v: Vec<f64> = (0..n).map(|i| start + i as f64 * step).collect();
    v.push(end);
    v
}

/// Right-hand side of the characteristic equation at t for the candidate λ.
pub fn rhs(kernel: &StieltjesKernel, lam: &LambdaFunction, t: f64) -> Result<Complex64> {
    let lt = lam.cumulative(t)?;
    kernel.try_stieltjes_integral(t, |theta| Ok((lam.cumulative(t - theta)? - lt).exp()))
}

/// max over `grid` of |λ(t) - rhs(t)|.
pub fn residual(kernel: &StieltjesKernel, lam: &LambdaFunction, grid: &[f64]) -> Result<f64> {
    let defects: Result<Vec<f64>> =
        grid.par_iter().map(|&t| Ok((lam.value(t)? - rhs(kernel, lam, t)?).norm())).collect();
    Ok(defects?.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    pub horizon: f64,
    pub grid_step: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// ω in λ ← λ + ω (rhs(λ) - λ).
    pub relaxation: f64,
}

impl FixedPointOptions {
    pub fn new(horizon: f64, grid_step: f64) -> Self {
        FixedPointOptions { horizon, grid_step, tol: 1e-8, max_iter: 200, relaxation: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct FixedPointSolution {
    pub lambda: LambdaFunction,
    pub iterations: usize,
    /// Residual on the grid points in [t₀, T].
    pub residual: f64,
}

/// Picard iteration for λ on [t₀, T] with λ on [t₀ - r, t₀) held at the
/// initial guess.
///
/// Grid points before t₀ keep their guessed values; the knot at t₀ and
/// everything after it are updated. The first iterate continues the guess
/// as the constant `guess(t₀)`.
pub fn solve_fixed_point(
    kernel: &StieltjesKernel,
    initial_guess: &LambdaFunction,
    t0: f64,
    opts: &FixedPointOptions,
) -> Result<FixedPointSolution> {
    let r = kernel.r();
    let step = opts.grid_step;
    if !(step > 0.0 && step <= r / 8.0 * (1.0 + 1e-9)) {
        return Err(Error::InvalidSetup(format!("grid step {step} must lie in (0, r/8] = (0, {}]", r / 8.0)));
    }
    if !(opts.horizon > t0) {
        return Err(Error::InvalidSetup(format!("need t0 < T, got t0 = {t0}, T = {}", opts.horizon)));
    }
    if !(opts.relaxation > 0.0 && opts.relaxation <= 1.0) {
        return Err(Error::InvalidSetup(format!("relaxation {} must lie in (0, 1]", opts.relaxation)));
    }
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(Error::InvalidSetup("tolerance and iteration limit must be positive".into()));
    }

    let mut knots = uniform(t0 - r, t0, step);
    knots.pop();
    let fixed = knots.len();
    knots.extend(uniform(t0, opts.horizon, step));
    let mut values = Vec::with_capacity(knots.len());
    for &s in &knots[..fixed] {
        values.push(initial_guess.value(s)?);
    }
    let start_value = initial_guess.value(t0)?;
    values.resize(knots.len(), start_value);
    let forward: Vec<f64> = knots[fixed..].to_vec();

    let sweep = |lam: &LambdaFunction| -> Result<Vec<Complex64>> {
        forward.par_iter().map(|&t| rhs(kernel, lam, t)).collect()
    };

    let mut lam = LambdaFunction::from_grid(knots.clone(), values.clone())?;
    let mut last_defect = f64::INFINITY;
    for iteration in 1..=opts.max_iter {
        let next = sweep(&lam)?;
        let mut change = 0.0f64;
        for (v, n) in values[fixed..].iter_mut().zip(&next) {
            let delta = (n - *v) * opts.relaxation;
            change = change.max(delta.norm());
            *v += delta;
        }
        if !change.is_finite() {
            return Err(Error::Divergence { t: t0 });
        }
        lam = LambdaFunction::from_grid(knots.clone(), values.clone())?;
        if change < 0.5 * opts.tol {
            let check = sweep(&lam)?;
            last_defect = values[fixed..].iter().zip(&check).map(|(v, c)| (v - c).norm()).fold(0.0, f64::max);
            if last_defect <= opts.tol {
                return Ok(FixedPointSolution { lambda: lam, iterations: iteration, residual: last_defect });
            }
        } else {
            last_defect = change / opts.relaxation;
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, residual: last_defect })
}
