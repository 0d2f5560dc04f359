//! Dense-output solution records.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::output::fmt_f64;

/// Relative slack for domain checks on knot-aligned times.
const DOMAIN_SLACK: f64 = 1e-12;

/// A history segment xₜ: s ↦ x(t + s) on [-r, 0].
pub struct Segment<'a> {
    r: f64,
    eval: Box<dyn Fn(f64) -> Result<Complex64> + Send + Sync + 'a>,
}

impl<'a> Segment<'a> {
    pub fn from_fn(r: f64, f: impl Fn(f64) -> Result<Complex64> + Send + Sync + 'a) -> Self {
        Segment { r, eval: Box::new(f) }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn eval(&self, s: f64) -> Result<Complex64> {
        let slack = DOMAIN_SLACK * self.r;
        if !(s >= -self.r - slack && s <= slack) {
            return Err(Error::OutOfDomain { t: s, lo: -self.r, hi: 0.0 });
        }
        (self.eval)(s.clamp(-self.r, 0.0))
    }
}

impl std::fmt::Debug for Segment<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Segment").field("r", &self.r).finish_non_exhaustive()
    }
}

/// Knot values and derivatives of x on [t₀ - r, T] with a cubic Hermite
/// interpolant on each interval.
///
/// The derivative stored at t₀ is the right derivative L(t₀)x_{t₀}. The
/// initial data generally has a different slope there, which is kept
/// separately so that the interpolant on the last initial-data interval
/// still matches the initial data.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    t0: f64,
    t0_index: usize,
    knots: Vec<f64>,
    values: Vec<Complex64>,
    derivs: Vec<Complex64>,
    left_deriv_at_t0: Option<Complex64>,
}

impl Trajectory {
    /// Builds a trajectory from knot data. `t0` must be one of the knots.
    pub fn from_knots(t0: f64, knots: Vec<f64>, values: Vec<Complex64>, derivs: Vec<Complex64>) -> Result<Self> {
        if knots.len() < 2 || values.len() != knots.len() || derivs.len() != knots.len() {
            return Err(Error::InvalidSetup("trajectory needs at least two knots with matching data".into()));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidSetup("trajectory knots must be strictly increasing".into()));
        }
        let t0_index = knots
            .iter()
            .position(|&k| k == t0)
            .ok_or_else(|| Error::InvalidSetup(format!("t0 = {t0} is not a knot")))?;
        Ok(Trajectory { t0, t0_index, knots, values, derivs, left_deriv_at_t0: None })
    }

    /// Samples `f(s) = (x(s), x'(s))` at every knot.
    pub fn from_fn(t0: f64, knots: Vec<f64>, f: impl Fn(f64) -> (Complex64, Complex64)) -> Result<Self> {
        let (values, derivs) = knots.iter().map(|&s| f(s)).unzip();
        Trajectory::from_knots(t0, knots, values, derivs)
    }

    /// Slope of the initial data at t₀, used by the interpolant on the
    /// interval ending at t₀.
    pub fn with_left_derivative_at_t0(mut self, d: Complex64) -> Self {
        self.left_deriv_at_t0 = Some(d);
        self
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn start(&self) -> f64 {
        self.knots[0]
    }

    pub fn end(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn derivs(&self) -> &[Complex64] {
        &self.derivs
    }

    pub fn t0_index(&self) -> usize {
        self.t0_index
    }

    pub fn left_derivative_at_t0(&self) -> Option<Complex64> {
        self.left_deriv_at_t0
    }

    /// Knot indices with s ≥ t₀.
    pub fn forward_indices(&self) -> std::ops::Range<usize> {
        self.t0_index..self.knots.len()
    }

    fn check(&self, t: f64) -> Result<f64> {
        let (lo, hi) = (self.start(), self.end());
        let slack = DOMAIN_SLACK * (hi - lo).max(1.0);
        if !(t >= lo - slack && t <= hi + slack) {
            return Err(Error::OutOfDomain { t, lo, hi });
        }
        Ok(t.clamp(lo, hi))
    }

    /// Index i of the interval [s_i, s_{i+1}] containing t.
    fn interval(&self, t: f64) -> usize {
        let i = self.knots.partition_point(|&k| k <= t);
        i.saturating_sub(1).min(self.knots.len() - 2)
    }

    fn right_slope(&self, i: usize) -> Complex64 {
        match self.left_deriv_at_t0 {
            Some(d) if i + 1 == self.t0_index => d,
            _ => self.derivs[i + 1],
        }
    }

    fn hermite(&self, i: usize, t: f64) -> (Complex64, Complex64) {
        let (a, b) = (self.knots[i], self.knots[i + 1]);
        hermite(a, b - a, self.values[i], self.values[i + 1], self.derivs[i], self.right_slope(i), t)
    }

    pub fn eval(&self, t: f64) -> Result<Complex64> {
        let t = self.check(t)?;
        let i = self.interval(t);
        if t == self.knots[i] {
            return Ok(self.values[i]);
        }
        if t == self.knots[i + 1] {
            return Ok(self.values[i + 1]);
        }
        Ok(self.hermite(i, t).0)
    }

    pub fn derivative(&self, t: f64) -> Result<Complex64> {
        let t = self.check(t)?;
        let i = self.interval(t);
        if t == self.knots[i] {
            return Ok(self.derivs[i]);
        }
        if t == self.knots[i + 1] {
            return Ok(self.derivs[i + 1]);
        }
        Ok(self.hermite(i, t).1)
    }

    /// xₜ for t in [t₀, T].
    pub fn segment_at(&self, t: f64) -> Result<Segment<'_>> {
        let r = self.t0 - self.start();
        let slack = DOMAIN_SLACK * (self.end() - self.start()).max(1.0);
        if !(t >= self.t0 - slack && t <= self.end() + slack) {
            return Err(Error::OutOfDomain { t, lo: self.t0, hi: self.end() });
        }
        Ok(Segment::from_fn(r, move |s| self.eval(t + s)))
    }

    /// The last interval's Hermite cubic continued past T.
    pub(crate) fn extrapolate(&self, t: f64) -> Complex64 {
        self.hermite(self.knots.len() - 2, t).0
    }

    pub(crate) fn push(&mut self, t: f64, value: Complex64, deriv: Complex64) {
        self.knots.push(t);
        self.values.push(value);
        self.derivs.push(deriv);
    }

    pub(crate) fn set_last_derivative(&mut self, deriv: Complex64) {
        *self.derivs.last_mut().unwrap() = deriv;
    }

    /// Applies `f(s, x, x') -> (y, y')` at every knot.
    pub fn map_knots(&self, mut f: impl FnMut(f64, Complex64, Complex64) -> Result<(Complex64, Complex64)>) -> Result<Self> {
        let mut values = Vec::with_capacity(self.knots.len());
        let mut derivs = Vec::with_capacity(self.knots.len());
        for ((&s, &x), &dx) in self.knots.iter().zip(&self.values).zip(&self.derivs) {
            let (y, dy) = f(s, x, dx)?;
            values.push(y);
            derivs.push(dy);
        }
        let left = match self.left_deriv_at_t0 {
            Some(d) => Some(f(self.t0, self.values[self.t0_index], d)?.1),
            None => None,
        };
        Ok(Trajectory { values, derivs, left_deriv_at_t0: left, ..self.clone() })
    }

    /// CSV with columns `t,re_x,im_x,re_dx,im_dx`, one row per knot.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "t,re_x,im_x,re_dx,im_dx")?;
        for ((&s, x), dx) in self.knots.iter().zip(&self.values).zip(&self.derivs) {
            writeln!(w, "{},{},{},{},{}", fmt_f64(s), fmt_f64(x.re), fmt_f64(x.im), fmt_f64(dx.re), fmt_f64(dx.im))?;
        }
        Ok(())
    }
}

/// Cubic Hermite value and derivative at t on [a, a + h].
fn hermite(a: f64, h: f64, y0: Complex64, y1: Complex64, d0: Complex64, d1: Complex64, t: f64) -> (Complex64, Complex64) {
    let u = (t - a) / h;
    let u2 = u * u;
    let u3 = u2 * u;
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    let value = y0 * h00 + d0 * (h * h10) + y1 * h01 + d1 * (h * h11);

    let g00 = 6.0 * u2 - 6.0 * u;
    let g10 = 3.0 * u2 - 4.0 * u + 1.0;
    let g01 = -6.0 * u2 + 6.0 * u;
    let g11 = 3.0 * u2 - 2.0 * u;
    let deriv = (y0 * g00 + y1 * g01) / h + d0 * g10 + d1 * g11;
    (value, deriv)
}
