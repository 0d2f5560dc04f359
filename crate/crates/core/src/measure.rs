//! Time-dependent Stieltjes kernels η(t, ·) on [0, r].
//!
//! A kernel is stored as its increments: point masses (atoms) at
//! possibly time-varying delays plus absolutely continuous pieces with a
//! density k(t, θ). With that representation η(t, 0) = 0 and right
//! continuity hold by construction, and the total variation measure |η|
//! is available in closed form: |b_j| at each atom and |k| dθ on each
//! piece.
//!
//! Every operation is a pure function of the kernel and its arguments.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::{Expression, Var};
use crate::quadrature::GaussLegendre;
use crate::trajectory::Segment;

/// Relative slack allowed when checking that an atom delay lies in [0, r].
const DELAY_RANGE_SLACK: f64 = 1e-12;

pub const DEFAULT_QUADRATURE_ORDER: usize = 16;
pub const DEFAULT_QUADRATURE_PANELS: usize = 8;

/// Point mass `mass(t)` located at θ = `delay(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub delay: Expression,
    pub mass: Expression,
}

impl Atom {
    pub fn new(delay: Expression, mass: Expression) -> Result<Self> {
        if delay.uses(Var::Theta) || mass.uses(Var::Theta) {
            return Err(Error::InvalidSetup("atom delay and mass may depend on t only".into()));
        }
        Ok(Atom { delay, mass })
    }

    pub fn parse(delay: &str, mass: &str) -> Result<Self> {
        Atom::new(parse(delay)?, parse(mass)?)
    }

    /// Whether the delay is a constant expression.
    pub fn has_constant_delay(&self) -> bool {
        !self.delay.uses(Var::T)
    }
}

/// Density `kernel(t, θ)` on the support [lo, hi].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityPiece {
    pub kernel: Expression,
    pub lo: f64,
    pub hi: f64,
}

impl DensityPiece {
    pub fn new(kernel: Expression, lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidSetup(format!("density support [{lo}, {hi}] is empty")));
        }
        Ok(DensityPiece { kernel, lo, hi })
    }

    pub fn parse(kernel: &str, lo: f64, hi: f64) -> Result<Self> {
        DensityPiece::new(parse(kernel)?, lo, hi)
    }
}

fn parse(src: &str) -> Result<Expression> {
    Expression::parse(src).map_err(|error| Error::Parse { source_text: src.to_string(), error })
}

/// One quadrature point of η(t, ·): the integral against η is
/// Σ weight · f(theta) over all points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurePoint {
    pub theta: f64,
    pub weight: Complex64,
    pub atom: bool,
}

/// The measure d_θη(t, θ) of a linear functional L(t)φ = ∫ dη(t, θ) φ(-θ).
#[derive(Debug, Clone)]
pub struct StieltjesKernel {
    r: f64,
    atoms: Vec<Atom>,
    densities: Vec<DensityPiece>,
    panels: usize,
    rule: GaussLegendre,
}

impl StieltjesKernel {
    /// Zero measure on [0, r].
    pub fn new(r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidSetup(format!("delay horizon r must be positive, got {r}")));
        }
        Ok(StieltjesKernel {
            r,
            atoms: Vec::new(),
            densities: Vec::new(),
            panels: DEFAULT_QUADRATURE_PANELS,
            rule: GaussLegendre::new(DEFAULT_QUADRATURE_ORDER),
        })
    }

    pub fn with_atom(mut self, atom: Atom) -> Self {
        self.atoms.push(atom);
        self
    }

    pub fn with_density(mut self, piece: DensityPiece) -> Result<Self> {
        if piece.lo < 0.0 || piece.hi > self.r {
            return Err(Error::InvalidSetup(format!(
                "density support [{}, {}] is not inside [0, {}]",
                piece.lo, piece.hi, self.r
            )));
        }
        self.densities.push(piece);
        Ok(self)
    }

    /// Shorthand for `with_atom(Atom::parse(delay, mass)?)`.
    pub fn atom(self, delay: &str, mass: &str) -> Result<Self> {
        Ok(self.with_atom(Atom::parse(delay, mass)?))
    }

    /// Shorthand for `with_density(DensityPiece::parse(kernel, lo, hi)?)`.
    pub fn density(self, kernel: &str, lo: f64, hi: f64) -> Result<Self> {
        self.with_density(DensityPiece::parse(kernel, lo, hi)?)
    }

    pub fn with_quadrature(mut self, order: usize, panels: usize) -> Result<Self> {
        if order == 0 || panels == 0 {
            return Err(Error::InvalidSetup("quadrature order and panel count must be positive".into()));
        }
        self.rule = GaussLegendre::new(order);
        self.panels = panels;
        Ok(self)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn densities(&self) -> &[DensityPiece] {
        &self.densities
    }

    pub fn quadrature_order(&self) -> usize {
        self.rule.order()
    }

    pub fn quadrature_panels(&self) -> usize {
        self.panels
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.densities.is_empty()
    }

    /// True when every atom delay is constant in t.
    pub fn has_constant_delays(&self) -> bool {
        self.atoms.iter().all(Atom::has_constant_delay)
    }

    /// Delay of atom `atom` at time t, checked against [0, r].
    pub fn atom_delay(&self, atom: &Atom, t: f64) -> Result<f64> {
        let z = atom.delay.evaluate(t, None).map_err(Error::eval(t))?;
        if z.im != 0.0 {
            return Err(Error::ComplexDelay { t, delay: z });
        }
        let slack = DELAY_RANGE_SLACK * self.r;
        let tau = z.re;
        if tau < -slack || tau > self.r + slack {
            return Err(Error::DelayOutOfRange { t, delay: tau, r: self.r });
        }
        Ok(tau.clamp(0.0, self.r))
    }

    /// Visits every atom and every density quadrature node of η(t, ·).
    pub fn for_each_point(&self, t: f64, mut visit: impl FnMut(MeasurePoint) -> Result<()>) -> Result<()> {
        for atom in &self.atoms {
            let theta = self.atom_delay(atom, t)?;
            let weight = atom.mass.evaluate(t, None).map_err(Error::eval(t))?;
            visit(MeasurePoint { theta, weight, atom: true })?;
        }
        for piece in &self.densities {
            let mut status = Ok(());
            self.rule.for_each_point(piece.lo, piece.hi, self.panels, |theta, w| {
                if status.is_err() {
                    return;
                }
                status = piece
                    .kernel
                    .evaluate(t, Some(theta))
                    .map_err(Error::eval(t))
                    .and_then(|k| visit(MeasurePoint { theta, weight: k * w, atom: false }));
            });
            status?;
        }
        Ok(())
    }

    /// ∫₀ʳ d_θη(t, θ) f(θ) for a fallible integrand.
    pub fn try_stieltjes_integral(&self, t: f64, mut f: impl FnMut(f64) -> Result<Complex64>) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        self.for_each_point(t, |p| {
            acc += p.weight * f(p.theta)?;
            Ok(())
        })?;
        Ok(acc)
    }

    /// ∫₀ʳ d_θη(t, θ) f(θ). Atoms are summed exactly; each density piece
    /// uses the composite Gauss–Legendre rule.
    pub fn stieltjes_integral(&self, t: f64, f: impl Fn(f64) -> Complex64) -> Result<Complex64> {
        self.try_stieltjes_integral(t, |th| Ok(f(th)))
    }

    /// ∫₀ʳ f(θ) d_θ|η|(t, θ) for a fallible, nonnegative integrand.
    pub fn try_total_variation_integral(&self, t: f64, mut f: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
        let mut acc = 0.0;
        self.for_each_point(t, |p| {
            acc += p.weight.norm() * f(p.theta)?;
            Ok(())
        })?;
        Ok(acc)
    }

    /// ∫₀ʳ f(θ) d_θ|η|(t, θ).
    pub fn total_variation_integral(&self, t: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
        self.try_total_variation_integral(t, |th| Ok(f(th)))
    }

    /// L(t)φ = ∫₀ʳ d_θη(t, θ) φ(-θ).
    pub fn apply_functional(&self, t: f64, segment: &Segment<'_>) -> Result<Complex64> {
        self.try_stieltjes_integral(t, |theta| segment.eval(-theta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn distributed() -> StieltjesKernel {
        StieltjesKernel::new(1.0).unwrap().density("1/(t-theta)", 0.0, 1.0).unwrap()
    }

    fn variable_delay() -> StieltjesKernel {
        StieltjesKernel::new(1.0).unwrap().atom("1", "1/(t+2-1)").unwrap()
    }

    #[test]
    fn single_atom_integral() {
        let k = StieltjesKernel::new(1.0).unwrap().atom("1", "exp(1)").unwrap();
        let v = k.stieltjes_integral(0.0, |th| c((-th).exp())).unwrap();
        assert!((v - c(1.0)).norm() < 1e-15);
        assert_eq!(k.stieltjes_integral(0.0, |_| c(1.0)).unwrap(), c(E));
    }

    #[test]
    fn distributed_kernel_integral_matches_antiderivative() {
        // ∫₀¹ dθ/(2-θ) = ln 2
        let v = distributed().stieltjes_integral(2.0, |_| c(1.0)).unwrap();
        assert!((v.re - 2f64.ln()).abs() < 1e-14);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn empty_kernel_is_zero() {
        let k = StieltjesKernel::new(2.0).unwrap();
        assert_eq!(k.stieltjes_integral(3.0, |th| c(th + 1.0)).unwrap(), c(0.0));
        assert_eq!(k.total_variation_integral(3.0, |_| 1.0).unwrap(), 0.0);
        assert!(k.is_zero());
    }

    #[test]
    fn total_variation_of_negative_atom() {
        let k = StieltjesKernel::new(1.0).unwrap().atom("1", "-3").unwrap();
        assert_eq!(k.total_variation_integral(0.0, |_| 1.0).unwrap(), 3.0);
    }

    #[test]
    fn total_variation_variable_delay_kernel() {
        let v = variable_delay().total_variation_integral(8.0, |th| th).unwrap();
        assert_eq!(v, 1.0 / 9.0);
    }

    #[test]
    fn total_variation_distributed_kernel() {
        // ∫₀¹ θ/(10-θ) dθ = -1 + 10 ln(10/9)
        let oracle = -1.0 + 10.0 * (10.0f64 / 9.0).ln();
        let v = distributed().total_variation_integral(10.0, |th| th).unwrap();
        assert!((v - oracle).abs() < 1e-14, "{v} vs {oracle}");
    }

    #[test]
    fn total_variation_with_unit_integrand_sums_masses() {
        let k = StieltjesKernel::new(2.0)
            .unwrap()
            .atom("0.5", "-2")
            .unwrap()
            .atom("1", "t")
            .unwrap()
            .density("-theta", 0.0, 2.0)
            .unwrap();
        let v = k.total_variation_integral(3.0, |_| 1.0).unwrap();
        assert!((v - (2.0 + 3.0 + 2.0)).abs() < 1e-14);
    }

    #[test]
    fn functional_on_segments() {
        let k = StieltjesKernel::new(1.0).unwrap().atom("0", "t^2").unwrap();
        let seg = Segment::from_fn(1.0, |s| Ok(c(5.0 + s)));
        assert_eq!(k.apply_functional(3.0, &seg).unwrap(), c(45.0));

        let one = Segment::from_fn(1.0, |_| Ok(c(1.0)));
        let v = distributed().apply_functional(2.0, &one).unwrap();
        assert!((v.re - 2f64.ln()).abs() < 1e-14);

        let zero = Segment::from_fn(1.0, |_| Ok(c(0.0)));
        assert_eq!(distributed().apply_functional(2.0, &zero).unwrap(), c(0.0));
    }

    #[test]
    fn delay_out_of_range_is_an_error() {
        let k = StieltjesKernel::new(1.0).unwrap().atom("t", "1").unwrap();
        assert!(k.stieltjes_integral(0.5, |_| c(1.0)).is_ok());
        assert!(matches!(k.stieltjes_integral(1.5, |_| c(1.0)), Err(Error::DelayOutOfRange { .. })));
        assert!(matches!(k.stieltjes_integral(-0.5, |_| c(1.0)), Err(Error::DelayOutOfRange { .. })));
    }

    #[test]
    fn kernel_evaluation_failure_propagates() {
        let k = StieltjesKernel::new(1.0).unwrap().density("ln(t-theta)", 0.0, 1.0).unwrap();
        assert!(matches!(k.stieltjes_integral(0.5, |_| c(1.0)), Err(Error::Eval { .. })));
    }

    #[test]
    fn construction_errors() {
        assert!(StieltjesKernel::new(0.0).is_err());
        assert!(StieltjesKernel::new(1.0).unwrap().density("1", 0.5, 0.5).is_err());
        assert!(StieltjesKernel::new(1.0).unwrap().density("1", 0.0, 1.5).is_err());
        assert!(StieltjesKernel::new(1.0).unwrap().atom("theta", "1").is_err());
        assert!(StieltjesKernel::new(1.0).unwrap().with_quadrature(0, 8).is_err());
    }

    #[test]
    fn doubling_quadrature_order_is_stable() {
        let coarse = distributed();
        let fine = distributed().with_quadrature(32, 8).unwrap();
        for t in [2.0, 3.0, 10.0, 100.0] {
            let f = |th: f64| c((-th).exp() * th);
            let a = coarse.stieltjes_integral(t, f).unwrap();
            let b = fine.stieltjes_integral(t, f).unwrap();
            assert!((a - b).norm() < 1e-10);
        }
    }
}
