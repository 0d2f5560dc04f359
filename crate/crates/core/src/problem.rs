//! TOML problem files.
//!
//! ```toml
//! r = 1.0
//! t0 = 2.0
//! horizon = 100.0
//! step = 0.015625
//! grid_step = 0.0078125        # λ grid, defaults to `step`
//! initial_data = "1"           # x(t) on [t0 - r, t0]
//! output = "out"               # optional, overridden by --out
//!
//! [[atom]]
//! delay = "1"
//! mass = "1/(t+1)"
//!
//! [[density]]
//! kernel = "1/(t-theta)"
//! support = [0.0, 1.0]
//!
//! [quadrature]                 # optional
//! order = 16
//! panels = 8
//!
//! [lambda]                     # exactly one of the two forms
//! closed_form = "1/t"
//! # [lambda.fixed_point]
//! # pre_interval_guess = "1/t"
//! # tol = 1e-8
//! # max_iter = 200
//! # relaxation = 1.0
//!
//! [criterion]                  # optional
//! window = [50.0, 100.0]       # defaults to the second half of [t0, T]
//! samples = 200
//! margin = 0.02
//!
//! [asymptotics]                # optional
//! tail_fraction = 0.25
//! slack = 0.1
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::asymptotics::{DEFAULT_SLACK, DEFAULT_TAIL_FRACTION};
use crate::charsolve::{self, FixedPointOptions, FixedPointSolution, LambdaFunction};
use crate::criterion::DEFAULT_MARGIN;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::integrator::ProblemSetup;
use crate::measure::{Atom, DensityPiece, StieltjesKernel, DEFAULT_QUADRATURE_ORDER, DEFAULT_QUADRATURE_PANELS};

pub const DEFAULT_SAMPLES: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub r: f64,
    pub t0: f64,
    pub horizon: f64,
    pub step: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
    pub initial_data: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, rename = "atom", skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<AtomSpec>,
    #[serde(default, rename = "density", skip_serializing_if = "Vec::is_empty")]
    pub densities: Vec<DensitySpec>,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    pub lambda: LambdaSpec,
    #[serde(default)]
    pub criterion: CriterionSpec,
    #[serde(default)]
    pub asymptotics: AsymptoticsSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub delay: String,
    pub mass: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    pub kernel: String,
    pub support: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub order: usize,
    pub panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { order: DEFAULT_QUADRATURE_ORDER, panels: DEFAULT_QUADRATURE_PANELS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_point: Option<FixedPointSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedPointSpec {
    pub pre_interval_guess: String,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_relaxation")]
    pub relaxation: f64,
}

fn default_tol() -> f64 {
    1e-8
}

fn default_max_iter() -> usize {
    200
}

fn default_relaxation() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CriterionSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    pub samples: usize,
    pub margin: f64,
}

impl Default for CriterionSpec {
    fn default() -> Self {
        CriterionSpec { window: None, samples: DEFAULT_SAMPLES, margin: DEFAULT_MARGIN }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AsymptoticsSpec {
    pub tail_fraction: f64,
    pub slack: f64,
}

impl Default for AsymptoticsSpec {
    fn default() -> Self {
        AsymptoticsSpec { tail_fraction: DEFAULT_TAIL_FRACTION, slack: DEFAULT_SLACK }
    }
}

impl ProblemSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Spec(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Spec(format!("cannot read {}: {e}", path.display())))?;
        ProblemSpec::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Spec(e.to_string()))
    }
}

/// How λ is obtained.
#[derive(Debug, Clone)]
pub enum LambdaSource {
    ClosedForm(Expression),
    FixedPoint { guess: Expression, tol: f64, max_iter: usize, relaxation: f64 },
}

/// A validated problem with every expression parsed.
#[derive(Debug, Clone)]
pub struct Problem {
    pub spec: ProblemSpec,
    pub setup: ProblemSetup,
    pub grid_step: f64,
    pub lambda_source: LambdaSource,
}

/// λ together with how it was obtained.
#[derive(Debug, Clone)]
pub struct LambdaOutcome {
    pub lambda: LambdaFunction,
    /// Residual on the λ grid over [t₀, T].
    pub residual: f64,
    /// Picard sweeps, `None` for closed forms.
    pub iterations: Option<usize>,
}

fn parse_expr(what: &str, src: &str) -> Result<Expression> {
    Expression::parse(src).map_err(|e| Error::Spec(format!("{what}: cannot parse `{src}`: {e}")))
}

impl Problem {
    pub fn from_spec(spec: ProblemSpec) -> Result<Self> {
        let mut kernel = StieltjesKernel::new(spec.r)?.with_quadrature(spec.quadrature.order, spec.quadrature.panels)?;
        for (i, a) in spec.atoms.iter().enumerate() {
            let delay = parse_expr(&format!("atom {i} delay"), &a.delay)?;
            let mass = parse_expr(&format!("atom {i} mass"), &a.mass)?;
            kernel = kernel.with_atom(Atom::new(delay, mass)?);
        }
        for (i, d) in spec.densities.iter().enumerate() {
            let k = parse_expr(&format!("density {i} kernel"), &d.kernel)?;
            kernel = kernel.with_density(DensityPiece::new(k, d.support[0], d.support[1])?)?;
        }
        let initial = parse_expr("initial_data", &spec.initial_data)?;
        let setup = ProblemSetup::new(kernel, spec.t0, spec.horizon, initial, spec.step)?;

        let grid_step = spec.grid_step.unwrap_or(spec.step);
        if !(grid_step > 0.0 && grid_step <= spec.r / 8.0 * (1.0 + 1e-9)) {
            return Err(Error::Spec(format!("grid_step {grid_step} must lie in (0, r/8]")));
        }
        let lambda_source = match (&spec.lambda.closed_form, &spec.lambda.fixed_point) {
            (Some(src), None) => LambdaSource::ClosedForm(parse_expr("lambda.closed_form", src)?),
            (None, Some(fp)) => LambdaSource::FixedPoint {
                guess: parse_expr("lambda.fixed_point.pre_interval_guess", &fp.pre_interval_guess)?,
                tol: fp.tol,
                max_iter: fp.max_iter,
                relaxation: fp.relaxation,
            },
            _ => return Err(Error::Spec("[lambda] needs exactly one of closed_form or fixed_point".into())),
        };
        if let Some([a, b]) = spec.criterion.window {
            if !(a <= b) {
                return Err(Error::Spec(format!("criterion window [{a}, {b}] is empty")));
            }
        }
        Ok(Problem { spec, setup, grid_step, lambda_source })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Problem::from_spec(ProblemSpec::load(path)?)
    }

    pub fn kernel(&self) -> &StieltjesKernel {
        &self.setup.kernel
    }

    pub fn r(&self) -> f64 {
        self.setup.kernel.r()
    }

    pub fn t0(&self) -> f64 {
        self.setup.t0
    }

    /// The integration horizon after rounding to whole steps; λ is built on
    /// [t₀ - r, this].
    pub fn horizon(&self) -> f64 {
        self.setup.effective_horizon()
    }

    /// The configured scan window, or the second half of [t₀, T].
    pub fn criterion_window(&self) -> (f64, f64) {
        match self.spec.criterion.window {
            Some([a, b]) => (a, b),
            None => (0.5 * (self.t0() + self.horizon()), self.horizon()),
        }
    }

    /// λ grid points over [t₀, T], used for residual reports.
    pub fn residual_grid(&self) -> Vec<f64> {
        charsolve::uniform(self.t0(), self.horizon(), self.grid_step)
    }

    pub fn solve_lambda(&self) -> Result<LambdaOutcome> {
        let (start, end) = (self.t0() - self.r(), self.horizon());
        match &self.lambda_source {
            LambdaSource::ClosedForm(e) => {
                let lambda = LambdaFunction::closed_form(e.clone(), start, end)?;
                let residual = charsolve::residual(self.kernel(), &lambda, &self.residual_grid())?;
                Ok(LambdaOutcome { lambda, residual, iterations: None })
            }
            LambdaSource::FixedPoint { guess, tol, max_iter, relaxation } => {
                let guess = LambdaFunction::closed_form(guess.clone(), start, self.t0())?;
                let opts = FixedPointOptions {
                    horizon: end,
                    grid_step: self.grid_step,
                    tol: *tol,
                    max_iter: *max_iter,
                    relaxation: *relaxation,
                };
                let FixedPointSolution { lambda, iterations, residual } =
                    charsolve::solve_fixed_point(self.kernel(), &guess, self.t0(), &opts)?;
                Ok(LambdaOutcome { lambda, residual, iterations: Some(iterations) })
            }
        }
    }
}
