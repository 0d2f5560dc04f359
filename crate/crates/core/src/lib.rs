//! # rfde
//!
//! Numerical tools for linear nonautonomous retarded functional
//! differential equations
//!
//! ```text
//! x'(t) = L(t) xₜ = ∫₀ʳ d_θη(t, θ) x(t - θ),   t ≥ t₀,
//! ```
//!
//! and their generalized characteristic equation
//!
//! ```text
//! λ(t) = ∫₀ʳ d_θη(t, θ) exp(-∫_{t-θ}^t λ(s) ds).
//! ```
//!
//! If λ solves the characteristic equation and
//! V(t) = ∫₀ʳ θ |exp(-∫_{t-θ}^t λ)| d_θ|η|(t, θ) stays eventually below 1,
//! then x(t) exp(-∫_{t₀}^t λ) converges for every solution x. This crate
//! builds every piece needed to check that on concrete equations:
//!
//! - [`expr`]: the expression language used for coefficients, delays and kernels.
//! - [`measure`]: η(t, ·) as atoms plus densities, with Stieltjes and total
//!   variation integrals.
//! - [`integrator`]: method of steps with RK4 and Hermite dense output
//!   ([`trajectory`]).
//! - [`charsolve`]: closed-form or Picard-iterated λ and its residual.
//! - [`criterion`]: V(t), its windowed supremum and a verdict.
//! - [`asymptotics`]: the transformed solution y, its limit and decay envelope.
//! - [`problem`] and [`cli`]: TOML problem files and the `rfde` command.
//!
//! ## Example
//!
//! ```
//! use rfde::charsolve::{self, LambdaFunction};
//! use rfde::criterion::criterion_value;
//! use rfde::measure::StieltjesKernel;
//!
//! // x'(t) = ∫₀¹ x(t - θ)/(t - θ) dθ has the characteristic solution λ = 1/t.
//! let kernel = StieltjesKernel::new(1.0)?.density("1/(t-theta)", 0.0, 1.0)?;
//! let lam = LambdaFunction::parse_closed_form("1/t", 1.0, 100.0)?;
//! let grid = charsolve::uniform(2.0, 100.0, 0.5);
//! assert!(charsolve::residual(&kernel, &lam, &grid)? < 1e-8);
//! assert!((criterion_value(&kernel, &lam, 10.0)? - 0.05).abs() < 1e-12);
//! # Ok::<(), rfde::Error>(())
//! ```

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod charsolve;
pub mod cli;
pub mod criterion;
pub mod error;
pub mod expr;
pub mod integrator;
pub mod measure;
pub mod output;
pub mod problem;
pub mod quadrature;
pub mod trajectory;

pub use charsolve::LambdaFunction;
pub use error::{Error, Result};
pub use expr::Expression;
pub use integrator::ProblemSetup;
pub use measure::StieltjesKernel;
pub use problem::{Problem, ProblemSpec};
pub use trajectory::{Segment, Trajectory};
