//! The decay criterion
//!
//! ```text
//! V(t) = ∫₀ʳ θ |exp(-∫_{t-θ}^t λ(s) ds)| d_θ|η|(t, θ)
//! ```
//!
//! and a finite-window estimate of its limit superior. A window can only
//! give evidence, so the report always carries the window it was computed
//! on.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::charsolve::LambdaFunction;
use crate::error::{Error, Result};
use crate::measure::StieltjesKernel;
use crate::output::fmt_f64;

pub const DEFAULT_MARGIN: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl Verdict {
    /// Process exit status: 0 holds, 2 fails, 3 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Holds => 0,
            Verdict::Fails => 2,
            Verdict::Inconclusive => 3,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub samples: Vec<(f64, f64)>,
    /// Largest sampled V.
    pub mu_hat: f64,
    pub window: (f64, f64),
    pub verdict: Verdict,
    pub margin: f64,
}

impl CriterionReport {
    pub fn summary(&self) -> String {
        format!(
            "verdict={} mu_hat={} window=[{}, {}] samples={} margin={}",
            self.verdict,
            fmt_f64(self.mu_hat),
            self.window.0,
            self.window.1,
            self.samples.len(),
            self.margin
        )
    }

    /// CSV with columns `t,V`.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "t,V")?;
        for &(t, v) in &self.samples {
            writeln!(w, "{},{}", fmt_f64(t), fmt_f64(v))?;
        }
        Ok(())
    }
}

/// V(t) for the candidate λ.
pub fn criterion_value(kernel: &StieltjesKernel, lam: &LambdaFunction, t: f64) -> Result<f64> {
    let lt = lam.cumulative(t)?;
    kernel.try_total_variation_integral(t, |theta| Ok(theta * (lam.cumulative(t - theta)? - lt).exp().norm()))
}

/// Samples V at `n_samples` equispaced points of `window` (both ends
/// included) and classifies the result.
///
/// The verdict is `Holds` when the maximum stays below 1 - margin and V is
/// either below 0.5 throughout or non-increasing over the last quarter of
/// the window; `Fails` when V ≥ 1 on the whole last quarter; otherwise
/// `Inconclusive`.
pub fn scan(
    kernel: &StieltjesKernel,
    lam: &LambdaFunction,
    window: (f64, f64),
    n_samples: usize,
    margin: f64,
) -> Result<CriterionReport> {
    let (a, b) = window;
    if !(a.is_finite() && b.is_finite() && a <= b) || n_samples == 0 {
        return Err(Error::InvalidSetup(format!("bad scan window [{a}, {b}] with {n_samples} samples")));
    }
    if !(0.0..1.0).contains(&margin) {
        return Err(Error::InvalidSetup(format!("margin {margin} must lie in [0, 1)")));
    }
    let times: Vec<f64> = if n_samples == 1 {
        vec![a]
    } else {
        (0..n_samples).map(|i| if i + 1 == n_samples { b } else { a + (b - a) * i as f64 / (n_samples - 1) as f64 }).collect()
    };
    let values: Result<Vec<f64>> = times.par_iter().map(|&t| criterion_value(kernel, lam, t)).collect();
    let samples: Vec<(f64, f64)> = times.into_iter().zip(values?).collect();
    let mu_hat = samples.iter().map(|s| s.1).fold(0.0, f64::max);

    let tail_start = a + 0.75 * (b - a);
    let mut tail: Vec<f64> = samples.iter().filter(|s| s.0 >= tail_start).map(|s| s.1).collect();
    if tail.is_empty() {
        tail.push(samples.last().unwrap().1);
    }
    let non_increasing = tail.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].max(1.0));
    let verdict = if mu_hat < 1.0 - margin && (mu_hat < 0.5 || non_increasing) {
        Verdict::Holds
    } else if tail.iter().all(|&v| v >= 1.0) {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    };
    Ok(CriterionReport { samples, mu_hat, window, verdict, margin })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lambert_bisect(b: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, b.max(1.0));
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return mid;
            }
            if mid * mid.exp() < b {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }

    fn autonomous(b: f64) -> (StieltjesKernel, LambdaFunction, f64) {
        let root = lambert_bisect(b);
        let k = StieltjesKernel::new(1.0).unwrap().atom("1", &format!("{b}")).unwrap();
        let lam = LambdaFunction::parse_closed_form(&format!("{root:?}"), -1.0, 50.0).unwrap();
        (k, lam, root)
    }

    #[test]
    fn variable_delay_value() {
        let k = StieltjesKernel::new(1.0).unwrap().atom("1", "1/(t+2-1)").unwrap();
        let lam = LambdaFunction::parse_closed_form("1/(t+2)", -1.0, 100.0).unwrap();
        assert!((criterion_value(&k, &lam, 8.0).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn distributed_value() {
        let k = StieltjesKernel::new(1.0).unwrap().density("1/(t-theta)", 0.0, 1.0).unwrap();
        let lam = LambdaFunction::parse_closed_form("1/t", 1.0, 100.0).unwrap();
        assert!((criterion_value(&k, &lam, 10.0).unwrap() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn zero_kernel_value() {
        let k = StieltjesKernel::new(1.0).unwrap();
        let lam = LambdaFunction::parse_closed_form("1", -1.0, 5.0).unwrap();
        assert_eq!(criterion_value(&k, &lam, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn distributed_scan_holds() {
        let k = StieltjesKernel::new(1.0).unwrap().density("1/(t-theta)", 0.0, 1.0).unwrap();
        let lam = LambdaFunction::parse_closed_form("1/t", 1.0, 100.0).unwrap();
        let rep = scan(&k, &lam, (2.0, 100.0), 200, DEFAULT_MARGIN).unwrap();
        assert_eq!(rep.samples.len(), 200);
        assert!((rep.mu_hat - 0.25).abs() < 1e-14);
        assert_eq!(rep.samples[0].1, rep.mu_hat);
        assert_eq!(rep.verdict, Verdict::Holds);
    }

    #[test]
    fn autonomous_scans() {
        let (k, lam, root) = autonomous(0.1);
        let rep = scan(&k, &lam, (0.0, 50.0), 20, DEFAULT_MARGIN).unwrap();
        for &(_, v) in &rep.samples {
            assert!((v - root).abs() < 1e-10);
        }
        assert_eq!(rep.verdict, Verdict::Holds);

        let (k, lam, root) = autonomous(3.0);
        let rep = scan(&k, &lam, (0.0, 50.0), 20, DEFAULT_MARGIN).unwrap();
        assert!((rep.mu_hat - root).abs() < 1e-10);
        assert_eq!(rep.verdict, Verdict::Fails);
        assert_eq!(rep.verdict.exit_code(), 2);
    }

    #[test]
    fn inconclusive_when_near_one_or_rising() {
        // V ≡ λ₀ = 0.99: below 1 but inside the margin.
        let b = 0.99 * 0.99f64.exp();
        let (k, lam, _) = autonomous(b);
        let rep = scan(&k, &lam, (0.0, 10.0), 10, DEFAULT_MARGIN).unwrap();
        assert_eq!(rep.verdict, Verdict::Inconclusive);

        // V(t) = 0.6 + 0.3 sin(t) oscillates above 0.5 without settling.
        let k = StieltjesKernel::new(1.0).unwrap().atom("1", "0.6+0.3*sin(t)").unwrap();
        let lam = LambdaFunction::parse_closed_form("0", -1.0, 40.0).unwrap();
        let rep = scan(&k, &lam, (0.0, 40.0), 400, DEFAULT_MARGIN).unwrap();
        assert_eq!(rep.verdict, Verdict::Inconclusive);
        assert_eq!(rep.verdict.exit_code(), 3);
    }

    #[test]
    fn bad_windows() {
        let (k, lam, _) = autonomous(0.1);
        assert!(scan(&k, &lam, (5.0, 1.0), 10, DEFAULT_MARGIN).is_err());
        assert!(scan(&k, &lam, (0.0, 1.0), 0, DEFAULT_MARGIN).is_err());
        assert!(scan(&k, &lam, (0.0, 100.0), 10, DEFAULT_MARGIN).is_err());
    }

    #[test]
    fn csv_and_summary() {
        let (k, lam, _) = autonomous(0.1);
        let rep = scan(&k, &lam, (0.0, 1.0), 3, DEFAULT_MARGIN).unwrap();
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 4);
        assert!(rep.summary().starts_with("verdict=holds mu_hat="));
    }
}
