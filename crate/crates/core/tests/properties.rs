//! Randomized and structural properties across modules.

use num_complex::Complex64;
use proptest::prelude::*;
use rfde::asymptotics::{derivation_residual, tail_stats, transform_y, untransform};
use rfde::charsolve::{self, LambdaFunction};
use rfde::criterion::{criterion_value, scan, DEFAULT_MARGIN};
use rfde::expr::Expression;
use rfde::integrator::{self, ProblemSetup};
use rfde::measure::StieltjesKernel;
use rfde::trajectory::Trajectory;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn solve(kernel: StieltjesKernel, t0: f64, horizon: f64, initial: &str, step: f64) -> Trajectory {
    let setup = ProblemSetup::new(kernel, t0, horizon, Expression::parse(initial).unwrap(), step).unwrap();
    integrator::solve(&setup).unwrap()
}

fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
    (a - b).norm() <= rel * a.norm().max(b.norm()).max(1e-300)
}

/// Random expression source in t and θ.
fn expression_source() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("t".to_string()),
        Just("theta".to_string()),
        (0.1f64..10.0).prop_map(|v| format!("{v}")),
        (1u32..9).prop_map(|v| v.to_string()),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), prop::sample::select(vec!["+", "-", "*", "/"]))
                .prop_map(|(a, b, op)| format!("({a}){op}({b})")),
            (inner.clone(), 0u32..4).prop_map(|(a, k)| format!("({a})^{k}")),
            inner.clone().prop_map(|a| format!("-({a})")),
            (inner, prop::sample::select(vec!["sin", "cos", "exp", "abs"])).prop_map(|(a, f)| format!("{f}({a})")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplication_binds_tighter(a in -50.0f64..50.0, b in -50.0f64..50.0, k in -50.0f64..50.0) {
        let e = Expression::parse(&format!("{a:?}+{b:?}*{k:?}")).unwrap();
        prop_assert_eq!(e.evaluate_real(0.0, None).unwrap(), a + b * k);
    }

    #[test]
    fn print_parse_round_trip(src in expression_source(), seed in 0u64..1000) {
        let e = Expression::parse(&src).unwrap();
        let again = Expression::parse(&e.to_string()).unwrap();
        prop_assert_eq!(&again, &e);
        for i in 0..100 {
            let t = -3.0 + 0.061 * i as f64 + seed as f64 * 1e-4;
            let theta = 0.0097 * i as f64;
            match (e.evaluate(t, Some(theta)), again.evaluate(t, Some(theta))) {
                (Ok(u), Ok(v)) => prop_assert!(u == v || close(u, v, 1e-15), "{} vs {} at t={}", u, v, t),
                (Err(_), Err(_)) => {}
                (u, v) => prop_assert!(false, "{:?} vs {:?}", u, v),
            }
        }
    }

    #[test]
    fn measure_is_linear(alpha in -5.0f64..5.0, beta in -5.0f64..5.0, t in 0.0f64..20.0, mass in -3.0f64..3.0) {
        let k = StieltjesKernel::new(1.5).unwrap()
            .atom("0.7", &format!("{mass:?}*cos(t)")).unwrap()
            .density("exp(-theta)*t", 0.0, 1.5).unwrap();
        let f = |s: f64| c(s.sin() + 1.0);
        let g = |s: f64| Complex64::new(s * s, -s);
        let lhs = k.stieltjes_integral(t, |s| alpha * f(s) + beta * g(s)).unwrap();
        let rhs = alpha * k.stieltjes_integral(t, f).unwrap() + beta * k.stieltjes_integral(t, g).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn atoms_only_sum_is_exact(d1 in 0.0f64..2.0, d2 in 0.0f64..2.0, m1 in -4.0f64..4.0, m2 in -4.0f64..4.0) {
        let k = StieltjesKernel::new(2.0).unwrap()
            .atom(&format!("{d1:?}"), &format!("{m1:?}")).unwrap()
            .atom(&format!("{d2:?}"), &format!("{m2:?}")).unwrap();
        let v = k.stieltjes_integral(0.0, |s| c(s.exp())).unwrap();
        prop_assert_eq!(v, c(m1 * d1.exp()) + c(m2 * d2.exp()));
        prop_assert_eq!(k.total_variation_integral(0.0, |_| 1.0).unwrap(), m1.abs() + m2.abs());
    }

    #[test]
    fn triangle_inequality(t in 0.0f64..10.0, mass in -3.0f64..3.0) {
        let k = StieltjesKernel::new(1.0).unwrap()
            .atom("0.3", &format!("{mass:?}")).unwrap()
            .density("sin(5*theta+t)", 0.0, 1.0).unwrap();
        let f = |s: f64| Complex64::new((3.0 * s).cos(), s);
        let lhs = k.stieltjes_integral(t, f).unwrap().norm();
        let rhs = k.total_variation_integral(t, |s| f(s).norm()).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn hermite_reproduces_cubics(a in -2.0f64..2.0, b in -2.0f64..2.0, cc in -2.0f64..2.0, d in -2.0f64..2.0, q in 0.0f64..1.0) {
        let p = |t: f64| (c(((a * t + b) * t + cc) * t + d), c((3.0 * a * t + 2.0 * b) * t + cc));
        let knots: Vec<f64> = (0..=12).map(|i| -1.0 + 0.25 * i as f64).collect();
        let tr = Trajectory::from_fn(0.0, knots, p).unwrap();
        for i in 0..12 {
            let t = -1.0 + 0.25 * (i as f64 + q);
            let (v, dv) = p(t);
            prop_assert!((tr.eval(t).unwrap() - v).norm() <= 1e-13 * (1.0 + v.norm()));
            prop_assert!((tr.derivative(t).unwrap() - dv).norm() <= 1e-12 * (1.0 + dv.norm()));
        }
    }

    #[test]
    fn segment_matches_trajectory(t in 0.0f64..3.0, s in -1.0f64..0.0) {
        let kernel = StieltjesKernel::new(1.0).unwrap().atom("1", "-0.5").unwrap();
        let x = solve(kernel, 0.0, 3.0, "cos(t)", 1.0 / 16.0);
        let seg = x.segment_at(t).unwrap();
        prop_assert_eq!(seg.eval(s).unwrap(), x.eval(t + s).unwrap());
    }

    #[test]
    fn lambda_integral_is_additive(a in 1.0f64..40.0, b in 1.0f64..40.0, m in 1.0f64..40.0) {
        let lam = LambdaFunction::parse_closed_form("1/t + 0.1*sin(t)", 1.0, 40.0).unwrap();
        let whole = lam.integral(a, b).unwrap();
        let split = lam.integral(a, m).unwrap() + lam.integral(m, b).unwrap();
        prop_assert!((whole - split).norm() <= 1e-12 * (1.0 + whole.norm()));
    }
}

#[test]
fn solution_operator_is_linear() {
    let kernel = StieltjesKernel::new(1.0)
        .unwrap()
        .atom("0.5+0.25*sin(t)", "-1")
        .unwrap()
        .density("cos(theta)/(1+t)", 0.0, 1.0)
        .unwrap();
    let xa = solve(kernel.clone(), 0.0, 8.0, "exp(t)", 1.0 / 32.0);
    let xb = solve(kernel.clone(), 0.0, 8.0, "sin(3*t)", 1.0 / 32.0);
    let xab = solve(kernel, 0.0, 8.0, "1.5*exp(t)-0.5*sin(3*t)", 1.0 / 32.0);
    for i in xab.forward_indices() {
        let expected = 1.5 * xa.values()[i] - 0.5 * xb.values()[i];
        assert!((xab.values()[i] - expected).norm() <= 1e-9 * (1.0 + expected.norm()), "t = {}", xab.knots()[i]);
    }
}

#[test]
fn fourth_order_convergence() {
    // x' = x(t-1)/(t+1) with x ≡ 1 on [-1, 0] gives x = 1 + ln(1 + t) on [0, 1].
    let kernel = StieltjesKernel::new(1.0).unwrap().atom("1", "1/(t+1)").unwrap();
    let errors: Vec<f64> = [16.0, 32.0, 64.0]
        .iter()
        .map(|n| {
            let x = solve(kernel.clone(), 0.0, 1.0, "1", 1.0 / n);
            x.forward_indices().map(|i| (x.values()[i].re - 1.0 - (1.0 + x.knots()[i]).ln()).abs()).fold(0.0, f64::max)
        })
        .collect();
    for w in errors.windows(2) {
        let p = (w[0] / w[1]).log2();
        assert!((3.5..=4.5).contains(&p), "exponent {p} from {errors:?}");
    }
}

#[test]
fn ansatz_solution_is_reproduced() {
    // x = exp(W(0.1) t) solves x' = 0.1 x(t - 1).
    let w = 0.09127652716086226;
    let kernel = StieltjesKernel::new(1.0).unwrap().atom("1", "0.1").unwrap();
    let x = solve(kernel, 0.0, 10.0, &format!("exp({w:?}*t)"), 1.0 / 64.0);
    let tol = 1e-9;
    for i in x.forward_indices() {
        let exact = (w * x.knots()[i]).exp();
        assert!((x.values()[i].re - exact).abs() <= 10.0 * f64::EPSILON * exact + tol);
    }
}

#[test]
fn constant_coefficients_have_constant_lambda() {
    let w = 0.09127652716086226;
    let kernel = StieltjesKernel::new(1.0).unwrap().atom("1", "0.1").unwrap();
    let lam = LambdaFunction::closed_form(Expression::constant(w), -1.0, 100.0).unwrap();
    assert!(charsolve::residual(&kernel, &lam, &charsolve::uniform(0.0, 100.0, 0.125)).unwrap() < 1e-10);
    for i in 0..20 {
        let t = 5.0 * i as f64;
        assert!((criterion_value(&kernel, &lam, t).unwrap() - w).abs() < 1e-10);
    }
}

#[test]
fn wider_window_never_lowers_the_estimate() {
    let kernel = StieltjesKernel::new(1.0).unwrap().density("1/(t-theta)", 0.0, 1.0).unwrap();
    let lam = LambdaFunction::parse_closed_form("1/t", 1.0, 100.0).unwrap();
    let wide = scan(&kernel, &lam, (2.0, 100.0), 99, DEFAULT_MARGIN).unwrap();
    let narrow = scan(&kernel, &lam, (10.0, 100.0), 91, DEFAULT_MARGIN).unwrap();
    assert!(wide.mu_hat >= narrow.mu_hat);
    assert!(criterion_value(&kernel, &lam, 100.0).unwrap() < 0.01);
    assert!(criterion_value(&kernel, &lam, 100.0).unwrap() < criterion_value(&kernel, &lam, 2.0).unwrap());
}

#[test]
fn derivative_identity_holds_along_solutions() {
    let kernel = StieltjesKernel::new(1.0).unwrap().density("1/(t-theta)", 0.0, 1.0).unwrap();
    let x = solve(kernel.clone(), 2.0, 40.0, "1", 1.0 / 64.0);
    let lam = LambdaFunction::parse_closed_form("1/t", 1.0, 40.0).unwrap();
    let y = transform_y(&x, &lam).unwrap();
    for i in 0..20 {
        let t = 2.5 + 1.8 * i as f64;
        let res = derivation_residual(&kernel, &y, &lam, t).unwrap().norm();
        assert!(res < 1e-6, "residual {res} at t = {t}");
    }

    let back = untransform(&y, &lam).unwrap();
    for i in x.forward_indices() {
        assert!(close(back.values()[i], x.values()[i], 1e-12));
    }
}

#[test]
fn tail_variation_shrinks() {
    let kernel = StieltjesKernel::new(1.0).unwrap().atom("1", "0.1").unwrap();
    let x = solve(kernel, 0.0, 40.0, "1+sin(3*t)", 1.0 / 32.0);
    let lam = LambdaFunction::closed_form(Expression::constant(0.09127652716086226), -1.0, 40.0).unwrap();
    let y = transform_y(&x, &lam).unwrap();
    let (half, _) = tail_stats(&y, 20.0);
    let (quarter, _) = tail_stats(&y, 30.0);
    assert!(half > quarter, "{half} vs {quarter}");
}
