//! Parse coefficient expressions and evaluate them at (t, θ).
//!
//! Run with `cargo run --example expressions`.

use rfde::expr::{Expression, Var};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for src in ["1/(t+2)", "1/(t-theta)", "2^3^2", "-t^2", "exp(-0.5*t)*cos(t)", "sqrt(t) + abs(theta)"] {
        let e = Expression::parse(src)?;
        let theta = if e.uses(Var::Theta) { Some(0.25) } else { None };
        let v = e.evaluate(3.0, theta)?;
        println!("{src:<24} parsed as {e:<40} at t=3{}: {v}", if theta.is_some() { ", theta=0.25" } else { "" });
    }

    match Expression::parse("1 + * t") {
        Ok(_) => unreachable!(),
        Err(err) => println!("syntax error is reported: {err}"),
    }
    let e = Expression::parse("1/(t-1)")?;
    println!("evaluation error is reported: {}", e.evaluate(1.0, None).unwrap_err());
    Ok(())
}
