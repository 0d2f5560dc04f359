//! Build Stieltjes kernels from atoms and densities and integrate against them.
//!
//! Run with `cargo run --example kernel_integrals`.

use num_complex::Complex64;
use rfde::measure::StieltjesKernel;

fn main() -> rfde::Result<()> {
    // A point delay of 1 with mass 1/(t+1).
    let atom = StieltjesKernel::new(1.0)?.atom("1", "1/(t+1)")?;
    let v = atom.stieltjes_integral(8.0, |theta| Complex64::new(theta, 0.0))?;
    println!("atom at t=8, f(θ)=θ:            {v}  (expected 1/9)");

    // A density 1/(t-θ) on [0, 1].
    let dens = StieltjesKernel::new(1.0)?.density("1/(t-theta)", 0.0, 1.0)?;
    let v = dens.stieltjes_integral(10.0, |_| Complex64::new(1.0, 0.0))?;
    println!("density at t=10, f ≡ 1:          {v}  (expected ln(10/9) = {})", (10.0f64 / 9.0).ln());

    // Signed masses: the total variation counts |mass|.
    let signed = StieltjesKernel::new(2.0)?.atom("0.5", "-3")?.atom("2", "1")?.density("-1", 0.0, 2.0)?;
    let s = signed.stieltjes_integral(0.0, |_| Complex64::new(1.0, 0.0))?;
    let tv = signed.total_variation_integral(0.0, |_| 1.0)?;
    println!("signed kernel: ∫dη = {s}, ∫d|η| = {tv}  (expected -4 and 6)");
    Ok(())
}
