//! A single sudden level crossing: the excited population rises, jumps at the
//! crossing time, then relaxes toward the new equilibrium.
//!
//! ```text
//! cargo run --example crossing
//! ```

use resonance_dynamics::model::Regime;
use resonance_dynamics::scenarios::{
    crossing_limits, crossing_probability, gibbs_excited, isolated_diagnostics, overlapping_closed_form, CrossingSpec,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = CrossingSpec::new(0.03, 0.04, 1.0, 0.1, 1.0, Regime::Overlapping)?;
    let sigma = spec.sigma()?;
    println!("overlapping: σ = {sigma:.5}, t_c = {}", spec.t_c);
    println!("{:>6}  {:>12}  {:>12}", "t", "path sum", "closed form");
    for t in [0.0, 0.25, 0.5, 1.0, 2.0, 10.0, 40.0] {
        let p = crossing_probability(&spec, t)?;
        println!("{t:>6}  {:>12.8}  {:>12.8}", p.value, overlapping_closed_form(sigma, spec.t_c, t));
    }
    let (before, after) = crossing_limits(&spec)?;
    println!("jump at t_c: {:.6} → {:.6}", before.value, after.value);

    let iso = CrossingSpec::new(1.0, 1.5, 20.0, 0.05, 1.0, Regime::Isolated)?;
    let d = isolated_diagnostics(&iso)?;
    println!("\nisolated: rate πλ²γ(Δ₁) = {:.6e}, resonance rate = {:.6e}", d.rate, d.rate_resonance);
    for t in [0.0, 5.0, 20.0, 200.0, 5000.0] {
        println!("  t = {t:>6}: p = {:.8}", crossing_probability(&iso, t)?.value);
    }
    println!("  Gibbs populations: before {:.8}, after {:.8}", gibbs_excited(1.0, 1.0), d.gibbs_after);
    Ok(())
}
