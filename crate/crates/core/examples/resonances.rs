//! Resonance energies and biorthonormal vectors in both regimes, and the
//! transition matrices linking consecutive segments.
//!
//! ```text
//! cargo run --example resonances
//! ```

use resonance_dynamics::model::Segment;
use resonance_dynamics::resonance::{resonances_isolated, resonances_overlapping, transition_matrix};
use resonance_dynamics::spectral::SpectralDensity;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sigma = 1.0;
    println!("overlapping regime, σ = {sigma}");
    for tau in [0.0, 0.5, 0.99, 1.5, 4.0] {
        let set = resonances_overlapping(sigma, tau)?;
        let e: Vec<String> = set.energies.iter().map(|e| format!("{:+.4}{:+.4}i", e.re, e.im)).collect();
        println!(
            "  τ = {tau:<5} ε = [{}]  biorth {:.1e}  complete {:.1e}",
            e.join(", "),
            set.biorthonormality_residual(),
            set.completeness_residual()
        );
    }

    let a = resonances_overlapping(sigma, 0.3)?;
    let b = resonances_overlapping(sigma, -0.6)?;
    let t = transition_matrix(&a, &b)?;
    println!("\nT(τ = 0.3 → τ = −0.6), off-diagonal size {:.3}", t.max_off_diagonal());
    for row in &t.t {
        let cells: Vec<String> = row.iter().map(|z| format!("{:+.4}{:+.4}i", z.re, z.im)).collect();
        println!("  {}", cells.join("  "));
    }

    let spectral = SpectralDensity::gaussian();
    let beta = 1.5;
    println!("\nisolated regime, λ = 0.05, β = {beta}");
    for gap in [0.8, 2.0, -1.2] {
        let set = resonances_isolated(&Segment::new(gap, 0.05, 1.0)?, beta, &spectral)?;
        let e: Vec<String> = set.energies.iter().map(|e| format!("{:+.3e}{:+.3e}i", e.re, e.im)).collect();
        println!("  Δ = {gap:<5} ε = [{}]", e.join(", "));
    }
    Ok(())
}
