//! The coupling profile `γ(r)`, its zero-frequency limit, the principal value
//! that sets the Lamb shift, and the thermal transform.
//!
//! ```text
//! cargo run --example spectral_density
//! ```

use std::sync::Arc;

use resonance_dynamics::quadrature::QuadratureConfig;
use resonance_dynamics::spectral::{Direction, SpectralDensity};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for name in ["gaussian", "flat-cutoff"] {
        let s = Arc::new(SpectralDensity::from_name(name, QuadratureConfig::default())?);
        println!("{name}: γ₀ = {:.6}", s.gamma0()?);
        // A hard cutoff at `r = 1` makes the PV log-divergent at `Δ = 1`; stay clear of it.
        for r in [0.25, 0.7, 2.0] {
            println!("  γ({r}) = {:.6}   PV(Δ = {r}) = {:+.6}", s.gamma(r)?, s.pv_integral(r)?);
        }
        // Detailed balance: G(−u) = e^{−βu} G(u).
        let beta = 2.0;
        let g = s.thermal(beta)?;
        for u in [0.3, 0.8] {
            let ratio = g.eval(-u, Direction::NORTH).norm_sqr() / g.eval(u, Direction::NORTH).norm_sqr();
            println!("  β = {beta}, u = {u}: |G(−u)|²/|G(u)|² = {ratio:.6}  e^(−βu) = {:.6}", (-beta * u).exp());
        }
    }
    Ok(())
}
