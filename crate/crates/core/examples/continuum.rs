//! A smoothly varying gap: the continuum amplitude with one jump kept,
//! against path sums over ever finer piecewise-constant discretizations.
//!
//! ```text
//! cargo run --release --example continuum
//! ```

use std::sync::Arc;

use num_complex::Complex64;
use resonance_dynamics::continuum::{continuum_value, GapSchedule, LinearRamp, Sampling};
use resonance_dynamics::model::{Observable, SystemState};
use resonance_dynamics::pathsum::expectation_truncated;
use resonance_dynamics::spectral::SpectralDensity;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spectral = Arc::new(SpectralDensity::gaussian());
    let coupling = GapSchedule::coupling_for_sigma(1.0, &spectral)?;
    let horizon = 4.0;
    let schedule = GapSchedule::new(Arc::new(LinearRamp { start: 0.1, rate: 0.05 }), coupling, spectral, horizon)?;

    let rho = SystemState::new([
        [Complex64::new(0.7, 0.0), Complex64::new(0.2, 0.3)],
        [Complex64::new(0.2, -0.3), Complex64::new(0.3, 0.0)],
    ])?;
    let a = Observable::pauli_x();

    let c = continuum_value(&schedule, horizon, &rho, &a)?;
    println!("σ = {:.3}, τ ∈ [{:.2}, {:.2}], t = {horizon}", schedule.sigma(), schedule.tau(0.0), schedule.tau(horizon));
    println!("continuum: {:+.10}  (3→4 jump {:+.2e}, 4→3 jump {:+.2e})", c.value.re, c.jump_3_to_4.norm(), c.jump_4_to_3.norm());
    // One jump on both sides, matching the continuum truncation.
    for n in [25, 50, 100, 200] {
        let p = schedule.discretize(horizon, n, Sampling::RightEndpoint)?;
        let e = expectation_truncated(&p, &rho, &a, 1)?;
        println!("n = {n:>3}: {:+.10}  |Δ| = {:.2e}", e.value.re, (e.value - c.value).norm());
    }
    Ok(())
}
