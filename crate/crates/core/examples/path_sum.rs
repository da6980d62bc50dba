//! Dominant-order expectation values of a piecewise-constant protocol, with
//! the jump-truncated sums converging to the full enumeration.
//!
//! ```text
//! cargo run --example path_sum
//! ```

use std::sync::Arc;

use num_complex::Complex64;
use resonance_dynamics::model::{Observable, Protocol, Regime, Segment, SystemState};
use resonance_dynamics::pathsum::{expectation_full, expectation_truncated};
use resonance_dynamics::spectral::SpectralDensity;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lambda = 0.3;
    let gaps = [0.05, 0.12, -0.04, 0.2, 0.1, -0.15, 0.02, 0.08];
    let segments = gaps.iter().map(|&g| Segment::new(g, lambda, 0.6)).collect::<Result<Vec<_>, _>>()?;
    let protocol = Protocol::new(segments, 1.0, Arc::new(SpectralDensity::gaussian()), Regime::Overlapping)?;

    let rho = SystemState::new([
        [Complex64::new(0.7, 0.0), Complex64::new(0.2, 0.3)],
        [Complex64::new(0.2, -0.3), Complex64::new(0.3, 0.0)],
    ])?;
    let a = Observable::pauli_x();

    let full = expectation_full(&protocol, &rho, &a)?;
    println!("N = {}, t = {:.2}", protocol.len(), protocol.total_duration());
    println!("full: {:+.12}  ({} paths, remainder {})", full.value.re, full.paths, full.remainder);
    for k in 0..protocol.len() {
        let e = expectation_truncated(&protocol, &rho, &a, k)?;
        println!("K = {k}: {:+.12}  |error| = {:.2e}", e.value.re, (e.value - full.value).norm());
    }

    // The trace is carried by the constant paths alone.
    let trace = expectation_full(&protocol, &rho, &Observable::identity())?;
    println!("⟨1⟩ = {:.15}", trace.value.re);
    Ok(())
}
