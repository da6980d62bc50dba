//! Independent oracles: the dominant term as an ordered product of matrix
//! exponentials, and principal values by symmetric excision.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

use resonance_dynamics::model::{apply_observable, vectorize_state, Observable, Protocol, Regime, Segment, SystemState, SystemVector};
use resonance_dynamics::pathsum::{expectation_full, path_value, Path, PathSum};
use resonance_dynamics::quadrature::{integrate_real, QuadratureConfig};
use resonance_dynamics::resonance::{level_shift_overlapping, resonance_sets};
use resonance_dynamics::spectral::{sigma_from_gamma0, SpectralDensity};

fn to_dvector(v: &SystemVector) -> DVector<Complex64> {
    DVector::from_iterator(4, v.0.iter().copied())
}

/// `⟨v0, e^{it₁Λ¹} ⋯ e^{it_NΛᴺ} a⟩` with each `Λʲ` a 4×4 matrix.
fn exponential_product(generators: &[(DMatrix<Complex64>, f64)], v0: &SystemVector, a: &SystemVector) -> Complex64 {
    let mut acc = to_dvector(a);
    for (lambda, t) in generators.iter().rev() {
        acc = (lambda * Complex64::new(0.0, *t)).exp() * acc;
    }
    to_dvector(v0).dotc(&acc)
}

fn explicit_generators(protocol: &Protocol) -> Vec<(DMatrix<Complex64>, f64)> {
    protocol
        .segments()
        .iter()
        .map(|s| {
            let m = level_shift_overlapping(protocol.sigma(s), s.gap).m;
            (DMatrix::from_fn(4, 4, |i, j| m[i][j]), s.duration)
        })
        .collect()
}

fn spectral() -> Arc<SpectralDensity> {
    Arc::new(SpectralDensity::gaussian())
}

fn state(x: f64, y: f64, z: f64) -> SystemState {
    let n = (x * x + y * y + z * z).sqrt().max(1.0);
    let (x, y, z) = (x / n, y / n, z / n);
    SystemState::new([
        [Complex64::new(0.5 * (1.0 + z), 0.0), Complex64::new(0.5 * x, -0.5 * y)],
        [Complex64::new(0.5 * x, 0.5 * y), Complex64::new(0.5 * (1.0 - z), 0.0)],
    ])
    .unwrap()
}

#[test]
fn crossing_protocol_against_exponentials() {
    let lambda = 0.3;
    let p = Protocol::new(
        vec![Segment::new(0.05, lambda, 1.3).unwrap(), Segment::new(-0.07, lambda, 2.1).unwrap()],
        1.0,
        spectral(),
        Regime::Overlapping,
    )
    .unwrap();
    let rho = SystemState::pure_spin(false);
    let a = Observable::projector(false);
    let oracle = exponential_product(&explicit_generators(&p), &vectorize_state(&rho), &apply_observable(&a));
    let sum = expectation_full(&p, &rho, &a).unwrap().value;
    assert!((oracle - sum).norm() < 1e-12, "{oracle} vs {sum}");
    // p = ½ + ½e^{−2σt} for the excited state after the crossing.
    let sigma = sigma_from_gamma0(lambda, 2.0 * PI);
    assert!((sum.re - 0.5 - 0.5 * (-2.0 * sigma * 3.4f64).exp()).abs() < 1e-12);
}

#[test]
fn isolated_protocol_against_spectral_sum() {
    // No explicit matrix is available here; rebuild Λ = Σ ε|η⟩⟨η̃| per segment.
    let p = Protocol::new(
        vec![
            Segment::new(1.0, 0.05, 30.0).unwrap(),
            Segment::new(-1.5, 0.05, 20.0).unwrap(),
            Segment::new(0.8, 0.05, 10.0).unwrap(),
        ],
        1.3,
        spectral(),
        Regime::Isolated,
    )
    .unwrap();
    let generators: Vec<(DMatrix<Complex64>, f64)> = resonance_sets(&p)
        .unwrap()
        .iter()
        .zip(p.segments())
        .map(|(set, seg)| {
            let mut m = DMatrix::zeros(4, 4);
            for r in 0..4 {
                m += to_dvector(&set.right[r]) * to_dvector(&set.left[r]).adjoint() * set.energies[r];
            }
            (m, seg.duration)
        })
        .collect();
    let rho = state(0.3, -0.2, 0.5);
    let a = Observable::pauli_z();
    let oracle = exponential_product(&generators, &vectorize_state(&rho), &apply_observable(&a));
    let sum = expectation_full(&p, &rho, &a).unwrap().value;
    assert!((oracle - sum).norm() < 1e-10, "{oracle} vs {sum}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn overlapping_path_sum_is_a_product_of_exponentials(
        lambda in 0.15f64..0.6,
        taus in prop::collection::vec(-3.0f64..3.0, 1..7),
        durations in prop::collection::vec(0.0f64..2.5, 7),
        bloch in (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0),
        obs in (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0),
    ) {
        prop_assume!(taus.iter().all(|t| (t * t - 1.0).abs() > 0.05));
        let sigma = sigma_from_gamma0(lambda, 2.0 * PI);
        let segments: Vec<Segment> = taus.iter().zip(&durations).map(|(t, d)| Segment::new(t * sigma, lambda, *d).unwrap()).collect();
        let p = Protocol::new(segments, 1.0, spectral(), Regime::Overlapping).unwrap();
        let rho = state(bloch.0, bloch.1, bloch.2);
        let b = Complex64::new(obs.2, obs.3);
        let a = Observable::new([[Complex64::new(obs.0, 0.0), b], [b.conj(), Complex64::new(obs.1, 0.0)]]).unwrap();
        let oracle = exponential_product(&explicit_generators(&p), &vectorize_state(&rho), &apply_observable(&a));
        let sum = expectation_full(&p, &rho, &a).unwrap().value;
        prop_assert!((oracle - sum).norm() < 1e-10, "{} vs {}", oracle, sum);
    }
}

/// Every one of the `4ᴺ` label sequences with at most `k` jumps, summed directly.
fn brute_force_truncated(sum: &PathSum, v0: &SystemVector, a: &SystemVector, k: usize) -> Complex64 {
    let n = sum.len();
    (0..4usize.pow(n as u32))
        .map(|code| Path::new((0..n).map(|j| ((code >> (2 * j)) & 3) as u8 + 1).collect()).unwrap())
        .filter(|p| p.jump_count() <= k)
        .map(|p| path_value(&p, sum.sets(), sum.transitions(), sum.durations(), v0, a).unwrap().value)
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn truncated_sums_match_enumeration_at_every_order(
        lambda in 0.15f64..0.6,
        taus in prop::collection::vec(-3.0f64..3.0, 1..6),
        durations in prop::collection::vec(0.0f64..2.5, 6),
        bloch in (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0),
    ) {
        prop_assume!(taus.iter().all(|t| (t * t - 1.0).abs() > 0.05));
        let sigma = sigma_from_gamma0(lambda, 2.0 * PI);
        let segments: Vec<Segment> = taus.iter().zip(&durations).map(|(t, d)| Segment::new(t * sigma, lambda, *d).unwrap()).collect();
        let p = Protocol::new(segments, 1.0, spectral(), Regime::Overlapping).unwrap();
        let sum = PathSum::new(&p).unwrap();
        let v0 = vectorize_state(&state(bloch.0, bloch.1, bloch.2));
        let a = apply_observable(&Observable::pauli_x());
        for k in 0..p.len() {
            let dp = sum.truncated(&v0, &a, k).unwrap().value;
            let brute = brute_force_truncated(&sum, &v0, &a, k);
            prop_assert!((dp - brute).norm() < 1e-12, "K = {}: {} vs {}", k, dp, brute);
        }
    }
}

/// `PV ∫ f(r)/(r²−1) dr` for even `f` by cutting `(1−ε, 1+ε)` out of the half line.
///
/// The cut leaves an error linear in `ε` with an `ε³` correction, so one
/// Richardson step at `ε` and `ε/2` recovers the principal value to `O(ε³)`.
fn excised(f: impl Fn(f64) -> f64 + Copy, eps: f64, far: f64) -> f64 {
    let cfg = QuadratureConfig { abs_tol: 1e-15, rel_tol: 1e-13, max_intervals: 20_000 };
    let g = move |r: f64| f(r) / (r * r - 1.0);
    let cut = |e: f64| {
        let pieces = [(0.0, 1.0 - e), (1.0 + e, 2.0), (2.0, far)];
        2.0 * pieces.iter().map(|&(a, b)| integrate_real(g, a, b, &cfg).unwrap().0).sum::<f64>()
    };
    2.0 * cut(eps / 2.0) - cut(eps)
}

#[test]
fn pv_integral_matches_excision() {
    let s = SpectralDensity::gaussian();
    for delta in [0.3, 1.0, 2.5, -1.7] {
        let f = |r: f64| s.gamma(r * delta).unwrap();
        let oracle = excised(f, 1e-3, 12.0 / delta.abs());
        let v = s.pv_integral(delta).unwrap();
        assert!((v - oracle).abs() < 1e-8 * oracle.abs().max(1.0), "Δ = {delta}: {v} vs {oracle}");
    }
}

#[test]
fn pv_of_lorentzian_by_excision() {
    let oracle = excised(|r| 1.0 / (r * r + 1.0), 1e-3, 1e6);
    assert!((oracle + PI / 2.0).abs() < 1e-8, "{oracle}");
}
