//! Resonance data of one segment: energies `ε(r)` and biorthonormal pairs
//! `(η(r), η̃(r))`, `r = 1..4`, and the transition matrices between segments.
//!
//! Labels `r = 1..4` are stored at indices `0..3`.
//!
//! Overlapping regime (`|λ| + |Δ|` small together): the resonances are the
//! eigenvalues of the level-shift matrix
//!
//! ```text
//! Λ = iσ·1 + ⎡ 0    0    0  −iσ ⎤
//!            ⎢ 0    Δ  −iσ   0  ⎥
//!            ⎢ 0  −iσ   −Δ   0  ⎥
//!            ⎣−iσ   0    0   0  ⎦
//! ```
//!
//! Isolated regime (`|Δ|` fixed, `λ → 0`): each Bohr frequency `0, ±Δ` carries
//! its own second-order shift and the zero-frequency pair is Gibbs weighted.

use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{Protocol, Regime, Segment, SystemVector, DEFAULT_GAP_FLOOR_FACTOR, DEGENERACY_TOL, MM, MP, PM, PP};
use crate::spectral::{sigma_from_gamma0, SpectralDensity};

pub type Matrix4 = [[Complex64; 4]; 4];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// The level-shift operator of one segment in the basis `{φ₊₊, φ₊₋, φ₋₊, φ₋₋}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelShiftMatrix {
    pub m: Matrix4,
    pub regime: Regime,
    pub sigma: f64,
    pub delta: f64,
}

/// Builds `Λ` entry by entry; `σ = 0` gives the free `diag(0, Δ, −Δ, 0)`.
pub fn level_shift_overlapping(sigma: f64, delta: f64) -> LevelShiftMatrix {
    let s = I * sigma;
    let mut m = [[ZERO; 4]; 4];
    for (k, row) in m.iter_mut().enumerate() {
        row[k] = s;
    }
    m[PM][PM] += re(delta);
    m[MP][MP] -= re(delta);
    m[PP][MM] = -s;
    m[MM][PP] = -s;
    m[PM][MP] = -s;
    m[MP][PM] = -s;
    LevelShiftMatrix { m, regime: Regime::Overlapping, sigma, delta }
}

/// `σ√(τ²−1)` on the principal branch, written as `√(Δ²−σ²)` so that `σ = 0`
/// is allowed: real and non-negative for `|Δ| ≥ σ`, `i·√(σ²−Δ²)` otherwise.
pub fn split(sigma: f64, delta: f64) -> Complex64 {
    let d = delta * delta - sigma * sigma;
    if d >= 0.0 {
        re(d.sqrt())
    } else {
        Complex64::new(0.0, (-d).sqrt())
    }
}

/// `√(τ²−1)` on the principal branch.
fn sqrt_tau2m1(tau: f64) -> Complex64 {
    let d = tau * tau - 1.0;
    if d >= 0.0 {
        re(d.sqrt())
    } else {
        Complex64::new(0.0, (-d).sqrt())
    }
}

/// `(y₊, y₋) = −iτ ± i√(τ²−1)`; `y₊y₋ = −1`.
pub fn y_pair(tau: f64) -> (Complex64, Complex64) {
    let root = I * sqrt_tau2m1(tau);
    let base = Complex64::new(0.0, -tau);
    (base + root, base - root)
}

/// `α = 1/(1 + ȳ²)`.
pub fn alpha(y: Complex64) -> Complex64 {
    (re(1.0) + y.conj() * y.conj()).inv()
}

/// Closed-form overlapping energies `{0, 2iσ, iσ + σ√(τ²−1), iσ − σ√(τ²−1)}`.
pub fn overlapping_energies(sigma: f64, delta: f64) -> [Complex64; 4] {
    let s = I * sigma;
    let root = split(sigma, delta);
    [ZERO, s * 2.0, s + root, s - root]
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResonanceSet {
    pub energies: [Complex64; 4],
    pub right: [SystemVector; 4],
    pub left: [SystemVector; 4],
    pub regime: Regime,
    pub segment_index: usize,
}

impl ResonanceSet {
    /// `|η(r)⟩⟨η̃(r)|` for the label at `index`, entry `[a][b] = η_a·conj(η̃_b)`.
    pub fn projector(&self, index: usize) -> Matrix4 {
        let mut p = [[ZERO; 4]; 4];
        for (a, row) in p.iter_mut().enumerate() {
            for (b, entry) in row.iter_mut().enumerate() {
                *entry = self.right[index][a] * self.left[index][b].conj();
            }
        }
        p
    }

    /// `max_{r,r'} |⟨η̃(r), η(r')⟩ − δ_{rr'}|`.
    pub fn biorthonormality_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..4 {
            for q in 0..4 {
                let target = if r == q { 1.0 } else { 0.0 };
                worst = worst.max((self.left[r].inner(&self.right[q]) - target).norm());
            }
        }
        worst
    }

    /// `max |Σ_r |η(r)⟩⟨η̃(r)| − 1|` entrywise.
    pub fn completeness_residual(&self) -> f64 {
        let mut sum = [[ZERO; 4]; 4];
        for r in 0..4 {
            let p = self.projector(r);
            for a in 0..4 {
                for b in 0..4 {
                    sum[a][b] += p[a][b];
                }
            }
        }
        let mut worst = 0.0f64;
        for (a, row) in sum.iter().enumerate() {
            for (b, entry) in row.iter().enumerate() {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((entry - target).norm());
            }
        }
        worst
    }
}

/// Closed-form overlapping resonances at `(σ, τ)`, `σ > 0`.
pub fn resonances_overlapping(sigma: f64, tau: f64) -> Result<ResonanceSet> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::validation("sigma > 0", format!("σ = {sigma}")));
    }
    if !tau.is_finite() {
        return Err(Error::validation("finite tau", format!("τ = {tau}")));
    }
    if (tau * tau - 1.0).abs() < DEGENERACY_TOL {
        return Err(Error::Degenerate(format!("τ = {tau}: resonances 3 and 4 coincide at τ² = 1")));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (yp, ym) = y_pair(tau);
    let trace = SystemVector::from_real([h, 0.0, 0.0, h]);
    let odd = SystemVector::from_real([h, 0.0, 0.0, -h]);
    let coherence = |y: Complex64| {
        let mut v = SystemVector::ZERO;
        v[PM] = re(1.0);
        v[MP] = y;
        v
    };
    let right = [trace, odd, coherence(yp), coherence(ym)];
    let left = [trace, odd, coherence(yp.conj()) * alpha(yp), coherence(ym.conj()) * alpha(ym)];
    Ok(ResonanceSet {
        energies: overlapping_energies(sigma, tau * sigma),
        right,
        left,
        regime: Regime::Overlapping,
        segment_index: 0,
    })
}

/// `(1/(1+e^{βΔ}), 1/(1+e^{−βΔ}))`: excited and ground Gibbs populations.
pub fn gibbs_weights(beta: f64, delta: f64) -> (f64, f64) {
    let x = beta * delta;
    let excited = if x >= 0.0 { (-x).exp() / (1.0 + (-x).exp()) } else { 1.0 / (1.0 + x.exp()) };
    (excited, 1.0 - excited)
}

/// Isolated-regime energies from `γ(|Δ|)` and the principal-value integral.
///
/// `ε(3)` belongs to `φ₊₋` (Bohr frequency `Δ`) and `ε(4) = −conj(ε(3))` to
/// `φ₋₊` for either sign of `Δ`.
pub fn isolated_energies(coupling: f64, delta: f64, gamma: f64, pv: f64) -> [Complex64; 4] {
    let l2 = coupling * coupling;
    let half_width = I * (0.5 * std::f64::consts::PI * gamma);
    let lamb = 0.5 * pv * delta.signum();
    [
        ZERO,
        I * (std::f64::consts::PI * l2 * gamma),
        re(delta) + (half_width - lamb) * l2,
        re(-delta) + (half_width + lamb) * l2,
    ]
}

/// Isolated-regime vectors at inverse temperature `β`; with `e = e^{−βΔ}`:
///
/// ```text
/// η(1) = φ₊₊ + φ₋₋              η̃(1) = (e φ₊₊ + φ₋₋)/(e+1)
/// η(2) = (φ₊₊ − e φ₋₋)/(e+1)    η̃(2) = φ₊₊ − φ₋₋
/// η(3) = η̃(3) = φ₊₋             η(4) = η̃(4) = φ₋₊
/// ```
///
/// The pair `(η̃(1), η(1))` carries the Gibbs state of `(Δ/2)σ_z`, and the set
/// is biorthonormal for either sign of `Δ`.
pub fn isolated_vectors(beta: f64, delta: f64) -> ([SystemVector; 4], [SystemVector; 4]) {
    let (up, down) = gibbs_weights(beta, delta);
    let right = [
        SystemVector::from_real([1.0, 0.0, 0.0, 1.0]),
        SystemVector::from_real([down, 0.0, 0.0, -up]),
        SystemVector::basis(PM),
        SystemVector::basis(MP),
    ];
    let left = [
        SystemVector::from_real([up, 0.0, 0.0, down]),
        SystemVector::from_real([1.0, 0.0, 0.0, -1.0]),
        SystemVector::basis(PM),
        SystemVector::basis(MP),
    ];
    (right, left)
}

/// Isolated-regime resonances with the default gap floor `10σ`.
pub fn resonances_isolated(segment: &Segment, beta: f64, spectral: &SpectralDensity) -> Result<ResonanceSet> {
    resonances_isolated_with_floor(segment, beta, spectral, DEFAULT_GAP_FLOOR_FACTOR)
}

pub fn resonances_isolated_with_floor(
    segment: &Segment,
    beta: f64,
    spectral: &SpectralDensity,
    floor_factor: f64,
) -> Result<ResonanceSet> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::validation("beta > 0", format!("beta = {beta}")));
    }
    let sigma = sigma_from_gamma0(segment.coupling, spectral.gamma0()?);
    let floor = floor_factor * sigma;
    if !(segment.gap.abs() > floor) {
        return Err(Error::Regime(format!("|Δ| = {} does not exceed the gap floor {floor:.6e}", segment.gap.abs())));
    }
    let gamma = spectral.gamma(segment.gap)?;
    let pv = spectral.pv_integral(segment.gap)?;
    let (right, left) = isolated_vectors(beta, segment.gap);
    Ok(ResonanceSet {
        energies: isolated_energies(segment.coupling, segment.gap, gamma, pv),
        right,
        left,
        regime: Regime::Isolated,
        segment_index: 0,
    })
}

/// Resonance data for every segment of a protocol, in order.
pub fn resonance_sets(protocol: &Protocol) -> Result<Vec<ResonanceSet>> {
    let gamma0 = protocol.gamma0();
    match protocol.regime() {
        Regime::Overlapping => protocol
            .segments()
            .iter()
            .enumerate()
            .map(|(j, seg)| {
                let sigma = sigma_from_gamma0(seg.coupling, gamma0);
                let mut set = resonances_overlapping(sigma, seg.gap / sigma)?;
                set.segment_index = j;
                Ok(set)
            })
            .collect(),
        Regime::Isolated => {
            // Distinct (Δ, λ) pairs share one principal-value evaluation.
            let mut keys: Vec<(u64, u64)> =
                protocol.segments().iter().map(|s| (s.gap.to_bits(), s.coupling.to_bits())).collect();
            keys.sort_unstable();
            keys.dedup();
            let computed: Vec<ResonanceSet> = keys
                .par_iter()
                .map(|&(gap, coupling)| {
                    let seg = Segment { gap: f64::from_bits(gap), coupling: f64::from_bits(coupling), duration: 0.0 };
                    resonances_isolated_with_floor(
                        &seg,
                        protocol.beta(),
                        protocol.spectral(),
                        protocol.gap_floor_factor(),
                    )
                })
                .collect::<Result<_>>()?;
            let table: HashMap<(u64, u64), &ResonanceSet> = keys.iter().copied().zip(computed.iter()).collect();
            Ok(protocol
                .segments()
                .iter()
                .enumerate()
                .map(|(j, s)| {
                    let mut set = table[&(s.gap.to_bits(), s.coupling.to_bits())].clone();
                    set.segment_index = j;
                    set
                })
                .collect())
        }
    }
}

/// `T(r, r') = ⟨η̃_left(r), η_right(r')⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitionMatrix {
    pub t: Matrix4,
}

impl TransitionMatrix {
    pub fn identity() -> Self {
        let mut t = [[ZERO; 4]; 4];
        for (k, row) in t.iter_mut().enumerate() {
            row[k] = re(1.0);
        }
        TransitionMatrix { t }
    }

    /// Largest off-diagonal magnitude.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..4 {
            for q in 0..4 {
                if r != q {
                    worst = worst.max(self.t[r][q].norm());
                }
            }
        }
        worst
    }
}

/// Raw inner products between consecutive segments' vectors.
pub fn transition_matrix(left: &ResonanceSet, right: &ResonanceSet) -> Result<TransitionMatrix> {
    if left.regime != right.regime {
        return Err(Error::Regime(format!(
            "transition between a {} and a {} resonance set",
            left.regime, right.regime
        )));
    }
    let mut t = [[ZERO; 4]; 4];
    for (r, row) in t.iter_mut().enumerate() {
        for (q, entry) in row.iter_mut().enumerate() {
            *entry = left.left[r].inner(&right.right[q]);
        }
    }
    Ok(TransitionMatrix { t })
}

pub fn transition_matrices(sets: &[ResonanceSet]) -> Result<Vec<TransitionMatrix>> {
    sets.windows(2).map(|w| transition_matrix(&w[0], &w[1])).collect()
}

/// Closed-form transition coefficients, used to cross-check the raw inner
/// products and as asymptotic diagnostics.
pub mod formulas {
    use super::*;

    /// Overlapping regime, `τʲ → τʲ⁺¹`: only the `{3,4}` block is nontrivial.
    pub fn overlapping(tau: f64, tau_next: f64) -> Matrix4 {
        let (yp, ym) = y_pair(tau);
        let (yp1, ym1) = y_pair(tau_next);
        let (ap, am) = (alpha(yp).conj(), alpha(ym).conj());
        let mut t = TransitionMatrix::identity().t;
        t[2][2] = re(1.0) + ap * yp * (yp1 - yp);
        t[2][3] = ap * yp * (ym1 - ym);
        t[3][2] = am * ym * (yp1 - yp);
        t[3][3] = re(1.0) + am * ym * (ym1 - ym);
        t
    }

    /// Isolated regime: identity plus
    /// `T(1,2) = sinh(β(Δʲ⁺¹−Δʲ)/2) / (2 cosh(βΔʲ/2) cosh(βΔʲ⁺¹/2))`.
    pub fn isolated(beta: f64, delta: f64, delta_next: f64) -> Matrix4 {
        let mut t = TransitionMatrix::identity().t;
        let num = (0.5 * beta * (delta_next - delta)).sinh();
        let den = 2.0 * (0.5 * beta * delta).cosh() * (0.5 * beta * delta_next).cosh();
        t[0][1] = re(num / den);
        t
    }

    /// Large-`|τ|` expansion of the `{3,4}` block as `[[T33, T34], [T43, T44]]`:
    /// `T33, T44 = 1 + d/(2τ) ∓ a/(2τ)` and `T34, T43 = d/(2τ) ± a/(2τ)` with
    /// `d = τʲ⁺¹ − τʲ`, `a = |τʲ⁺¹| − |τʲ|`.
    pub fn separated_asymptotic(tau: f64, tau_next: f64) -> [[Complex64; 2]; 2] {
        let d = (tau_next - tau) / (2.0 * tau);
        let a = (tau_next.abs() - tau.abs()) / (2.0 * tau);
        [[re(1.0 + d - a), re(d + a)], [re(d - a), re(1.0 + d + a)]]
    }

    /// Small-`|τ|` expansion: `T33, T44 = 1 ± i d/2`, `T34, T43 = ± i d/2`.
    pub fn overlapping_asymptotic(tau: f64, tau_next: f64) -> [[Complex64; 2]; 2] {
        let h = I * (0.5 * (tau_next - tau));
        [[re(1.0) + h, h], [-h, re(1.0) - h]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn level_shift_entries() {
        let l = level_shift_overlapping(1.0, 2.0);
        assert_eq!(l.m[PP][PP], I);
        assert_eq!(l.m[PM][PM], Complex64::new(2.0, 1.0));
        assert_eq!(l.m[MP][MP], Complex64::new(-2.0, 1.0));
        assert_eq!(l.m[PP][MM], -I);
        assert_eq!(l.m[PM][MP], -I);
        assert_eq!(l.m[PP][PM], ZERO);
        let free = level_shift_overlapping(0.0, 0.5);
        assert_eq!(free.m[PM][PM], re(0.5));
        assert_eq!(free.m[PP][MM], ZERO);
    }

    #[test]
    fn energies_at_tau_two() {
        let set = resonances_overlapping(1.0, 2.0).unwrap();
        let s3 = 3f64.sqrt();
        assert_eq!(set.energies[0], ZERO);
        assert!(close(set.energies[1], 2.0 * I, 1e-15));
        assert!(close(set.energies[2], Complex64::new(s3, 1.0), 1e-15));
        assert!(close(set.energies[3], Complex64::new(-s3, 1.0), 1e-15));
        let (yp, ym) = y_pair(2.0);
        assert!(close(yp, Complex64::new(0.0, -2.0 + s3), 1e-15));
        assert!(close(ym, Complex64::new(0.0, -2.0 - s3), 1e-15));
    }

    #[test]
    fn crossing_instant() {
        let set = resonances_overlapping(0.7, 0.0).unwrap();
        assert!(close(set.energies[2], 2.0 * I * 0.7, 1e-15));
        assert!(close(set.energies[3], ZERO, 1e-15));
        let (yp, ym) = y_pair(0.0);
        assert!(close(yp, re(-1.0), 1e-15));
        assert!(close(ym, re(1.0), 1e-15));
    }

    #[test]
    fn biorthonormal_inside_band() {
        let set = resonances_overlapping(1.0, 0.5).unwrap();
        assert!(set.biorthonormality_residual() < 1e-14);
        let (yp, ym) = y_pair(0.5);
        assert!(close(yp * ym, re(-1.0), 1e-15));
        assert!(set.completeness_residual() < 1e-14);
    }

    #[test]
    fn degeneracy_rejected() {
        assert!(matches!(resonances_overlapping(1.0, 1.0), Err(Error::Degenerate(_))));
        assert!(matches!(resonances_overlapping(1.0, -1.0 + 1e-8), Err(Error::Degenerate(_))));
        assert!(resonances_overlapping(0.0, 0.5).is_err());
    }

    #[test]
    fn trace_of_level_shift_equals_energy_sum() {
        for tau in [0.0, 0.3, -0.9, 1.5, -5.0] {
            let set = resonances_overlapping(2.0, tau).unwrap();
            let sum: Complex64 = set.energies.iter().sum();
            assert!(close(sum, 8.0 * I, 1e-12));
        }
    }

    #[test]
    fn eigen_equation_holds() {
        for (sigma, tau) in [(1.0, 0.3), (0.1, -5.0), (10.0, 0.9)] {
            let set = resonances_overlapping(sigma, tau).unwrap();
            let l = level_shift_overlapping(sigma, sigma * tau);
            for r in 0..4 {
                for a in 0..4 {
                    let lv: Complex64 = (0..4).map(|b| l.m[a][b] * set.right[r][b]).sum();
                    assert!(close(lv, set.energies[r] * set.right[r][a], 1e-12 * sigma.max(1.0) * 5.0));
                    // η̃ is a left eigenvector: Λ* η̃ = conj(ε) η̃
                    let lt: Complex64 = (0..4).map(|b| l.m[b][a].conj() * set.left[r][b]).sum();
                    assert!(close(lt, set.energies[r].conj() * set.left[r][a], 1e-12 * sigma.max(1.0) * 5.0));
                }
            }
        }
    }

    #[test]
    fn overlapping_transition_closed_form() {
        let a = resonances_overlapping(1.0, 0.2).unwrap();
        let b = resonances_overlapping(1.0, 0.3).unwrap();
        let t = transition_matrix(&a, &b).unwrap();
        let f = formulas::overlapping(0.2, 0.3);
        for r in 0..4 {
            for q in 0..4 {
                assert!(close(t.t[r][q], f[r][q], 1e-12));
            }
        }
        let same = transition_matrix(&a, &a).unwrap();
        for r in 0..4 {
            for q in 0..4 {
                assert!(close(same.t[r][q], TransitionMatrix::identity().t[r][q], 1e-12));
            }
        }
    }

    #[test]
    fn isolated_vectors_and_transition() {
        let (right, left) = isolated_vectors(1.0, 1.0);
        let set = ResonanceSet { energies: [ZERO; 4], right, left, regime: Regime::Isolated, segment_index: 0 };
        assert!(set.biorthonormality_residual() < 1e-15);
        assert!(set.completeness_residual() < 1e-15);
        let (r2, l2) = isolated_vectors(1.0, 2.0);
        let next = ResonanceSet { energies: [ZERO; 4], right: r2, left: l2, regime: Regime::Isolated, segment_index: 1 };
        let t = transition_matrix(&set, &next).unwrap();
        let expected = (0.5f64).sinh() / (2.0 * (0.5f64).cosh() * 1f64.cosh());
        assert!(close(t.t[0][1], re(expected), 1e-15));
        let f = formulas::isolated(1.0, 1.0, 2.0);
        for r in 0..4 {
            for q in 0..4 {
                assert!(close(t.t[r][q], f[r][q], 1e-15));
            }
        }
    }

    #[test]
    fn isolated_zero_temperature_limit() {
        let (_, left) = isolated_vectors(1e3, 1.0);
        assert_eq!(left[0], SystemVector::basis(MM));
        let (right, _) = isolated_vectors(1e3, 1.0);
        assert_eq!(right[1], SystemVector::basis(PP));
        let (_, left_neg) = isolated_vectors(1e3, -1.0);
        assert_eq!(left_neg[0], SystemVector::basis(PP));
    }

    #[test]
    fn isolated_energies_structure() {
        let e = isolated_energies(0.1, -2.0, 0.5, -1.3);
        assert!(close(e[3], -e[2].conj(), 1e-15));
        assert!((e[1].im - PI * 0.01 * 0.5).abs() < 1e-15);
        assert_eq!(e[2].re, -2.0 + 0.01 * 0.5 * -1.3);
    }

    #[test]
    fn isolated_gap_floor() {
        let spectral = SpectralDensity::gaussian();
        let tiny = Segment::new(0.01, 0.1, 1.0).unwrap();
        assert!(matches!(resonances_isolated(&tiny, 1.0, &spectral), Err(Error::Regime(_))));
        let ok = Segment::new(1.5, 0.1, 1.0).unwrap();
        let set = resonances_isolated(&ok, 1.0, &spectral).unwrap();
        let gamma = 2.0 * PI * (-3.0f64).exp();
        assert!((set.energies[1].im - PI * 0.01 * gamma).abs() < 1e-14);
        assert!(set.energies.iter().all(|e| e.im >= 0.0));
    }

    #[test]
    fn regime_mismatch() {
        let a = resonances_overlapping(1.0, 0.2).unwrap();
        let (right, left) = isolated_vectors(1.0, 1.0);
        let b = ResonanceSet { energies: [ZERO; 4], right, left, regime: Regime::Isolated, segment_index: 0 };
        assert!(matches!(transition_matrix(&a, &b), Err(Error::Regime(_))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn tau() -> impl Strategy<Value = f64> {
            (-6.0..6.0f64).prop_filter("away from τ² = 1", |t| (t * t - 1.0).abs() > 1e-3)
        }

        proptest! {
            #[test]
            fn overlapping_set_is_biorthonormal_and_complete(sigma in 0.01..20.0f64, t in tau()) {
                let set = resonances_overlapping(sigma, t).unwrap();
                let scale = 1.0 / (t * t - 1.0).abs();
                prop_assert!(set.biorthonormality_residual() < 1e-12 * (1.0 + scale));
                prop_assert!(set.completeness_residual() < 1e-12 * (1.0 + scale));
                prop_assert!(set.energies.iter().all(|e| e.im >= -1e-12));
            }

            #[test]
            fn overlapping_transitions_match_formula(t0 in tau(), t1 in tau()) {
                let a = resonances_overlapping(1.0, t0).unwrap();
                let b = resonances_overlapping(1.0, t1).unwrap();
                let raw = transition_matrix(&a, &b).unwrap();
                let f = formulas::overlapping(t0, t1);
                let scale = 1.0 + 1.0 / (t0 * t0 - 1.0).abs() + t0.abs() + t1.abs();
                for r in 0..4 { for q in 0..4 {
                    prop_assert!((raw.t[r][q] - f[r][q]).norm() < 1e-12 * scale * scale);
                }}
            }

            #[test]
            fn isolated_transitions_match_formula(beta in 0.1..5.0f64, d0 in -3.0..3.0f64, d1 in -3.0..3.0f64) {
                let (r0, l0) = isolated_vectors(beta, d0);
                let (r1, l1) = isolated_vectors(beta, d1);
                let a = ResonanceSet { energies: [ZERO; 4], right: r0, left: l0, regime: Regime::Isolated, segment_index: 0 };
                let b = ResonanceSet { energies: [ZERO; 4], right: r1, left: l1, regime: Regime::Isolated, segment_index: 1 };
                prop_assert!(a.biorthonormality_residual() < 1e-14);
                let raw = transition_matrix(&a, &b).unwrap();
                let f = formulas::isolated(beta, d0, d1);
                for r in 0..4 { for q in 0..4 {
                    prop_assert!((raw.t[r][q] - f[r][q]).norm() < 1e-12);
                }}
            }
        }
    }
}
