//! Shared domain types: the doubled two-level basis, system states and
//! observables, and the piecewise-constant protocol.
//!
//! Vectors live in ℂ²⊗ℂ² with the ordered basis `{φ₊₊, φ₊₋, φ₋₊, φ₋₋}`,
//! where `φ_{s's} = |s'⟩⊗|s⟩`. A 2×2 matrix `X` corresponds to the vector with
//! components `X_{s's}` through `(X⊗1)ψ_S = 2^{-1/2} Σ X_{s's} φ_{s's}`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::SpectralDensity;

/// Index of `φ₊₊`.
pub const PP: usize = 0;
/// Index of `φ₊₋`.
pub const PM: usize = 1;
/// Index of `φ₋₊`.
pub const MP: usize = 2;
/// Index of `φ₋₋`.
pub const MM: usize = 3;

/// Component index to basis label. Every module addresses components through
/// this table or the constants above.
pub const BASIS: [(usize, &str); 4] = [(PP, "++"), (PM, "+-"), (MP, "-+"), (MM, "--")];

/// Relative tolerance for Hermiticity and trace checks.
pub const VALIDATION_TOL: f64 = 1e-10;

/// Spin index of `|+⟩` and `|−⟩` in 2×2 matrices.
const PLUS: usize = 0;
const MINUS: usize = 1;

/// Maps a pair of spin indices `(s', s)` to the doubled-space component.
#[inline]
pub fn pair_index(left: usize, right: usize) -> usize {
    2 * left + right
}

pub type Matrix2 = [[Complex64; 2]; 2];

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// A vector of ℂ²⊗ℂ².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemVector(pub [Complex64; 4]);

impl SystemVector {
    pub const ZERO: SystemVector = SystemVector([Complex64::new(0.0, 0.0); 4]);

    pub fn new(components: [Complex64; 4]) -> Self {
        SystemVector(components)
    }

    pub fn from_real(components: [f64; 4]) -> Self {
        SystemVector(components.map(c))
    }

    /// The unit vector `φ_label`.
    pub fn basis(index: usize) -> Self {
        let mut v = Self::ZERO;
        v.0[index] = c(1.0);
        v
    }

    /// The trace vector `ψ_S = (φ₊₊ + φ₋₋)/√2`.
    pub fn trace_vector() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_real([h, 0.0, 0.0, h])
    }

    /// `⟨self, other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &SystemVector) -> Complex64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        SystemVector(self.0.map(|z| z * factor))
    }

    pub fn conj(&self) -> Self {
        SystemVector(self.0.map(|z| z.conj()))
    }

    /// Applies `σ_x⊗σ_x`, which swaps `φ₊₊↔φ₋₋` and `φ₊₋↔φ₋₊`.
    pub fn flip_both(&self) -> Self {
        SystemVector([self.0[MM], self.0[MP], self.0[PM], self.0[PP]])
    }

    /// Reads the vector back as the 2×2 matrix `X` with `v = √2 (X⊗1)ψ_S`.
    pub fn as_matrix(&self) -> Matrix2 {
        let mut m = [[Complex64::default(); 2]; 2];
        for (l, row) in m.iter_mut().enumerate() {
            for (r, entry) in row.iter_mut().enumerate() {
                *entry = self.0[pair_index(l, r)];
            }
        }
        m
    }
}

impl Index<usize> for SystemVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for SystemVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

impl Add for SystemVector {
    type Output = SystemVector;
    fn add(self, rhs: SystemVector) -> SystemVector {
        let mut out = self;
        for i in 0..4 {
            out.0[i] += rhs.0[i];
        }
        out
    }
}

impl Sub for SystemVector {
    type Output = SystemVector;
    fn sub(self, rhs: SystemVector) -> SystemVector {
        let mut out = self;
        for i in 0..4 {
            out.0[i] -= rhs.0[i];
        }
        out
    }
}

impl Mul<Complex64> for SystemVector {
    type Output = SystemVector;
    fn mul(self, rhs: Complex64) -> SystemVector {
        self.scale(rhs)
    }
}

impl Mul<f64> for SystemVector {
    type Output = SystemVector;
    fn mul(self, rhs: f64) -> SystemVector {
        self.scale(c(rhs))
    }
}

fn check_hermitian(m: &Matrix2, what: &'static str) -> Result<()> {
    let scale = m.iter().flatten().map(|z| z.norm()).fold(1.0f64, f64::max);
    for i in 0..2 {
        for j in 0..2 {
            let d = (m[i][j] - m[j][i].conj()).norm();
            if !d.is_finite() || d > VALIDATION_TOL * scale {
                return Err(Error::validation(
                    "hermitian",
                    format!("{what} entry ({i},{j}) differs from the conjugate of ({j},{i}) by {d:.3e}"),
                ));
            }
        }
    }
    Ok(())
}

/// Eigenvalues of a 2×2 Hermitian matrix, ascending.
fn hermitian_eigenvalues(m: &Matrix2) -> [f64; 2] {
    let a = m[0][0].re;
    let d = m[1][1].re;
    let b = m[0][1].norm();
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    [mean - radius, mean + radius]
}

/// Reduced density matrix of the two-level system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemState {
    rho: Matrix2,
}

impl SystemState {
    pub fn new(rho: Matrix2) -> Result<Self> {
        check_hermitian(&rho, "density matrix")?;
        let trace = rho[0][0] + rho[1][1];
        if (trace - c(1.0)).norm() > VALIDATION_TOL {
            return Err(Error::validation("unit trace", format!("trace is {trace}")));
        }
        let [low, _] = hermitian_eigenvalues(&rho);
        if low < -VALIDATION_TOL {
            return Err(Error::validation("positive semidefinite", format!("eigenvalue {low:.3e}")));
        }
        Ok(SystemState { rho })
    }

    /// `|+⟩⟨+|` when `plus` is true, otherwise `|−⟩⟨−|`.
    pub fn pure_spin(plus: bool) -> Self {
        let mut rho = [[Complex64::default(); 2]; 2];
        let i = if plus { PLUS } else { MINUS };
        rho[i][i] = c(1.0);
        SystemState { rho }
    }

    pub fn maximally_mixed() -> Self {
        SystemState { rho: [[c(0.5), c(0.0)], [c(0.0), c(0.5)]] }
    }

    pub fn diagonal(p_plus: f64) -> Result<Self> {
        Self::new([[c(p_plus), c(0.0)], [c(0.0), c(1.0 - p_plus)]])
    }

    pub fn matrix(&self) -> &Matrix2 {
        &self.rho
    }
}

/// Observable of the two-level system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observable {
    a: Matrix2,
}

impl Observable {
    pub fn new(a: Matrix2) -> Result<Self> {
        check_hermitian(&a, "observable")?;
        Ok(Observable { a })
    }

    pub fn identity() -> Self {
        Observable { a: [[c(1.0), c(0.0)], [c(0.0), c(1.0)]] }
    }

    pub fn pauli_x() -> Self {
        Observable { a: [[c(0.0), c(1.0)], [c(1.0), c(0.0)]] }
    }

    pub fn pauli_y() -> Self {
        let i = Complex64::i();
        Observable { a: [[c(0.0), -i], [i, c(0.0)]] }
    }

    pub fn pauli_z() -> Self {
        Observable { a: [[c(1.0), c(0.0)], [c(0.0), c(-1.0)]] }
    }

    /// `|+⟩⟨+|` when `plus` is true, otherwise `|−⟩⟨−|`.
    pub fn projector(plus: bool) -> Self {
        let mut a = [[Complex64::default(); 2]; 2];
        let i = if plus { PLUS } else { MINUS };
        a[i][i] = c(1.0);
        Observable { a }
    }

    pub fn matrix(&self) -> &Matrix2 {
        &self.a
    }

    /// Largest eigenvalue.
    pub fn max_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.a)[1]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.a)[0]
    }
}

/// `√2 (ρ⊗1)ψ_S`: component `φ_{s's}` carries `√2·ρ_{s's}`.
///
/// The left factor of every path amplitude is `⟨v, η¹(r₁)⟩` with this `v`; the
/// antilinear first slot supplies the conjugation of the commutant operator
/// that prepares the initial state.
pub fn vectorize_state(rho: &SystemState) -> SystemVector {
    let s = std::f64::consts::SQRT_2;
    let mut v = SystemVector::ZERO;
    for (l, row) in rho.rho.iter().enumerate() {
        for (r, entry) in row.iter().enumerate() {
            v.0[pair_index(l, r)] = entry * s;
        }
    }
    v
}

/// `(A⊗1)ψ_S`: component `φ_{s's}` carries `A_{s's}/√2`.
pub fn apply_observable(a: &Observable) -> SystemVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = SystemVector::ZERO;
    for (l, row) in a.a.iter().enumerate() {
        for (r, entry) in row.iter().enumerate() {
            v.0[pair_index(l, r)] = entry * h;
        }
    }
    v
}

/// Which perturbative resonance picture applies to a protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Gaps comparable to or smaller than the coupling-induced width; crossings allowed.
    Overlapping,
    /// Gaps fixed and well separated from zero as the coupling vanishes.
    Isolated,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Overlapping => "overlapping",
            Regime::Isolated => "isolated",
        })
    }
}

impl std::str::FromStr for Regime {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "overlapping" => Ok(Regime::Overlapping),
            "isolated" => Ok(Regime::Isolated),
            other => Err(format!("unknown regime `{other}` (expected overlapping or isolated)")),
        }
    }
}

/// One constant piece of the Hamiltonian: `H_S = (gap/2)σ_z`, coupling `λ`,
/// held for `duration`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub gap: f64,
    pub coupling: f64,
    pub duration: f64,
}

impl Segment {
    pub fn new(gap: f64, coupling: f64, duration: f64) -> Result<Self> {
        if !gap.is_finite() {
            return Err(Error::validation("finite gap", format!("gap = {gap}")));
        }
        if !coupling.is_finite() {
            return Err(Error::validation("finite coupling", format!("coupling = {coupling}")));
        }
        if !(duration >= 0.0) || !duration.is_finite() {
            return Err(Error::validation("duration >= 0", format!("duration = {duration}")));
        }
        Ok(Segment { gap, coupling, duration })
    }
}

/// `|τ² − 1|` below this is treated as a coincidence of resonances 3 and 4.
pub const DEGENERACY_TOL: f64 = 1e-6;

/// Default multiple of σ that isolated-regime gaps must exceed.
pub const DEFAULT_GAP_FLOOR_FACTOR: f64 = 10.0;

/// A validated piecewise-constant protocol together with its bath.
#[derive(Clone, Debug)]
pub struct Protocol {
    segments: Vec<Segment>,
    beta: f64,
    spectral: Arc<SpectralDensity>,
    gamma0: f64,
    regime: Regime,
    gap_floor_factor: f64,
}

impl Protocol {
    pub fn new(
        segments: Vec<Segment>,
        beta: f64,
        spectral: Arc<SpectralDensity>,
        regime: Regime,
    ) -> Result<Self> {
        Self::with_gap_floor(segments, beta, spectral, regime, DEFAULT_GAP_FLOOR_FACTOR)
    }

    pub fn with_gap_floor(
        segments: Vec<Segment>,
        beta: f64,
        spectral: Arc<SpectralDensity>,
        regime: Regime,
        gap_floor_factor: f64,
    ) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::validation("N >= 1", "protocol has no segments"));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::validation("beta > 0", format!("beta = {beta}")));
        }
        if !(gap_floor_factor >= 0.0) {
            return Err(Error::validation("gap floor >= 0", format!("factor = {gap_floor_factor}")));
        }
        let gamma0 = spectral.gamma0()?;
        let protocol = Protocol { segments, beta, spectral, gamma0, regime, gap_floor_factor };
        protocol.check_regime()?;
        Ok(protocol)
    }

    fn check_regime(&self) -> Result<()> {
        for (j, seg) in self.segments.iter().enumerate() {
            let sigma = self.sigma(seg);
            match self.regime {
                Regime::Overlapping => {
                    if seg.coupling == 0.0 {
                        return Err(Error::validation(
                            "coupling != 0",
                            format!("segment {}: the overlapping regime needs λ ≠ 0", j + 1),
                        ));
                    }
                    let tau = seg.gap / sigma;
                    if (tau * tau - 1.0).abs() < DEGENERACY_TOL {
                        return Err(Error::Degenerate(format!(
                            "segment {}: τ = {tau} gives τ² = 1 and resonances 3 and 4 coincide",
                            j + 1
                        )));
                    }
                }
                Regime::Isolated => {
                    let floor = self.gap_floor_factor * sigma;
                    if !(seg.gap.abs() > floor) {
                        return Err(Error::Regime(format!(
                            "segment {}: |Δ| = {} does not exceed the gap floor {floor:.6e}",
                            j + 1,
                            seg.gap.abs()
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn spectral(&self) -> &Arc<SpectralDensity> {
        &self.spectral
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn gap_floor_factor(&self) -> f64 {
        self.gap_floor_factor
    }

    /// `σ = (π/2)λ²γ₀` for a segment.
    pub fn sigma(&self, seg: &Segment) -> f64 {
        crate::spectral::sigma_from_gamma0(seg.coupling, self.gamma0)
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// The protocol observed up to time `t`: segments are cut at `t`, and the
    /// last Hamiltonian is held beyond the end of the protocol.
    pub fn until(&self, t: f64) -> Result<Protocol> {
        if !(t >= 0.0) {
            return Err(Error::validation("t >= 0", format!("t = {t}")));
        }
        let mut out = Vec::with_capacity(self.segments.len());
        let mut elapsed = 0.0;
        for (j, seg) in self.segments.iter().enumerate() {
            let last = j + 1 == self.segments.len();
            let remaining = t - elapsed;
            if remaining <= seg.duration || last {
                out.push(Segment { duration: remaining.max(0.0), ..*seg });
                break;
            }
            out.push(*seg);
            elapsed += seg.duration;
        }
        Ok(Protocol { segments: out, ..self.clone() })
    }

    /// Replaces segment `index` with two copies of half its duration.
    pub fn split_segment(&self, index: usize) -> Protocol {
        let mut segments = self.segments.clone();
        let seg = segments[index];
        let half = Segment { duration: 0.5 * seg.duration, ..seg };
        segments[index] = half;
        segments.insert(index + 1, half);
        Protocol { segments, ..self.clone() }
    }

    pub fn with_regime(&self, regime: Regime) -> Result<Protocol> {
        let p = Protocol { regime, ..self.clone() };
        p.check_regime()?;
        Ok(p)
    }
}

/// Projector onto the excited state of `(gap/2)σ_z`: `|+⟩` for a positive gap,
/// `|−⟩` for a negative one.
pub fn excited_projector(gap: f64) -> Observable {
    Observable::projector(gap > 0.0)
}

/// Ground state of `(gap/2)σ_z` as a density matrix.
pub fn ground_state(gap: f64) -> SystemState {
    SystemState::pure_spin(gap < 0.0)
}
