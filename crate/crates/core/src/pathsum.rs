//! Dominant term of the resonance path sum.
//!
//! For a protocol of `N` segments the expectation of `A` in the state `ρ` is
//!
//! ```text
//! Σ_{r₁..r_N} e^{iΣ t_j ε^j(r_j)} ⟨v, η¹(r₁)⟩ Π_j T^j(r_j, r_{j+1}) ⟨η̃^N(r_N), a⟩
//! ```
//!
//! with `v = vectorize_state(ρ)` and `a = apply_observable(A)`. The neglected
//! remainder is carried as a symbolic [`Remainder`], never as a number.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{apply_observable, vectorize_state, Observable, Protocol, Regime, SystemState, SystemVector};
use crate::resonance::{resonance_sets, transition_matrices, ResonanceSet, TransitionMatrix};

/// Largest `N` accepted by [`expectation_full`].
pub const FULL_BUDGET: usize = 13;
/// Largest `N` accepted by [`expectation_truncated`].
pub const TRUNCATED_BUDGET: usize = 1_000_000;
/// Hermitian inputs must give an imaginary part below this.
pub const IMAGINARY_TOL: f64 = 1e-9;

/// A sequence of resonance labels `r_j ∈ {1,2,3,4}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Path {
    labels: Vec<u8>,
}

impl Path {
    pub fn new(labels: Vec<u8>) -> Result<Self> {
        if labels.is_empty() || labels.iter().any(|&r| !(1..=4).contains(&r)) {
            return Err(Error::validation("labels in 1..=4", format!("{labels:?}")));
        }
        Ok(Path { labels })
    }

    /// The path that stays on `r` for `n` segments.
    pub fn constant(r: u8, n: usize) -> Result<Self> {
        Self::new(vec![r; n])
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `#{j : r_j ≠ r_{j+1}}`.
    pub fn jump_count(&self) -> usize {
        self.labels.windows(2).filter(|w| w[0] != w[1]).count()
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.labels.iter().map(|r| r.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// One term of the path sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathAmplitude {
    /// `e^{iΣ t_j ε^j(r_j)}`; modulus at most one.
    pub propagator: Complex64,
    /// Boundary overlaps times the transition product.
    pub weight: Complex64,
    pub value: Complex64,
}

/// Order of the neglected terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RemainderClass {
    /// `O(max_j |λ_j|)`.
    Coupling,
    /// `O(|λ| + Δ_max)`.
    CouplingAndGap,
}

impl RemainderClass {
    pub fn for_regime(regime: Regime) -> Self {
        match regime {
            Regime::Overlapping => RemainderClass::CouplingAndGap,
            Regime::Isolated => RemainderClass::Coupling,
        }
    }
}

/// Symbolic description of what a result leaves out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Remainder {
    pub class: RemainderClass,
    /// `Some(K)` when paths with more than `K` jumps were dropped, adding
    /// `O((τ'_max t)^{K+1})`.
    pub truncated_after: Option<usize>,
}

impl fmt::Display for Remainder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.class {
            RemainderClass::Coupling => f.write_str("O(max|lambda|)")?,
            RemainderClass::CouplingAndGap => f.write_str("O(|lambda|+Delta_max)")?,
        }
        if let Some(k) = self.truncated_after {
            write!(f, "+O((tau'_max*t)^{})", k + 1)?;
        }
        Ok(())
    }
}

/// A dominant-order expectation value with its remainder annotation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Expectation {
    pub value: Complex64,
    pub remainder: Remainder,
    /// Number of paths with a nonzero transition product.
    pub paths: usize,
}

/// Resonance data of a protocol, computed once and reusable across
/// observables and evaluation times.
#[derive(Clone, Debug)]
pub struct PathSum {
    sets: Vec<ResonanceSet>,
    transitions: Vec<TransitionMatrix>,
    durations: Vec<f64>,
    regime: Regime,
}

impl PathSum {
    pub fn new(protocol: &Protocol) -> Result<Self> {
        let sets = resonance_sets(protocol)?;
        let transitions = transition_matrices(&sets)?;
        let durations = protocol.segments().iter().map(|s| s.duration).collect();
        Ok(PathSum { sets, transitions, durations, regime: protocol.regime() })
    }

    pub fn from_parts(sets: Vec<ResonanceSet>, durations: Vec<f64>) -> Result<Self> {
        if sets.is_empty() || sets.len() != durations.len() {
            return Err(Error::validation(
                "matching lengths",
                format!("{} resonance sets, {} durations", sets.len(), durations.len()),
            ));
        }
        let transitions = transition_matrices(&sets)?;
        let regime = sets[0].regime;
        Ok(PathSum { sets, transitions, durations, regime })
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn sets(&self) -> &[ResonanceSet] {
        &self.sets
    }

    pub fn transitions(&self) -> &[TransitionMatrix] {
        &self.transitions
    }

    pub fn durations(&self) -> &[f64] {
        &self.durations
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// The same data observed at time `t`: later segments are dropped and the
    /// last Hamiltonian is held past the end of the protocol.
    pub fn until(&self, t: f64) -> Result<PathSum> {
        if !(t >= 0.0) {
            return Err(Error::validation("t >= 0", format!("t = {t}")));
        }
        let mut elapsed = 0.0;
        let mut n = self.len();
        let mut last = t;
        for (j, &d) in self.durations.iter().enumerate() {
            if t - elapsed <= d || j + 1 == self.len() {
                n = j + 1;
                last = (t - elapsed).max(0.0);
                break;
            }
            elapsed += d;
        }
        let mut durations = self.durations[..n].to_vec();
        durations[n - 1] = last;
        Ok(PathSum {
            sets: self.sets[..n].to_vec(),
            transitions: self.transitions[..n - 1].to_vec(),
            durations,
            regime: self.regime,
        })
    }

    fn remainder(&self, truncated_after: Option<usize>) -> Remainder {
        Remainder { class: RemainderClass::for_regime(self.regime), truncated_after }
    }

    /// Every path with a nonzero transition product, summed pairwise in
    /// depth-first order.
    pub fn full(&self, v0: &SystemVector, a_vec: &SystemVector) -> Result<Expectation> {
        if self.len() > FULL_BUDGET {
            return Err(Error::Budget { segments: self.len(), budget: FULL_BUDGET });
        }
        let mut terms = Vec::new();
        let n = self.len();
        let right_end: Vec<Complex64> = (0..4).map(|r| self.sets[n - 1].left[r].inner(a_vec)).collect();
        // Stack of (segment, label, phase exponent, weight).
        let mut stack: Vec<(usize, usize, Complex64, Complex64)> = Vec::new();
        for r in (0..4).rev() {
            let w = v0.inner(&self.sets[0].right[r]);
            if w != Complex64::default() {
                stack.push((0, r, self.phase(0, r), w));
            }
        }
        while let Some((j, r, phase, weight)) = stack.pop() {
            if j + 1 == n {
                let w = weight * right_end[r];
                if w != Complex64::default() {
                    terms.push(phase.exp() * w);
                }
                continue;
            }
            for q in (0..4).rev() {
                let t = self.transitions[j].t[r][q];
                if t != Complex64::default() {
                    stack.push((j + 1, q, phase + self.phase(j + 1, q), weight * t));
                }
            }
        }
        Ok(Expectation { value: pairwise_sum(&terms), remainder: self.remainder(None), paths: terms.len() })
    }

    /// Paths with at most `max_jumps` label changes, by dynamic programming
    /// over `(label, jumps so far)`.
    pub fn truncated(&self, v0: &SystemVector, a_vec: &SystemVector, max_jumps: usize) -> Result<Expectation> {
        if self.len() > TRUNCATED_BUDGET {
            return Err(Error::Budget { segments: self.len(), budget: TRUNCATED_BUDGET });
        }
        let k_max = max_jumps.min(self.len() - 1);
        let width = k_max + 1;
        let mut amp = vec![[Complex64::default(); 4]; width];
        let mut alive = vec![[false; 4]; width];
        for r in 0..4 {
            let w = v0.inner(&self.sets[0].right[r]);
            if w != Complex64::default() {
                amp[0][r] = w * self.phase(0, r).exp();
                alive[0][r] = true;
            }
        }
        let mut next = vec![[Complex64::default(); 4]; width];
        let mut next_alive = vec![[false; 4]; width];
        for j in 0..self.len() - 1 {
            for (row, flags) in next.iter_mut().zip(next_alive.iter_mut()) {
                *row = [Complex64::default(); 4];
                *flags = [false; 4];
            }
            let step: Vec<Complex64> = (0..4).map(|q| self.phase(j + 1, q).exp()).collect();
            for k in 0..width {
                for r in 0..4 {
                    if !alive[k][r] {
                        continue;
                    }
                    for q in 0..4 {
                        let t = self.transitions[j].t[r][q];
                        if t == Complex64::default() {
                            continue;
                        }
                        let k2 = k + usize::from(q != r);
                        if k2 >= width {
                            continue;
                        }
                        next[k2][q] += amp[k][r] * t * step[q];
                        next_alive[k2][q] = true;
                    }
                }
            }
            std::mem::swap(&mut amp, &mut next);
            std::mem::swap(&mut alive, &mut next_alive);
        }
        let last = &self.sets[self.len() - 1];
        let mut terms = Vec::with_capacity(4 * width);
        let mut paths = 0;
        for k in 0..width {
            for r in 0..4 {
                if alive[k][r] {
                    paths += 1;
                    terms.push(amp[k][r] * last.left[r].inner(a_vec));
                }
            }
        }
        let truncated_after = (max_jumps < self.len() - 1).then_some(max_jumps);
        Ok(Expectation { value: pairwise_sum(&terms), remainder: self.remainder(truncated_after), paths })
    }

    /// `i t_j ε^j(r)`.
    fn phase(&self, j: usize, r: usize) -> Complex64 {
        Complex64::new(0.0, self.durations[j]) * self.sets[j].energies[r]
    }
}

/// One path's contribution.
pub fn path_value(
    path: &Path,
    resonances: &[ResonanceSet],
    transitions: &[TransitionMatrix],
    durations: &[f64],
    v0: &SystemVector,
    a_vec: &SystemVector,
) -> Result<PathAmplitude> {
    let n = path.len();
    if resonances.len() != n || durations.len() != n || transitions.len() + 1 != n {
        return Err(Error::validation(
            "matching lengths",
            format!(
                "path {n}, resonance sets {}, durations {}, transitions {}",
                resonances.len(),
                durations.len(),
                transitions.len()
            ),
        ));
    }
    let idx: Vec<usize> = path.labels().iter().map(|&r| usize::from(r) - 1).collect();
    let mut exponent = Complex64::default();
    for (j, &r) in idx.iter().enumerate() {
        exponent += Complex64::new(0.0, durations[j]) * resonances[j].energies[r];
    }
    let mut weight = v0.inner(&resonances[0].right[idx[0]]);
    for (j, w) in idx.windows(2).enumerate() {
        weight *= transitions[j].t[w[0]][w[1]];
    }
    weight *= resonances[n - 1].left[idx[n - 1]].inner(a_vec);
    let propagator = exponent.exp();
    Ok(PathAmplitude { propagator, weight, value: propagator * weight })
}

/// Dominant-order values need not respect positivity, so bound violations
/// are reported, not raised.
fn check_physical(e: &Expectation, a: &Observable) {
    if e.value.im.abs() > IMAGINARY_TOL {
        log::warn!("expectation has imaginary part {:.3e} for Hermitian inputs", e.value.im);
    }
    if a.min_eigenvalue() >= -1e-12 {
        let bound = a.max_eigenvalue() * (1.0 + 1e-6);
        if e.value.norm() > bound {
            log::warn!("|expectation| = {:.6e} exceeds the largest eigenvalue bound {:.6e}", e.value.norm(), bound);
        }
    }
}

/// Full enumeration for `N ≤ 13`.
pub fn expectation_full(protocol: &Protocol, rho0: &SystemState, a: &Observable) -> Result<Expectation> {
    if protocol.len() > FULL_BUDGET {
        return Err(Error::Budget { segments: protocol.len(), budget: FULL_BUDGET });
    }
    let e = PathSum::new(protocol)?.full(&vectorize_state(rho0), &apply_observable(a))?;
    check_physical(&e, a);
    Ok(e)
}

/// Paths with at most `max_jumps` jumps.
pub fn expectation_truncated(
    protocol: &Protocol,
    rho0: &SystemState,
    a: &Observable,
    max_jumps: usize,
) -> Result<Expectation> {
    let e = PathSum::new(protocol)?.truncated(&vectorize_state(rho0), &apply_observable(a), max_jumps)?;
    check_physical(&e, a);
    Ok(e)
}

/// Recursive halving; the grouping depends only on the length, so equal
/// inputs always give bit-identical sums.
pub fn pairwise_sum(terms: &[Complex64]) -> Complex64 {
    const BASE: usize = 8;
    if terms.len() <= BASE {
        return terms.iter().fold(Complex64::default(), |acc, &z| acc + z);
    }
    let mid = terms.len() / 2;
    pairwise_sum(&terms[..mid]) + pairwise_sum(&terms[mid..])
}
