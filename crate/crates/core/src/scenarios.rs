//! A single sudden level crossing: `H_S = (Δ₁/2)σ_z` up to `t_c`, then
//! `−(Δ₂/2)σ_z`. The system starts in the ground state `|−⟩` and we track the
//! population of the excited state of the Hamiltonian in force at time `t`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{excited_projector, ground_state, Protocol, Regime, Segment};
use crate::pathsum::{expectation_full, Remainder};
use crate::resonance::resonances_isolated;
use crate::spectral::{sigma_from_gamma0, SpectralDensity};

#[derive(Clone, Debug)]
pub struct CrossingSpec {
    pub delta1: f64,
    pub delta2: f64,
    pub t_c: f64,
    pub lambda: f64,
    pub beta: f64,
    pub regime: Regime,
    pub spectral: Arc<SpectralDensity>,
}

impl CrossingSpec {
    pub fn new(delta1: f64, delta2: f64, t_c: f64, lambda: f64, beta: f64, regime: Regime) -> Result<Self> {
        Self::with_spectral(delta1, delta2, t_c, lambda, beta, regime, Arc::new(SpectralDensity::gaussian()))
    }

    pub fn with_spectral(
        delta1: f64,
        delta2: f64,
        t_c: f64,
        lambda: f64,
        beta: f64,
        regime: Regime,
        spectral: Arc<SpectralDensity>,
    ) -> Result<Self> {
        if !(delta1 > 0.0 && delta2 > 0.0) {
            return Err(Error::validation("delta1, delta2 > 0", format!("Δ₁ = {delta1}, Δ₂ = {delta2}")));
        }
        if !(t_c > 0.0) || !t_c.is_finite() {
            return Err(Error::validation("t_c > 0", format!("t_c = {t_c}")));
        }
        Ok(CrossingSpec { delta1, delta2, t_c, lambda, beta, regime, spectral })
    }

    /// Gap in force at time `t`; the first Hamiltonian is kept at `t = t_c`.
    pub fn gap_at(&self, t: f64) -> f64 {
        if t <= self.t_c {
            self.delta1
        } else {
            -self.delta2
        }
    }

    /// `σ = (π/2)λ²γ₀`.
    pub fn sigma(&self) -> Result<f64> {
        Ok(sigma_from_gamma0(self.lambda, self.spectral.gamma0()?))
    }

    /// One segment of length `t` for `t ≤ t_c`, two segments afterwards.
    pub fn protocol(&self, t: f64) -> Result<Protocol> {
        if !(t >= 0.0) {
            return Err(Error::validation("t >= 0", format!("t = {t}")));
        }
        let segments = if t <= self.t_c {
            vec![Segment::new(self.delta1, self.lambda, t)?]
        } else {
            vec![
                Segment::new(self.delta1, self.lambda, self.t_c)?,
                Segment::new(-self.delta2, self.lambda, t - self.t_c)?,
            ]
        };
        self.build(segments)
    }

    /// The two-segment protocol with the second segment still of length zero.
    fn protocol_just_after(&self) -> Result<Protocol> {
        self.build(vec![
            Segment::new(self.delta1, self.lambda, self.t_c)?,
            Segment::new(-self.delta2, self.lambda, 0.0)?,
        ])
    }

    fn build(&self, segments: Vec<Segment>) -> Result<Protocol> {
        Protocol::new(segments, self.beta, Arc::clone(&self.spectral), self.regime)
    }
}

/// A dominant-order probability with its neglected-term annotation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Probability {
    pub value: f64,
    pub remainder: Remainder,
}

fn excited_population(spec: &CrossingSpec, protocol: &Protocol, gap: f64) -> Result<Probability> {
    let e = expectation_full(protocol, &ground_state(spec.delta1), &excited_projector(gap))?;
    Ok(Probability { value: e.value.re, remainder: e.remainder })
}

/// `p_ge(t)` from the path sum of the one- or two-segment protocol.
pub fn crossing_probability(spec: &CrossingSpec, t: f64) -> Result<Probability> {
    excited_population(spec, &spec.protocol(t)?, spec.gap_at(t))
}

/// `(lim_{t↑t_c} p, lim_{t↓t_c} p)`.
pub fn crossing_limits(spec: &CrossingSpec) -> Result<(Probability, Probability)> {
    let before = crossing_probability(spec, spec.t_c)?;
    let after = excited_population(spec, &spec.protocol_just_after()?, -spec.delta2)?;
    Ok((before, after))
}

/// Size of the upward jump of `p_ge` at `t_c`.
pub fn crossing_jump(spec: &CrossingSpec) -> Result<f64> {
    let (before, after) = crossing_limits(spec)?;
    Ok(after.value - before.value)
}

/// Isolated-regime `p_ge(t)`, still computed as a path sum.
pub fn crossing_probability_isolated(spec: &CrossingSpec, t: f64) -> Result<Probability> {
    if spec.regime != Regime::Isolated {
        return Err(Error::Regime(format!("isolated crossing requested for a {} spec", spec.regime)));
    }
    crossing_probability(spec, t)
}

/// `½(1 − e^{−2σt})` before `t_c` and `½(1 + e^{−2σt})` after it.
pub fn overlapping_closed_form(sigma: f64, t_c: f64, t: f64) -> f64 {
    let decay = (-2.0 * sigma * t).exp();
    if t <= t_c {
        0.5 * (1.0 - decay)
    } else {
        0.5 * (1.0 + decay)
    }
}

/// Gibbs population of the excited state of `±(Δ/2)σ_z`, `1/(e^{β|Δ|} + 1)`.
pub fn gibbs_excited(beta: f64, delta: f64) -> f64 {
    1.0 / ((beta * delta.abs()).exp() + 1.0)
}

/// Rates and asymptotes of the isolated-regime crossing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsolatedDiagnostics {
    /// `Im ε(2)` of the first segment's resonance set.
    pub rate_resonance: f64,
    /// `πλ²γ(Δ₁)`.
    pub rate: f64,
    /// `π²λγ(Δ₁)`, the exponent as printed in the short-time formula.
    pub rate_literal: f64,
    /// `1/(e^{βΔ₂} + 1)`.
    pub gibbs_after: f64,
    /// `1/(e^{−βΔ₂} + 1)`, the asymptote as printed in the long-time formula.
    pub asymptote_literal: f64,
}

pub fn isolated_diagnostics(spec: &CrossingSpec) -> Result<IsolatedDiagnostics> {
    let seg = Segment::new(spec.delta1, spec.lambda, spec.t_c)?;
    let set = resonances_isolated(&seg, spec.beta, &spec.spectral)?;
    let gamma1 = spec.spectral.gamma(spec.delta1)?;
    let l = spec.lambda;
    Ok(IsolatedDiagnostics {
        rate_resonance: set.energies[1].im,
        rate: PI * l * l * gamma1,
        rate_literal: PI * PI * l * gamma1,
        gibbs_after: gibbs_excited(spec.beta, spec.delta2),
        asymptote_literal: 1.0 / ((-spec.beta * spec.delta2).exp() + 1.0),
    })
}

/// The isolated-regime crossing formulas transcribed exactly as printed,
/// kept only for comparison with the path sum.
pub fn isolated_literal(spec: &CrossingSpec, t: f64) -> Result<f64> {
    let (b, l) = (spec.beta, spec.lambda);
    let (d1, d2) = (spec.delta1, spec.delta2);
    let g1 = spec.spectral.gamma(d1)?;
    if t < spec.t_c {
        return Ok((1.0 - (-PI * PI * l * t * g1).exp()) / ((b * d1).exp() + 1.0));
    }
    let g2 = spec.spectral.gamma(d2)?;
    let lead = 1.0 / ((-b * d2).exp() + 1.0);
    let pref = (-PI * l * l * spec.t_c * g1).exp() / ((-b * d1).exp() + 1.0);
    let bracket = (-PI * l * l * (t - spec.t_c) * g2).exp() - (1.0 - (-b * (d1 + d2)).exp()) / ((-b * d2).exp() + 1.0);
    Ok(lead + pref * bracket)
}

/// Least-squares slope of `ln|p(t) − p∞|` over `times`, with `p∞` the
/// Gibbs population of the first Hamiltonian. Returns the decay rate.
pub fn fit_relaxation_rate(spec: &CrossingSpec, times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::validation("at least two fit times", format!("{} given", times.len())));
    }
    let target = gibbs_excited(spec.beta, spec.delta1);
    let mut xs = Vec::with_capacity(times.len());
    let mut ys = Vec::with_capacity(times.len());
    for &t in times {
        if t >= spec.t_c {
            return Err(Error::validation("fit times before t_c", format!("t = {t} >= t_c = {}", spec.t_c)));
        }
        let gap = (crossing_probability(spec, t)?.value - target).abs();
        if gap > 0.0 {
            xs.push(t);
            ys.push(gap.ln());
        }
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(-sxy / sxx)
}
