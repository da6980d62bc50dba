//! Continuous-time limit of the overlapping-regime path sum for a smoothly
//! varying gap `Δ(t)` with `|τ(t)| < 1`.
//!
//! Inside the band the resonance data become
//!
//! ```text
//! c(t) = √(1 − τ(t)²),   y±(t) = −iτ(t) ∓ c(t),
//! ε(t,3) = iσ + iσc(t),  ε(t,4) = iσ − iσc(t),
//! w(s,t,3) = √((1 + y₊(t)²)/(1 + y₊(s)²)),   w(s,t,4) likewise with y₋,
//! ```
//!
//! and the limit keeps the four constant paths plus the two single-jump
//! integrals `3 → 4` and `4 → 3`. Paths with two or more jumps are dropped.

use std::fmt;
use std::path::Path as FsPath;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{apply_observable, vectorize_state, Observable, Protocol, Regime, Segment, SystemState, SystemVector, MP, PM};
use crate::pathsum::{Remainder, RemainderClass};
use crate::quadrature::{integrate, integrate_real, QuadratureConfig};
use crate::resonance::alpha;
use crate::spectral::{sigma_from_gamma0, SpectralDensity};

/// A gap profile `t ↦ Δ(t)` with its derivative.
pub trait Schedule: Send + Sync {
    fn gap(&self, t: f64) -> f64;
    fn derivative(&self, t: f64) -> f64;
    /// Interval on which the schedule is defined, if bounded.
    fn domain(&self) -> Option<(f64, f64)> {
        None
    }
    fn describe(&self) -> String;
}

#[derive(Clone, Copy, Debug)]
pub struct Constant(pub f64);

impl Schedule for Constant {
    fn gap(&self, _t: f64) -> f64 {
        self.0
    }
    fn derivative(&self, _t: f64) -> f64 {
        0.0
    }
    fn describe(&self) -> String {
        format!("constant({})", self.0)
    }
}

/// `Δ(t) = start + rate·t`.
#[derive(Clone, Copy, Debug)]
pub struct LinearRamp {
    pub start: f64,
    pub rate: f64,
}

impl Schedule for LinearRamp {
    fn gap(&self, t: f64) -> f64 {
        self.start + self.rate * t
    }
    fn derivative(&self, _t: f64) -> f64 {
        self.rate
    }
    fn describe(&self) -> String {
        format!("ramp({} + {}*t)", self.start, self.rate)
    }
}

type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A schedule from closures for `Δ` and `Δ'`.
#[derive(Clone)]
pub struct FnSchedule {
    label: String,
    gap: Arc<ScalarFn>,
    derivative: Arc<ScalarFn>,
}

impl FnSchedule {
    pub fn new(
        label: impl Into<String>,
        gap: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        FnSchedule { label: label.into(), gap: Arc::new(gap), derivative: Arc::new(derivative) }
    }
}

impl Schedule for FnSchedule {
    fn gap(&self, t: f64) -> f64 {
        (self.gap)(t)
    }
    fn derivative(&self, t: f64) -> f64 {
        (self.derivative)(t)
    }
    fn describe(&self) -> String {
        self.label.clone()
    }
}

/// Natural cubic spline through tabulated `(t, Δ)` pairs.
#[derive(Clone, Debug)]
pub struct SplineSchedule {
    t: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl SplineSchedule {
    pub fn new(t: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = t.len();
        if n < 2 || y.len() != n {
            return Err(Error::validation("tabulated schedule", "need at least two (t, Δ) rows"));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation("strictly increasing t", "schedule times must increase strictly"));
        }
        if t.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::validation("tabulated schedule", "non-finite entry"));
        }
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm for the interior second derivatives.
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            let mut upper = vec![0.0; k];
            for i in 1..n - 1 {
                let h0 = t[i] - t[i - 1];
                let h1 = t[i + 1] - t[i];
                diag[i - 1] = 2.0 * (h0 + h1);
                upper[i - 1] = h1;
                rhs[i - 1] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            }
            for i in 1..k {
                let lower = t[i + 1] - t[i];
                let f = lower / diag[i - 1];
                diag[i] -= f * upper[i - 1];
                rhs[i] -= f * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
            }
        }
        Ok(SplineSchedule { t, y, m })
    }

    /// Two whitespace- or comma-separated columns `t Δ(t)`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut t = Vec::new();
        let mut y = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
            if cols.len() != 2 {
                return Err(Error::Parse { line: idx + 1, message: format!("expected 2 columns, found {}", cols.len()) });
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| Error::Parse { line: idx + 1, message: format!("`{s}` is not a number") })
            };
            t.push(parse(cols[0])?);
            y.push(parse(cols[1])?);
        }
        Self::new(t, y)
    }

    pub fn from_file(path: &FsPath) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn locate(&self, x: f64) -> usize {
        self.t.partition_point(|&v| v <= x).clamp(1, self.t.len() - 1) - 1
    }
}

impl Schedule for SplineSchedule {
    fn gap(&self, x: f64) -> f64 {
        let i = self.locate(x);
        let h = self.t[i + 1] - self.t[i];
        let a = (self.t[i + 1] - x) / h;
        let b = (x - self.t[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
    fn derivative(&self, x: f64) -> f64 {
        let i = self.locate(x);
        let h = self.t[i + 1] - self.t[i];
        let a = (self.t[i + 1] - x) / h;
        let b = (x - self.t[i]) / h;
        (self.y[i + 1] - self.y[i]) / h + ((1.0 - 3.0 * a * a) * self.m[i] + (3.0 * b * b - 1.0) * self.m[i + 1]) * h / 6.0
    }
    fn domain(&self) -> Option<(f64, f64)> {
        Some((self.t[0], self.t[self.t.len() - 1]))
    }
    fn describe(&self) -> String {
        format!("spline({} knots)", self.t.len())
    }
}

/// Chebyshev antiderivative of a smooth function on `[a, b]`, vanishing at `a`.
#[derive(Clone, Debug)]
struct ChebyshevIntegral {
    a: f64,
    b: f64,
    coeffs: Vec<f64>,
}

const CHEB_MIN: usize = 16;
const CHEB_MAX: usize = 1024;
const CHEB_TAIL: f64 = 1e-15;

impl ChebyshevIntegral {
    /// `None` when the coefficients have not decayed by `CHEB_MAX` nodes.
    fn fit<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Option<Self> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut n = CHEB_MIN;
        while n <= CHEB_MAX {
            let values: Vec<f64> = (0..n)
                .map(|k| f(mid + half * (std::f64::consts::PI * (k as f64 + 0.5) / n as f64).cos()))
                .collect();
            let coeffs: Vec<f64> = (0..n)
                .map(|j| {
                    let s: f64 = values
                        .iter()
                        .enumerate()
                        .map(|(k, v)| v * (std::f64::consts::PI * j as f64 * (k as f64 + 0.5) / n as f64).cos())
                        .sum();
                    2.0 * s / n as f64
                })
                .collect();
            let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1.0);
            let tail = coeffs[n - 4..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
            if tail <= CHEB_TAIL * scale {
                // ∫T_j = T_{j+1}/(2(j+1)) − T_{j−1}/(2(j−1)); the c₀ term is halved.
                let mut c = coeffs;
                c[0] *= 0.5;
                let mut b_coef = vec![0.0; n + 1];
                for j in 1..=n {
                    let prev = c[j - 1];
                    let next = if j + 1 < n { c[j + 1] } else { 0.0 };
                    let prev = if j == 1 { 2.0 * prev } else { prev };
                    b_coef[j] = half * (prev - next) / (2.0 * j as f64);
                }
                let mut out = ChebyshevIntegral { a, b, coeffs: b_coef };
                let at_a = out.eval_raw(-1.0);
                out.coeffs[0] = -at_a;
                return Some(out);
            }
            n *= 2;
        }
        None
    }

    fn eval_raw(&self, x: f64) -> f64 {
        // Clenshaw with the plain (unhalved) first coefficient.
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * x * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + x * b1 - b2
    }

    fn eval(&self, t: f64) -> f64 {
        let x = (2.0 * t - self.a - self.b) / (self.b - self.a);
        self.eval_raw(x.clamp(-1.0, 1.0))
    }
}

/// Number of sample points used to bound `|τ|` and `|τ'|` on the horizon.
const SCAN_POINTS: usize = 4096;

/// A gap schedule with a fixed coupling, validated on `[0, horizon]`.
#[derive(Clone)]
pub struct GapSchedule {
    schedule: Arc<dyn Schedule>,
    coupling: f64,
    spectral: Arc<SpectralDensity>,
    sigma: f64,
    horizon: f64,
    tau_max: f64,
    tau_prime_max: f64,
    integral: Option<ChebyshevIntegral>,
    quad: QuadratureConfig,
}

impl fmt::Debug for GapSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GapSchedule")
            .field("schedule", &self.schedule.describe())
            .field("coupling", &self.coupling)
            .field("sigma", &self.sigma)
            .field("horizon", &self.horizon)
            .field("tau_max", &self.tau_max)
            .field("tau_prime_max", &self.tau_prime_max)
            .finish()
    }
}

impl GapSchedule {
    pub fn new(
        schedule: Arc<dyn Schedule>,
        coupling: f64,
        spectral: Arc<SpectralDensity>,
        horizon: f64,
    ) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::validation("horizon > 0", format!("t = {horizon}")));
        }
        if coupling == 0.0 || !coupling.is_finite() {
            return Err(Error::validation("coupling != 0", format!("λ = {coupling}")));
        }
        if let Some((lo, hi)) = schedule.domain() {
            if lo > 0.0 || hi < horizon {
                return Err(Error::validation(
                    "schedule covers horizon",
                    format!("schedule defined on [{lo}, {hi}], horizon is [0, {horizon}]"),
                ));
            }
        }
        let sigma = sigma_from_gamma0(coupling, spectral.gamma0()?);
        let mut tau_max = 0.0f64;
        let mut tau_prime_max = 0.0f64;
        for k in 0..=SCAN_POINTS {
            let t = horizon * k as f64 / SCAN_POINTS as f64;
            tau_max = tau_max.max((schedule.gap(t) / sigma).abs());
            tau_prime_max = tau_prime_max.max((schedule.derivative(t) / sigma).abs());
        }
        if !(tau_max < 1.0) {
            return Err(Error::Regime(format!(
                "sup |τ(t)| = {tau_max:.6} on [0, {horizon}]; the continuum limit needs |τ| < 1"
            )));
        }
        if !tau_prime_max.is_finite() {
            return Err(Error::validation("finite tau'", "τ' is not finite on the horizon"));
        }
        let quad = *spectral.quadrature();
        let mut out = GapSchedule {
            schedule,
            coupling,
            spectral,
            sigma,
            horizon,
            tau_max,
            tau_prime_max,
            integral: None,
            quad,
        };
        let probe = out.clone();
        out.integral = ChebyshevIntegral::fit(|t| probe.root(t), 0.0, horizon);
        if out.integral.is_none() {
            log::debug!("Chebyshev fit of √(1−τ²) did not settle; integrating directly");
        }
        Ok(out)
    }

    /// Coupling that produces a given `σ` for a spectral density.
    pub fn coupling_for_sigma(sigma: f64, spectral: &SpectralDensity) -> Result<f64> {
        Ok((2.0 * sigma / (std::f64::consts::PI * spectral.gamma0()?)).sqrt())
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn coupling(&self) -> f64 {
        self.coupling
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn spectral(&self) -> &Arc<SpectralDensity> {
        &self.spectral
    }
    pub fn schedule(&self) -> &Arc<dyn Schedule> {
        &self.schedule
    }
    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }
    /// `sup |τ'|` over the horizon, from a dense sample.
    pub fn tau_prime_max(&self) -> f64 {
        self.tau_prime_max
    }

    pub fn tau(&self, t: f64) -> f64 {
        self.schedule.gap(t) / self.sigma
    }

    pub fn tau_prime(&self, t: f64) -> f64 {
        self.schedule.derivative(t) / self.sigma
    }

    fn root(&self, t: f64) -> f64 {
        let tau = self.tau(t);
        (1.0 - tau * tau).max(0.0).sqrt()
    }

    /// `∫₀ᵗ √(1 − τ(s)²) ds`.
    pub fn root_integral(&self, t: f64) -> Result<f64> {
        match &self.integral {
            Some(cheb) => Ok(cheb.eval(t)),
            None => Ok(integrate_real(|s| self.root(s), 0.0, t, &self.quad)?.0),
        }
    }

    /// `(y₊(t), y₋(t))`.
    pub fn y(&self, t: f64) -> (Complex64, Complex64) {
        let tau = self.tau(t);
        let c = self.root(t);
        (Complex64::new(-c, -tau), Complex64::new(c, -tau))
    }

    /// `(y₊'(t), y₋'(t))`.
    pub fn y_prime(&self, t: f64) -> (Complex64, Complex64) {
        let tau = self.tau(t);
        let dtau = self.tau_prime(t);
        let c = self.root(t);
        let real = tau * dtau / c;
        (Complex64::new(real, -dtau), Complex64::new(-real, -dtau))
    }

    /// `ε(t, r)` for labels `1..=4`.
    pub fn epsilon(&self, t: f64, r: usize) -> Complex64 {
        let s = self.sigma;
        match r {
            1 => Complex64::default(),
            2 => Complex64::new(0.0, 2.0 * s),
            3 => Complex64::new(0.0, s + s * self.root(t)),
            4 => Complex64::new(0.0, s - s * self.root(t)),
            _ => panic!("resonance label {r} outside 1..=4"),
        }
    }

    /// `w(s, t, r)`; identically one for `r = 1, 2`.
    pub fn w(&self, s: f64, t: f64, r: usize) -> Complex64 {
        let pick = |x: f64| {
            let (p, m) = self.y(x);
            if r == 3 {
                p
            } else {
                m
            }
        };
        match r {
            1 | 2 => Complex64::new(1.0, 0.0),
            3 | 4 => {
                let (ys, yt) = (pick(s), pick(t));
                ((1.0 + yt * yt) / (1.0 + ys * ys)).sqrt()
            }
            _ => panic!("resonance label {r} outside 1..=4"),
        }
    }

    /// `(η(t, r), η̃(t, r))`.
    pub fn vectors(&self, t: f64, r: usize) -> (SystemVector, SystemVector) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match r {
            1 => {
                let v = SystemVector::from_real([h, 0.0, 0.0, h]);
                (v, v)
            }
            2 => {
                let v = SystemVector::from_real([h, 0.0, 0.0, -h]);
                (v, v)
            }
            3 | 4 => {
                let (p, m) = self.y(t);
                let y = if r == 3 { p } else { m };
                let mut eta = SystemVector::ZERO;
                eta[PM] = Complex64::new(1.0, 0.0);
                eta[MP] = y;
                let mut tilde = SystemVector::ZERO;
                tilde[PM] = Complex64::new(1.0, 0.0);
                tilde[MP] = y.conj();
                (eta, tilde * alpha(y))
            }
            _ => panic!("resonance label {r} outside 1..=4"),
        }
    }

    /// `Δ` sampled on `n` equal segments of `[0, t]`.
    pub fn discretize(&self, t: f64, n: usize, sampling: Sampling) -> Result<Protocol> {
        if n == 0 {
            return Err(Error::validation("n >= 1", "discretization needs at least one segment"));
        }
        if !(t > 0.0) || t > self.horizon * (1.0 + 1e-12) {
            return Err(Error::validation("0 < t <= horizon", format!("t = {t}, horizon = {}", self.horizon)));
        }
        let dt = t / n as f64;
        let segments = (1..=n)
            .map(|j| {
                let at = match sampling {
                    Sampling::RightEndpoint => j as f64 * dt,
                    Sampling::Midpoint => (j as f64 - 0.5) * dt,
                };
                Segment::new(self.schedule.gap(at), self.coupling, dt)
            })
            .collect::<Result<Vec<_>>>()?;
        Protocol::new(segments, 1.0, Arc::clone(&self.spectral), Regime::Overlapping)
    }
}

/// Where each segment samples the schedule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Sampling {
    /// `Δ(jt/N)` for segment `j = 1..N`.
    #[default]
    RightEndpoint,
    /// `Δ((j − ½)t/N)`.
    Midpoint,
}

/// Result of the continuum formula, split into its parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuumValue {
    pub value: Complex64,
    /// Contributions of the four constant paths.
    pub constant_paths: [Complex64; 4],
    pub jump_3_to_4: Complex64,
    pub jump_4_to_3: Complex64,
    pub remainder: Remainder,
}

/// Constant paths plus single-jump integrals at time `t`.
pub fn continuum_value(
    schedule: &GapSchedule,
    t: f64,
    rho0: &SystemState,
    a: &Observable,
) -> Result<ContinuumValue> {
    continuum_value_vec(schedule, t, &vectorize_state(rho0), &apply_observable(a))
}

pub fn continuum_value_vec(
    schedule: &GapSchedule,
    t: f64,
    v0: &SystemVector,
    a_vec: &SystemVector,
) -> Result<ContinuumValue> {
    if !(t >= 0.0) || t > schedule.horizon * (1.0 + 1e-12) {
        return Err(Error::validation("0 <= t <= horizon", format!("t = {t}, horizon = {}", schedule.horizon)));
    }
    let sigma = schedule.sigma;
    let big_c = schedule.root_integral(t)?;
    // ∫₀ᵗ ε(s, r) ds for r = 1..4.
    let eps_int = [
        Complex64::default(),
        Complex64::new(0.0, 2.0 * sigma * t),
        Complex64::new(0.0, sigma * t + sigma * big_c),
        Complex64::new(0.0, sigma * t - sigma * big_c),
    ];
    let mut constant_paths = [Complex64::default(); 4];
    let mut left = [Complex64::default(); 4];
    let mut right = [Complex64::default(); 4];
    for r in 1..=4 {
        let (eta0, _) = schedule.vectors(0.0, r);
        let (_, tilde_t) = schedule.vectors(t, r);
        left[r - 1] = v0.inner(&eta0);
        right[r - 1] = tilde_t.inner(a_vec);
        constant_paths[r - 1] =
            (Complex64::i() * eps_int[r - 1]).exp() * schedule.w(0.0, t, r) * left[r - 1] * right[r - 1];
    }
    let jump = |from: usize, to: usize| -> Result<Complex64> {
        let weight = left[from - 1] * right[to - 1];
        if weight == Complex64::default() || t == 0.0 {
            return Ok(Complex64::default());
        }
        let sign = if from == 3 { 1.0 } else { -1.0 };
        let integrand = |s: f64| -> Complex64 {
            let cs = schedule.root_integral(s).unwrap_or(f64::NAN);
            // i∫₀ˢε(from) + i∫ₛᵗε(to) = −σt ± σ(C(t) − 2C(s)).
            let exponent = -sigma * t + sign * sigma * (big_c - 2.0 * cs);
            let (yp, ym) = schedule.y(s);
            let (dp, dm) = schedule.y_prime(s);
            let kernel = if from == 3 { yp * dm / (1.0 + yp * yp) } else { ym * dp / (1.0 + ym * ym) };
            exponent.exp() * schedule.w(0.0, s, from) * kernel * schedule.w(s, t, to)
        };
        Ok(integrate(integrand, 0.0, t, &schedule.quad)?.value * weight)
    };
    let jump_3_to_4 = jump(3, 4)?;
    let jump_4_to_3 = jump(4, 3)?;
    let value = constant_paths.iter().sum::<Complex64>() + jump_3_to_4 + jump_4_to_3;
    Ok(ContinuumValue {
        value,
        constant_paths,
        jump_3_to_4,
        jump_4_to_3,
        remainder: Remainder { class: RemainderClass::CouplingAndGap, truncated_after: Some(1) },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pathsum::{expectation_full, PathSum};

    fn spectral() -> Arc<SpectralDensity> {
        Arc::new(SpectralDensity::gaussian())
    }

    fn ramp(sigma: f64, tau0: f64, rate: f64, horizon: f64) -> GapSchedule {
        let sp = spectral();
        let lambda = GapSchedule::coupling_for_sigma(sigma, &sp).unwrap();
        GapSchedule::new(Arc::new(LinearRamp { start: sigma * tau0, rate: sigma * rate }), lambda, sp, horizon).unwrap()
    }

    #[test]
    fn coupling_for_unit_sigma() {
        let g = ramp(1.0, 0.1, 0.05, 4.0);
        assert!((g.sigma() - 1.0).abs() < 1e-12);
        assert!((g.coupling() - 1.0 / std::f64::consts::PI).abs() < 1e-9);
        assert!((g.tau_prime_max() - 0.05).abs() < 1e-12);
        assert!((g.tau_max() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn rejects_leaving_the_band() {
        let sp = spectral();
        let lambda = GapSchedule::coupling_for_sigma(1.0, &sp).unwrap();
        let err = GapSchedule::new(Arc::new(LinearRamp { start: 0.5, rate: 0.2 }), lambda, sp, 4.0).unwrap_err();
        assert!(matches!(err, Error::Regime(_)));
    }

    #[test]
    fn chebyshev_integral_of_root() {
        let g = ramp(1.0, 0.1, 0.05, 4.0);
        for t in [0.0, 0.3, 1.7, 4.0] {
            // τ = 0.1 + 0.05s: ∫√(1−τ²) = [τ√(1−τ²) + asin τ]/(2·0.05)
            let f = |tau: f64| (tau * (1.0 - tau * tau).sqrt() + tau.asin()) / 0.1;
            let exact = f(0.1 + 0.05 * t) - f(0.1);
            assert!((g.root_integral(t).unwrap() - exact).abs() < 1e-13, "t = {t}");
        }
    }

    #[test]
    fn y_matches_closed_form_branch() {
        let g = ramp(1.0, 0.1, 0.05, 4.0);
        for t in [0.0, 2.0, 4.0] {
            let (p, m) = g.y(t);
            let (cp, cm) = crate::resonance::y_pair(g.tau(t));
            assert!((p - cp).norm() < 1e-14 && (m - cm).norm() < 1e-14);
            assert!((p * m + 1.0).norm() < 1e-14);
        }
    }

    #[test]
    fn y_prime_by_finite_difference() {
        let g = ramp(1.0, 0.1, 0.05, 4.0);
        let h = 1e-6;
        let t = 1.3;
        let (p1, m1) = g.y(t + h);
        let (p0, m0) = g.y(t - h);
        let (dp, dm) = g.y_prime(t);
        assert!(((p1 - p0) / (2.0 * h) - dp).norm() < 1e-8);
        assert!(((m1 - m0) / (2.0 * h) - dm).norm() < 1e-8);
    }

    #[test]
    fn w_cocycle() {
        let g = ramp(1.0, -0.4, 0.3, 4.0);
        for r in 1..=4 {
            for (s, u, t) in [(0.0, 1.0, 3.5), (0.5, 2.5, 1.0), (3.9, 0.1, 2.0)] {
                assert!((g.w(s, s, r) - 1.0).norm() < 1e-15);
                assert!((g.w(s, u, r) * g.w(u, t, r) - g.w(s, t, r)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_schedule_equals_single_segment() {
        let sp = spectral();
        let lambda = GapSchedule::coupling_for_sigma(0.5, &sp).unwrap();
        let g = GapSchedule::new(Arc::new(Constant(0.2)), lambda, Arc::clone(&sp), 3.0).unwrap();
        let rho = SystemState::new([
            [Complex64::new(0.6, 0.0), Complex64::new(0.2, 0.1)],
            [Complex64::new(0.2, -0.1), Complex64::new(0.4, 0.0)],
        ])
        .unwrap();
        let a = Observable::pauli_x();
        let c = continuum_value(&g, 3.0, &rho, &a).unwrap();
        let seg = Protocol::new(vec![Segment::new(0.2, lambda, 3.0).unwrap()], 1.0, sp, Regime::Overlapping).unwrap();
        let p = expectation_full(&seg, &rho, &a).unwrap();
        assert!((c.value - p.value).norm() < 1e-10);
        assert_eq!(c.jump_3_to_4, Complex64::default());
        let id = continuum_value(&g, 3.0, &rho, &Observable::identity()).unwrap();
        assert!((id.value - 1.0).norm() < 1e-8);
    }

    #[test]
    fn discretize_samples() {
        let g = ramp(1.0, 0.1, 0.05, 4.0);
        let p = g.discretize(4.0, 4, Sampling::RightEndpoint).unwrap();
        let gaps: Vec<f64> = p.segments().iter().map(|s| s.gap).collect();
        assert!((gaps[0] - 0.15).abs() < 1e-12 && (gaps[3] - 0.3).abs() < 1e-12);
        let mid = g.discretize(4.0, 4, Sampling::Midpoint).unwrap();
        assert!((mid.segments()[0].gap - 0.125).abs() < 1e-12);
        let one = g.discretize(4.0, 1, Sampling::RightEndpoint).unwrap();
        assert_eq!(one.len(), 1);
        assert!(g.discretize(4.0, 0, Sampling::RightEndpoint).is_err());
    }

    #[test]
    fn jump_entries_scale_inversely_with_n() {
        let g = ramp(1.0, 0.1, 0.05, 4.0);
        let off = |n: usize| {
            let ps = PathSum::new(&g.discretize(4.0, n, Sampling::RightEndpoint).unwrap()).unwrap();
            ps.transitions().iter().map(|t| t.max_off_diagonal()).fold(0.0f64, f64::max)
        };
        let ratio = off(50) / off(100);
        assert!((1.8..=2.2).contains(&ratio), "{ratio}");
    }

    #[test]
    fn spline_reproduces_cubic_free_data() {
        let t: Vec<f64> = (0..=10).map(|k| k as f64 * 0.4).collect();
        let y: Vec<f64> = t.iter().map(|x| 0.1 + 0.05 * x).collect();
        let s = SplineSchedule::new(t, y).unwrap();
        assert!((s.gap(1.33) - (0.1 + 0.05 * 1.33)).abs() < 1e-14);
        assert!((s.derivative(2.71) - 0.05).abs() < 1e-13);
        assert!(SplineSchedule::parse("0 1\n0 2\n").is_err());
        assert!(matches!(SplineSchedule::parse("0 1 2"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn spline_natural_boundary() {
        let t = vec![0.0, 1.0, 2.0, 3.0];
        let y = vec![0.0, 1.0, 0.0, 1.0];
        let s = SplineSchedule::new(t.clone(), y.clone()).unwrap();
        for (x, v) in t.iter().zip(&y) {
            assert!((s.gap(*x) - v).abs() < 1e-14);
        }
        assert_eq!(s.m[0], 0.0);
        assert_eq!(s.m[3], 0.0);
        // Continuity of the first derivative at an interior knot.
        let e = 1e-9;
        assert!((s.derivative(1.0 - e) - s.derivative(1.0 + e)).abs() < 1e-6);
    }
}
