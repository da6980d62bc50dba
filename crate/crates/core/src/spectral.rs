//! Form factors of the spin–fermion coupling and the scalar spectral
//! quantities derived from them.
//!
//! A form factor `g(k, σ)` is given for radial momentum `k ≥ 0` and a point
//! `σ ∈ S²`. Everything downstream depends on it only through
//! `γ(r) = (√|r|/2) ∫_{S²} |g(√|r|, σ)|² dσ`, which is finite at `r → 0` only
//! when `|g|² ~ 1/k`. Implementations therefore also expose the weighted value
//! `h(k, σ) = √k·g(k, σ)`, which stays bounded at the origin.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::Segment;
use crate::quadrature::{integrate_real, QuadratureConfig};

use std::f64::consts::{PI, TAU};

/// A point on the unit sphere in polar coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction {
    pub theta: f64,
    pub phi: f64,
}

impl Direction {
    pub const NORTH: Direction = Direction { theta: 0.0, phi: 0.0 };
}

pub trait FormFactor: Send + Sync {
    /// `g(k, σ)` for `k > 0`.
    fn value(&self, k: f64, dir: Direction) -> Complex64;

    /// `√k·g(k, σ)`; must be finite as `k → 0⁺` for `γ₀` to exist.
    fn weighted(&self, k: f64, dir: Direction) -> Complex64 {
        let k = k.max(f64::MIN_POSITIVE);
        self.value(k, dir) * k.sqrt()
    }

    /// True when `g` does not depend on the direction.
    fn is_isotropic(&self) -> bool {
        false
    }

    fn name(&self) -> String;
}

/// `g(k) = k^{-1/2} e^{-k²}`, so `γ(r) = 2π e^{-2|r|}` and `γ₀ = 2π`.
#[derive(Clone, Copy, Debug, Default)]
pub struct GaussianCutoff;

impl FormFactor for GaussianCutoff {
    fn value(&self, k: f64, _dir: Direction) -> Complex64 {
        Complex64::new((-k * k).exp() / k.sqrt(), 0.0)
    }
    fn weighted(&self, k: f64, _dir: Direction) -> Complex64 {
        Complex64::new((-k * k).exp(), 0.0)
    }
    fn is_isotropic(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        "gaussian".into()
    }
}

/// `g(k) = k^{-1/2}` for `k ≤ cutoff`, zero beyond; `γ = 2π` on `|r| ≤ cutoff²`.
#[derive(Clone, Copy, Debug)]
pub struct FlatCutoff {
    pub cutoff: f64,
}

impl Default for FlatCutoff {
    fn default() -> Self {
        FlatCutoff { cutoff: 1.0 }
    }
}

impl FormFactor for FlatCutoff {
    fn value(&self, k: f64, _dir: Direction) -> Complex64 {
        if k <= self.cutoff {
            Complex64::new(1.0 / k.sqrt(), 0.0)
        } else {
            Complex64::default()
        }
    }
    fn weighted(&self, k: f64, _dir: Direction) -> Complex64 {
        Complex64::new(if k <= self.cutoff { 1.0 } else { 0.0 }, 0.0)
    }
    fn is_isotropic(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        "flat-cutoff".into()
    }
}

/// `g ≡ 0`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Zero;

impl FormFactor for Zero {
    fn value(&self, _k: f64, _dir: Direction) -> Complex64 {
        Complex64::default()
    }
    fn weighted(&self, _k: f64, _dir: Direction) -> Complex64 {
        Complex64::default()
    }
    fn is_isotropic(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        "zero".into()
    }
}

/// Isotropic form factor tabulated at radial nodes.
///
/// The weighted profile `√k·g(k)` is interpolated linearly between nodes,
/// held at its first value below the first node and set to zero beyond the
/// last one.
#[derive(Clone, Debug)]
pub struct Tabulated {
    k: Vec<f64>,
    h: Vec<f64>,
}

impl Tabulated {
    pub fn new(k: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        if k.len() != g.len() || k.len() < 2 {
            return Err(Error::validation("tabulated form factor", "need at least two (k, g) rows"));
        }
        if k[0] <= 0.0 || k.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation("tabulated form factor", "k must be positive and strictly increasing"));
        }
        if g.iter().chain(k.iter()).any(|x| !x.is_finite()) {
            return Err(Error::validation("tabulated form factor", "non-finite entry"));
        }
        let h = k.iter().zip(&g).map(|(k, g)| k.sqrt() * g).collect();
        Ok(Tabulated { k, h })
    }

    /// Two whitespace- or comma-separated columns `k g(k)`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut k = Vec::new();
        let mut g = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| Error::Parse { line: idx + 1, message: format!("`{s}` is not a number") })
            };
            if cols.len() != 2 {
                return Err(Error::Parse { line: idx + 1, message: format!("expected 2 columns, found {}", cols.len()) });
            }
            k.push(parse(cols[0])?);
            g.push(parse(cols[1])?);
        }
        Self::new(k, g)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn interpolate(&self, k: f64) -> f64 {
        let n = self.k.len();
        if k <= self.k[0] {
            return self.h[0];
        }
        if k > self.k[n - 1] {
            return 0.0;
        }
        let i = self.k.partition_point(|&x| x < k).clamp(1, n - 1);
        let (k0, k1) = (self.k[i - 1], self.k[i]);
        let w = (k - k0) / (k1 - k0);
        self.h[i - 1] * (1.0 - w) + self.h[i] * w
    }
}

impl FormFactor for Tabulated {
    fn value(&self, k: f64, dir: Direction) -> Complex64 {
        self.weighted(k, dir) / k.sqrt()
    }
    fn weighted(&self, k: f64, _dir: Direction) -> Complex64 {
        Complex64::new(self.interpolate(k), 0.0)
    }
    fn is_isotropic(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        format!("tabulated({} nodes)", self.k.len())
    }
}

type RadialFn = dyn Fn(f64) -> Complex64 + Send + Sync;
type AngularFn = dyn Fn(f64, Direction) -> Complex64 + Send + Sync;

/// Isotropic form factor from a closure `k ↦ g(k)`.
#[derive(Clone)]
pub struct Radial {
    label: String,
    g: Arc<RadialFn>,
}

impl Radial {
    pub fn new(label: impl Into<String>, g: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        Radial { label: label.into(), g: Arc::new(g) }
    }
}

impl FormFactor for Radial {
    fn value(&self, k: f64, _dir: Direction) -> Complex64 {
        (self.g)(k)
    }
    fn is_isotropic(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        self.label.clone()
    }
}

/// Direction-dependent form factor from a closure `(k, σ) ↦ g(k, σ)`.
#[derive(Clone)]
pub struct Anisotropic {
    label: String,
    g: Arc<AngularFn>,
}

impl Anisotropic {
    pub fn new(label: impl Into<String>, g: impl Fn(f64, Direction) -> Complex64 + Send + Sync + 'static) -> Self {
        Anisotropic { label: label.into(), g: Arc::new(g) }
    }
}

impl FormFactor for Anisotropic {
    fn value(&self, k: f64, dir: Direction) -> Complex64 {
        (self.g)(k, dir)
    }
    fn name(&self) -> String {
        self.label.clone()
    }
}

/// `σ = (π/2)λ²γ₀`.
pub fn sigma_from_gamma0(coupling: f64, gamma0: f64) -> f64 {
    0.5 * PI * coupling * coupling * gamma0
}

/// Sample points for the `γ₀` extrapolation, largest first.
pub const GAMMA0_SAMPLES: [f64; 3] = [1e-4, 1e-6, 1e-8];
/// Allowed relative disagreement of the two `γ₀` estimates.
pub const GAMMA0_TOL: f64 = 1e-6;

/// The form factor together with cached derived quantities.
pub struct SpectralDensity {
    form: Arc<dyn FormFactor>,
    quad: QuadratureConfig,
    isotropic: bool,
    cache: RwLock<HashMap<u64, f64>>,
    gamma0: OnceLock<f64>,
}

impl fmt::Debug for SpectralDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralDensity")
            .field("form", &self.form.name())
            .field("isotropic", &self.isotropic)
            .field("quad", &self.quad)
            .finish()
    }
}

impl Default for SpectralDensity {
    fn default() -> Self {
        Self::new(Arc::new(GaussianCutoff))
    }
}

impl SpectralDensity {
    pub fn new(form: Arc<dyn FormFactor>) -> Self {
        Self::with_config(form, QuadratureConfig::default())
    }

    pub fn with_config(form: Arc<dyn FormFactor>, quad: QuadratureConfig) -> Self {
        let isotropic = form.is_isotropic();
        SpectralDensity { form, quad, isotropic, cache: RwLock::new(HashMap::new()), gamma0: OnceLock::new() }
    }

    pub fn gaussian() -> Self {
        Self::default()
    }

    /// `gaussian`, `flat-cutoff`, or `file:<path>` for a tabulated profile.
    pub fn from_name(name: &str, quad: QuadratureConfig) -> Result<Self> {
        let form: Arc<dyn FormFactor> = match name.trim() {
            "gaussian" => Arc::new(GaussianCutoff),
            "flat-cutoff" => Arc::new(FlatCutoff::default()),
            other => match other.strip_prefix("file:") {
                Some(path) => Arc::new(Tabulated::from_file(Path::new(path.trim()))?),
                None => {
                    return Err(Error::validation(
                        "form factor",
                        format!("unknown form factor `{other}` (gaussian, flat-cutoff, file:<path>)"),
                    ))
                }
            },
        };
        Ok(Self::with_config(form, quad))
    }

    pub fn form(&self) -> &Arc<dyn FormFactor> {
        &self.form
    }

    pub fn is_isotropic(&self) -> bool {
        self.isotropic
    }

    pub fn quadrature(&self) -> &QuadratureConfig {
        &self.quad
    }

    /// `γ(r) = ½∫_{S²}|h(√|r|, σ)|² dσ`; depends on `|r|` only.
    pub fn gamma(&self, r: f64) -> Result<f64> {
        let r = r.abs();
        if !r.is_finite() {
            return Err(Error::validation("finite argument", format!("γ({r})")));
        }
        let k = r.sqrt();
        if self.isotropic {
            return Ok(TAU * self.form.weighted(k, Direction::NORTH).norm_sqr());
        }
        let key = r.to_bits();
        if let Some(v) = self.cache.read().expect("gamma cache poisoned").get(&key) {
            return Ok(*v);
        }
        let value = self.sphere_average(k)?;
        self.cache.write().expect("gamma cache poisoned").insert(key, value);
        Ok(value)
    }

    fn sphere_average(&self, k: f64) -> Result<f64> {
        let form = &self.form;
        let quad = &self.quad;
        let failure: RwLock<Option<Error>> = RwLock::new(None);
        let (value, _) = integrate_real(
            |theta| {
                let inner = integrate_real(
                    |phi| form.weighted(k, Direction { theta, phi }).norm_sqr(),
                    0.0,
                    TAU,
                    quad,
                );
                match inner {
                    Ok((v, _)) => v * theta.sin(),
                    Err(e) => {
                        failure.write().expect("poisoned").get_or_insert(e);
                        f64::NAN
                    }
                }
            },
            0.0,
            PI,
            quad,
        )
        .map_err(|e| failure.write().expect("poisoned").take().unwrap_or(e))?;
        Ok(0.5 * value)
    }

    /// `γ₀ = lim_{r→0⁺} γ(r)` by Richardson extrapolation (ratio 100) over
    /// `r ∈ {1e-4, 1e-6, 1e-8}`; the two estimates must agree to `1e-6`.
    pub fn gamma0(&self) -> Result<f64> {
        if let Some(v) = self.gamma0.get() {
            return Ok(*v);
        }
        let g: Vec<f64> = GAMMA0_SAMPLES.iter().map(|&r| self.gamma(r)).collect::<Result<_>>()?;
        let q = GAMMA0_SAMPLES[0] / GAMMA0_SAMPLES[1];
        let coarse = (q * g[1] - g[0]) / (q - 1.0);
        let fine = (q * g[2] - g[1]) / (q - 1.0);
        let scale = coarse.abs().max(fine.abs());
        if !(fine.is_finite() && coarse.is_finite()) || (coarse - fine).abs() > GAMMA0_TOL * scale {
            return Err(Error::Infrared(format!(
                "γ(r) does not settle as r → 0 (extrapolated {coarse:.6e} vs {fine:.6e}); g must behave like k^(-1/2)"
            )));
        }
        if !(fine > 0.0) {
            return Err(Error::Infrared(format!("γ₀ = {fine:.3e} is not positive")));
        }
        Ok(*self.gamma0.get_or_init(|| fine))
    }

    /// `(σ, τ) = ((π/2)λ²γ₀, Δ/σ)`.
    pub fn sigma_tau(&self, segment: &Segment) -> Result<(f64, f64)> {
        if segment.coupling == 0.0 {
            return Err(Error::Degenerate("λ = 0 leaves τ = Δ/σ undefined".into()));
        }
        let sigma = sigma_from_gamma0(segment.coupling, self.gamma0()?);
        Ok((sigma, segment.gap / sigma))
    }

    /// `⟨𝒫 1/(r²−1), γ(rΔ)⟩ = PV ∫_ℝ γ(rΔ)/(r²−1) dr`.
    pub fn pv_integral(&self, delta: f64) -> Result<f64> {
        if delta == 0.0 || !delta.is_finite() {
            return Err(Error::validation("delta != 0", format!("Δ = {delta}")));
        }
        let failure: RwLock<Option<Error>> = RwLock::new(None);
        let result = principal_value_scaled(
            |r| match self.gamma(r * delta) {
                Ok(v) => v,
                Err(e) => {
                    failure.write().expect("poisoned").get_or_insert(e);
                    f64::NAN
                }
            },
            1.0 / delta.abs(),
            &self.quad,
        );
        if let Some(e) = failure.write().expect("poisoned").take() {
            return Err(e);
        }
        result
    }

    pub fn thermal(self: &Arc<Self>, beta: f64) -> Result<ThermalTransform> {
        ThermalTransform::new(beta, Arc::clone(self))
    }
}

/// Half-width of the folded windows around the poles at `±1`.
const POLE_WINDOW: f64 = 0.5;

/// `PV ∫_ℝ f(r)/(r²−1) dr` for `f` bounded by a sublinear function.
///
/// The line is split into `[−½, ½]`, the windows `1 ± ½` and `−1 ± ½`, and the
/// tails `|r| > 3/2`. Each window is folded about its pole,
/// `PV∫_{-h}^{h} F(1+s)/s ds = ∫_0^h (F(1+s) − F(1−s))/s ds`, leaving a smooth
/// integrand. The tails are mapped to `(0, 1]` through `r = R/x`.
pub fn principal_value<F: Fn(f64) -> f64>(f: F, cfg: &QuadratureConfig) -> Result<f64> {
    principal_value_scaled(f, 1.0, cfg)
}

/// As [`principal_value`] for an `f` that varies on the length `scale`. The
/// tails are integrated in `ln r` up to `scale` before the map to `(0, 1]`.
///
/// The Lorentzian `f(0)/(1 + r²/w²)` with `w = 2·scale` is subtracted first and
/// its principal value `−π w/(w²+1)` added back, so the remaining pieces are
/// small wherever `f` is close to its value at the origin.
pub fn principal_value_scaled<F: Fn(f64) -> f64>(f: F, scale: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_growth(&f)?;
    let f0 = f(0.0);
    let w = 2.0 * scale.abs();
    if f0 != 0.0 && f0.is_finite() && w > 0.0 && w.is_finite() {
        let rest = principal_value_raw(|r| f(r) - f0 / (1.0 + (r / w) * (r / w)), scale, cfg)?;
        return Ok(rest - f0 * PI * w / (w * w + 1.0));
    }
    principal_value_raw(f, scale, cfg)
}

fn principal_value_raw<F: Fn(f64) -> f64>(f: F, scale: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let h = POLE_WINDOW;
    let edge = 1.0 + h;
    let middle = integrate_real(|r| f(r) / (r * r - 1.0), -(1.0 - h), 1.0 - h, cfg)?;
    // F(r) = f(r)/(r+1) at the pole r = 1, G(r) = f(r)/(r−1) at r = −1.
    let upper = integrate_real(
        |s| {
            let (p, m) = (1.0 + s, 1.0 - s);
            (f(p) / (p + 1.0) - f(m) / (m + 1.0)) / s
        },
        0.0,
        h,
        cfg,
    )?;
    let lower = integrate_real(
        |s| {
            let (p, m) = (-1.0 + s, -1.0 - s);
            (f(p) / (p - 1.0) - f(m) / (m - 1.0)) / s
        },
        0.0,
        h,
        cfg,
    )?;
    let far = edge.max(scale.abs());
    let tail = |sign: f64| -> Result<f64> {
        let near = integrate_real(
            |t| {
                let r = t.exp();
                f(sign * r) * r / (r * r - 1.0)
            },
            edge.ln(),
            far.ln(),
            cfg,
        )?;
        let mapped = integrate_real(|x| f(sign * far / x) * far / (far * far - x * x), 0.0, 1.0, cfg)
            .map_err(|e| Error::Divergence(format!("tail of the principal-value integral: {e}")))?;
        Ok(near.0 + mapped.0)
    };
    let right = tail(1.0)?;
    let left = tail(-1.0)?;
    let value = middle.0 + upper.0 + lower.0 + right + left;
    if !value.is_finite() {
        return Err(Error::Divergence("principal-value integral is not finite".into()));
    }
    Ok(value)
}

/// Rejects integrands that do not decay relative to `r`, for which the tails diverge.
fn check_growth<F: Fn(f64) -> f64>(f: &F) -> Result<()> {
    let probe = [1e6, 1e9, 1e12];
    for sign in [1.0, -1.0] {
        let v: Vec<f64> = probe.iter().map(|&r| f(sign * r)).collect();
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Divergence(format!("integrand is not finite at r = {}1e12", if sign > 0.0 { "" } else { "-" })));
        }
        let slope_far = v[2].abs() / probe[2];
        let slope_near = v[0].abs() / probe[0];
        if slope_far > 0.0 && slope_far >= slope_near {
            return Err(Error::Divergence("γ grows at least linearly; the tails diverge".into()));
        }
    }
    Ok(())
}

/// `[τ_β g](u, σ) = 2^{-1/2}(e^{-βu}+1)^{-1/2} |u|^{1/4} g(√|u|, σ)`, conjugated
/// for `u < 0`.
#[derive(Clone, Debug)]
pub struct ThermalTransform {
    beta: f64,
    source: Arc<SpectralDensity>,
}

impl ThermalTransform {
    pub fn new(beta: f64, source: Arc<SpectralDensity>) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::validation("beta > 0", format!("beta = {beta}")));
        }
        Ok(ThermalTransform { beta, source })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eval(&self, u: f64, dir: Direction) -> Complex64 {
        let h = self.source.form.weighted(u.abs().sqrt(), dir);
        let h = if u < 0.0 { h.conj() } else { h };
        let boltzmann = (-self.beta * u).exp();
        h * (0.5 / (boltzmann + 1.0)).sqrt()
    }
}
