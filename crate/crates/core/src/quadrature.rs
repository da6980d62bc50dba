//! Adaptive Gauss–Kronrod (10/21-point) quadrature for complex-valued
//! integrands on finite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Environment variable that overrides the relative tolerance. The absolute
/// tolerance follows at one hundredth of it.
pub const TOLERANCE_ENV: &str = "RESONANCE_QUAD_TOL";

pub const DEFAULT_ABS_TOL: f64 = 1e-10;
pub const DEFAULT_REL_TOL: f64 = 1e-8;

/// Kronrod abscissae; odd indices are the Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { abs_tol: DEFAULT_ABS_TOL, rel_tol: DEFAULT_REL_TOL, max_intervals: 2000 }
    }
}

impl QuadratureConfig {
    /// Defaults, with the relative tolerance taken from `RESONANCE_QUAD_TOL`
    /// when it is set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(TOLERANCE_ENV) {
            Ok(raw) => {
                let tol: f64 = raw.trim().parse().map_err(|_| {
                    Error::validation("quadrature tolerance", format!("{TOLERANCE_ENV}=`{raw}` is not a number"))
                })?;
                Self::with_tolerance(tol)
            }
            Err(_) => Ok(Self::default()),
        }
    }

    pub fn with_tolerance(rel_tol: f64) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(Error::validation("quadrature tolerance in (0,1)", format!("got {rel_tol}")));
        }
        Ok(QuadratureConfig { abs_tol: 1e-2 * rel_tol, rel_tol, ..Self::default() })
    }

    /// Same relative target, absolute target scaled by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        QuadratureConfig { abs_tol: self.abs_tol * factor, rel_tol: self.rel_tol * factor, ..*self }
    }
}

/// Integral estimate with its error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 21-point Kronrod panel with the QUADPACK error heuristic.
fn gk21<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = Complex64::default();
    let mut abs_sum = fc.norm() * WGK[10];
    let mut fv = [(Complex64::default(), Complex64::default()); 10];
    for (j, slot) in fv.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        *slot = (f1, f2);
        kronrod += (f1 + f2) * WGK[j];
        abs_sum += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut asc = WGK[10] * (fc - mean).norm();
    for (j, (f1, f2)) in fv.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).norm() + (f2 - mean).norm());
    }
    let result = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).norm();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (1.0f64).min((200.0 * err / res_asc).powf(1.5));
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (result, err)
}

/// Adaptive bisection of the panel with the largest error until the summed
/// error meets `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate { value: Complex64::default(), error: 0.0, evaluations: 0 });
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::validation("finite interval", format!("[{a}, {b}]")));
    }
    let (value, error) = gk21(&f, a, b);
    let mut evaluations = 21;
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    loop {
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::numeric(format!("quadrature on [{a}, {b}]: non-finite integrand"), f64::INFINITY));
        }
        let target = cfg.abs_tol.max(cfg.rel_tol * total.norm());
        if total_err <= target {
            break;
        }
        if heap.len() >= cfg.max_intervals {
            return Err(Error::numeric(format!("quadrature on [{a}, {b}]"), total_err));
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            return Err(Error::numeric(format!("quadrature on [{a}, {b}]: interval underflow"), total_err));
        }
        let (v1, e1) = gk21(&f, worst.a, mid);
        let (v2, e2) = gk21(&f, mid, worst.b);
        evaluations += 42;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
        // Refresh the running sums to keep cancellation out of them.
        if heap.len() % 64 == 0 {
            let mut panels: Vec<&Panel> = heap.iter().collect();
            panels.sort_by(|p, q| p.a.total_cmp(&q.a));
            total = panels.iter().map(|p| p.value).sum();
            total_err = panels.iter().map(|p| p.error).sum();
        }
    }
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = panels.iter().map(|p| p.value).sum();
    let error = panels.iter().map(|p| p.error).sum();
    Ok(Estimate { value, error, evaluations })
}

/// Real-valued convenience wrapper; returns `(value, error)`.
pub fn integrate_real<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    let est = integrate(|x| Complex64::new(f(x), 0.0), a, b, cfg)?;
    Ok((est.value.re, est.error))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let cfg = QuadratureConfig::default();
        let (v, _) = integrate_real(|x| x.powi(7) - 3.0 * x * x, -1.0, 2.0, &cfg).unwrap();
        let exact = (2f64.powi(8) - 1.0) / 8.0 - (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_complex() {
        let cfg = QuadratureConfig::default();
        let est = integrate(|x| Complex64::new(0.0, 5.0 * x).exp(), 0.0, PI, &cfg).unwrap();
        // ∫₀^π e^{5ix} dx = (e^{5iπ} − 1)/(5i) = 2i/5
        assert!((est.value - Complex64::new(0.0, 0.4)).norm() < 1e-12);
    }

    #[test]
    fn integrable_endpoint_singularity() {
        let cfg = QuadratureConfig::default();
        let (v, _) = integrate_real(|x| 1.0 / x.sqrt(), 0.0, 1.0, &cfg).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let cfg = QuadratureConfig::default();
        let (fwd, _) = integrate_real(f64::exp, 0.0, 1.0, &cfg).unwrap();
        let (rev, _) = integrate_real(f64::exp, 1.0, 0.0, &cfg).unwrap();
        assert!((fwd + rev).abs() < 1e-14);
        assert!((fwd - (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn budget_exhaustion_is_numeric_error() {
        let cfg = QuadratureConfig { max_intervals: 4, ..QuadratureConfig::default() };
        let err = integrate_real(|x| (1.0 / x).sin(), 1e-6, 1.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::Numeric { .. }));
    }

    #[test]
    fn tolerance_constructor() {
        let cfg = QuadratureConfig::with_tolerance(1e-6).unwrap();
        assert_eq!(cfg.rel_tol, 1e-6);
        assert!((cfg.abs_tol - 1e-8).abs() < 1e-22);
        assert!(QuadratureConfig::with_tolerance(-1.0).is_err());
        assert!(QuadratureConfig::with_tolerance(f64::NAN).is_err());
    }
}
