//! The `resdyn` command line: line-oriented input files in, CSV out.
//!
//! Input files hold `key = value` header lines and `segment Δ duration [λ]`
//! lines, in any order. `#` starts a comment. A repeated key keeps its last
//! value and logs a warning.
//!
//! ```text
//! beta = 1.0
//! lambda = 0.2
//! regime = overlapping
//! form_factor = gaussian
//! observable = pauli_z
//! rho0 = 0.5 0.5 0.5 0.5
//! segment 0.05 2.0
//! segment -0.04 3.0 0.25
//! ```

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path as FsPath, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::continuum::{
    continuum_value, Constant, GapSchedule, LinearRamp, Sampling, Schedule, SplineSchedule,
};
use crate::error::{Error, Result};
use crate::model::{
    ground_state, Matrix2, Observable, Protocol, Regime, Segment, SystemState, DEFAULT_GAP_FLOOR_FACTOR,
};
use crate::pathsum::{expectation_full, expectation_truncated, PathSum, RemainderClass, FULL_BUDGET};
use crate::quadrature::QuadratureConfig;
use crate::resonance::resonance_sets;
use crate::scenarios::{crossing_limits, crossing_probability, CrossingSpec};
use crate::spectral::SpectralDensity;

#[derive(Debug, Parser)]
#[command(name = "resdyn", version, about = "Resonance path-sum dynamics of a driven two-level system")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-segment resonance energies, vectors and transition matrices.
    Resonances(CommonArgs),
    /// Expectation value of the configured observable over a time grid.
    Evolve(CommonArgs),
    /// Excited-state population for a single sudden level crossing.
    Crossing(CommonArgs),
    /// Continuum-limit value alongside discretized path sums.
    Continuum(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Destination CSV; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Time grid `t0:t1:n`.
    #[arg(long)]
    pub grid: Option<Grid>,
    /// Keep only paths with at most K jumps.
    #[arg(long = "max-jumps")]
    pub max_jumps: Option<usize>,
    #[arg(long)]
    pub regime: Option<Regime>,
    /// Cross-check truncated sums against full enumeration when N ≤ 13.
    #[arg(long)]
    pub oracle: bool,
}

/// `n` equally spaced times from `start` to `end`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(start: f64, end: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::validation("n_points >= 2", format!("n = {points}")));
        }
        if !(start >= 0.0) || !(end > start) || !end.is_finite() {
            return Err(Error::validation("t_end > t_start >= 0", format!("{start}:{end}")));
        }
        Ok(Grid { start, end, points })
    }

    pub fn times(&self) -> Vec<f64> {
        let step = (self.end - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|k| if k + 1 == self.points { self.end } else { self.start + step * k as f64 })
            .collect()
    }
}

impl std::str::FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected t0:t1:n, got `{s}`"));
        }
        let start = parts[0].trim().parse::<f64>().map_err(|e| format!("t0: {e}"))?;
        let end = parts[1].trim().parse::<f64>().map_err(|e| format!("t1: {e}"))?;
        let points = parts[2].trim().parse::<usize>().map_err(|e| format!("n: {e}"))?;
        Grid::new(start, end, points).map_err(|e| e.to_string())
    }
}

const KEYS: &[&str] = &[
    "beta",
    "lambda",
    "regime",
    "form_factor",
    "observable",
    "rho0",
    "gap_floor",
    "delta1",
    "delta2",
    "t_c",
    "schedule",
    "horizon",
    "n_values",
    "sampling",
    "grid",
];

#[derive(Clone, Debug)]
struct Entry {
    line: usize,
    value: String,
}

#[derive(Clone, Copy, Debug)]
struct SegmentLine {
    line: usize,
    gap: f64,
    duration: f64,
    coupling: Option<f64>,
}

/// A parsed input file before any physics is evaluated.
#[derive(Clone, Debug, Default)]
pub struct InputFile {
    entries: BTreeMap<&'static str, Entry>,
    segments: Vec<SegmentLine>,
    base_dir: Option<PathBuf>,
}

fn parse_number(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse { line, message: format!("`{s}` is not a number") })
}

/// Accepts `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`.
fn parse_complex(s: &str, line: usize) -> Result<Complex64> {
    let s = s.trim();
    let bad = || Error::Parse { line, message: format!("`{s}` is not a complex number") };
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex64::new(parse_number(s, line)?, 0.0));
    };
    // The imaginary part starts at the last sign that is not an exponent sign.
    let split = body
        .char_indices()
        .rev()
        .find(|&(k, ch)| (ch == '+' || ch == '-') && k > 0 && !matches!(body.as_bytes()[k - 1], b'e' | b'E'))
        .map(|(k, _)| k);
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        v => v.parse::<f64>().map_err(|_| bad())?,
    };
    let re = re.parse::<f64>().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

fn parse_matrix(s: &str, line: usize) -> Result<Matrix2> {
    let parts: Vec<&str> = s.split(|c: char| c.is_whitespace() || c == ',').filter(|p| !p.is_empty()).collect();
    if parts.len() != 4 {
        return Err(Error::Parse { line, message: format!("expected 4 matrix entries, found {}", parts.len()) });
    }
    let z: Vec<Complex64> = parts.iter().map(|p| parse_complex(p, line)).collect::<Result<_>>()?;
    Ok([[z[0], z[1]], [z[2], z[3]]])
}

impl InputFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = InputFile::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some((key, value)) = content.split_once('=') {
                let key = key.trim();
                let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                    return Err(Error::Parse { line, message: format!("unknown key `{key}`") });
                };
                let value = value.trim();
                if value.is_empty() {
                    return Err(Error::Parse { line, message: format!("`{key}` has no value") });
                }
                if let Some(prev) = out.entries.insert(known, Entry { line, value: value.to_string() }) {
                    log::warn!("line {line}: `{key}` repeats line {}; the later value wins", prev.line);
                }
                continue;
            }
            let mut words = content.split_whitespace();
            match words.next() {
                Some("segment") => {
                    let rest: Vec<&str> = words.collect();
                    if !(2..=3).contains(&rest.len()) {
                        return Err(Error::Parse {
                            line,
                            message: format!("`segment` takes Δ, duration and an optional λ; found {} values", rest.len()),
                        });
                    }
                    out.segments.push(SegmentLine {
                        line,
                        gap: parse_number(rest[0], line)?,
                        duration: parse_number(rest[1], line)?,
                        coupling: rest.get(2).map(|v| parse_number(v, line)).transpose()?,
                    });
                }
                _ => return Err(Error::Parse { line, message: format!("cannot parse `{content}`") }),
            }
        }
        Ok(out)
    }

    pub fn from_file(path: &FsPath) -> Result<Self> {
        let mut out = Self::parse(&std::fs::read_to_string(path)?)?;
        out.base_dir = path.parent().map(FsPath::to_path_buf);
        Ok(out)
    }

    fn raw(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key).map(|e| parse_number(&e.value, e.line)).transpose()
    }

    fn required(&self, key: &'static str) -> Result<f64> {
        self.number(key)?.ok_or_else(|| Error::validation("required key", format!("`{key}` is missing")))
    }

    fn resolve(&self, path: &str) -> PathBuf {
        let p = PathBuf::from(path.trim());
        match &self.base_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p,
        }
    }

    pub fn beta(&self) -> Result<f64> {
        Ok(self.number("beta")?.unwrap_or(1.0))
    }

    pub fn regime(&self) -> Result<Regime> {
        match self.raw("regime") {
            None => Ok(Regime::Overlapping),
            Some(e) => e.value.parse::<Regime>().map_err(|_| Error::Parse {
                line: e.line,
                message: format!("unknown regime `{}` (overlapping, isolated)", e.value),
            }),
        }
    }

    pub fn spectral(&self) -> Result<Arc<SpectralDensity>> {
        let name = self.raw("form_factor").map(|e| e.value.as_str()).unwrap_or("gaussian");
        let name = match name.strip_prefix("file:") {
            Some(path) => format!("file:{}", self.resolve(path).display()),
            None => name.to_string(),
        };
        Ok(Arc::new(SpectralDensity::from_name(&name, QuadratureConfig::from_env()?)?))
    }

    pub fn observable(&self) -> Result<Observable> {
        let Some(e) = self.raw("observable") else {
            return Ok(Observable::pauli_z());
        };
        Ok(match e.value.as_str() {
            "identity" => Observable::identity(),
            "pauli_x" => Observable::pauli_x(),
            "pauli_y" => Observable::pauli_y(),
            "pauli_z" => Observable::pauli_z(),
            "projector_plus" => Observable::projector(true),
            "projector_minus" => Observable::projector(false),
            other => Observable::new(parse_matrix(other, e.line)?)?,
        })
    }

    /// Defaults to the ground state of the first segment.
    pub fn rho0(&self, first_gap: f64) -> Result<SystemState> {
        let Some(e) = self.raw("rho0") else {
            return Ok(ground_state(first_gap));
        };
        Ok(match e.value.as_str() {
            "plus" => SystemState::pure_spin(true),
            "minus" => SystemState::pure_spin(false),
            "mixed" => SystemState::maximally_mixed(),
            other => SystemState::new(parse_matrix(other, e.line)?)?,
        })
    }

    pub fn grid(&self) -> Result<Option<Grid>> {
        self.raw("grid")
            .map(|e| e.value.parse::<Grid>().map_err(|message| Error::Parse { line: e.line, message }))
            .transpose()
    }

    /// Protocol from the `segment` lines; `regime` overrides the file.
    pub fn protocol(&self, regime: Option<Regime>) -> Result<Protocol> {
        if self.segments.is_empty() {
            return Err(Error::validation("N >= 1", "the input has no `segment` lines"));
        }
        let lambda = self.number("lambda")?;
        let segments = self
            .segments
            .iter()
            .map(|s| {
                let coupling = s.coupling.or(lambda).ok_or_else(|| {
                    Error::validation("coupling given", format!("segment on line {} has no λ and no `lambda` key", s.line))
                })?;
                Segment::new(s.gap, coupling, s.duration)
            })
            .collect::<Result<Vec<_>>>()?;
        let floor = self.number("gap_floor")?.unwrap_or(DEFAULT_GAP_FLOOR_FACTOR);
        let regime = match regime {
            Some(r) => r,
            None => self.regime()?,
        };
        Protocol::with_gap_floor(segments, self.beta()?, self.spectral()?, regime, floor)
    }

    pub fn crossing(&self, regime: Option<Regime>) -> Result<CrossingSpec> {
        let regime = match regime {
            Some(r) => r,
            None => self.regime()?,
        };
        CrossingSpec::with_spectral(
            self.required("delta1")?,
            self.required("delta2")?,
            self.required("t_c")?,
            self.required("lambda")?,
            self.beta()?,
            regime,
            self.spectral()?,
        )
    }

    /// `constant Δ`, `ramp Δ₀ rate`, or `file:<path>` of `(t, Δ)` rows.
    pub fn schedule(&self) -> Result<Arc<dyn Schedule>> {
        let e = self.raw("schedule").ok_or_else(|| Error::validation("required key", "`schedule` is missing"))?;
        if let Some(path) = e.value.strip_prefix("file:") {
            return Ok(Arc::new(SplineSchedule::from_file(&self.resolve(path))?));
        }
        let words: Vec<&str> = e.value.split_whitespace().collect();
        match words.as_slice() {
            ["constant", d] => Ok(Arc::new(Constant(parse_number(d, e.line)?))),
            ["ramp", d0, rate] => Ok(Arc::new(LinearRamp {
                start: parse_number(d0, e.line)?,
                rate: parse_number(rate, e.line)?,
            })),
            _ => Err(Error::Parse {
                line: e.line,
                message: format!("unknown schedule `{}` (constant Δ, ramp Δ0 rate, file:<path>)", e.value),
            }),
        }
    }

    pub fn n_values(&self) -> Result<Vec<usize>> {
        let Some(e) = self.raw("n_values") else {
            return Ok(vec![25, 50, 100, 200]);
        };
        e.value
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|w| !w.is_empty())
            .map(|w| {
                w.parse::<usize>()
                    .ok()
                    .filter(|&n| n >= 1)
                    .ok_or_else(|| Error::Parse { line: e.line, message: format!("`{w}` is not a positive integer") })
            })
            .collect()
    }

    pub fn sampling(&self) -> Result<Sampling> {
        match self.raw("sampling").map(|e| (e.line, e.value.as_str())) {
            None | Some((_, "right")) => Ok(Sampling::RightEndpoint),
            Some((_, "midpoint")) => Ok(Sampling::Midpoint),
            Some((line, other)) => Err(Error::Parse { line, message: format!("unknown sampling `{other}` (right, midpoint)") }),
        }
    }
}

/// Parses input text into a protocol.
pub fn parse_protocol(text: &str) -> Result<Protocol> {
    InputFile::parse(text)?.protocol(None)
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn remainder_label(class: RemainderClass) -> &'static str {
    match class {
        RemainderClass::Coupling => "O(max|lambda|)",
        RemainderClass::CouplingAndGap => "O(|lambda|+Delta_max)",
    }
}

fn grid_or(args: &CommonArgs, input: &InputFile, fallback: impl FnOnce() -> Result<Grid>) -> Result<Grid> {
    match args.grid {
        Some(g) => Ok(g),
        None => match input.grid()? {
            Some(g) => Ok(g),
            None => fallback(),
        },
    }
}

fn resonances_csv(args: &CommonArgs, input: &InputFile) -> Result<String> {
    let protocol = input.protocol(args.regime)?;
    let sets = resonance_sets(&protocol)?;
    let ps = PathSum::from_parts(sets, protocol.segments().iter().map(|s| s.duration).collect())?;
    let label = remainder_label(RemainderClass::for_regime(protocol.regime()));
    let mut out = String::from("kind,segment,row,col,re,im,remainder_class\n");
    let mut row = |kind: &str, seg: usize, r: usize, c: usize, z: Complex64| {
        let _ = writeln!(out, "{kind},{seg},{r},{c},{},{},{label}", num(z.re), num(z.im));
    };
    for (j, set) in ps.sets().iter().enumerate() {
        for r in 0..4 {
            row("energy", j + 1, r + 1, 0, set.energies[r]);
        }
        for r in 0..4 {
            for c in 0..4 {
                row("eta", j + 1, r + 1, c + 1, set.right[r][c]);
            }
        }
        for r in 0..4 {
            for c in 0..4 {
                row("eta_tilde", j + 1, r + 1, c + 1, set.left[r][c]);
            }
        }
    }
    for (j, t) in ps.transitions().iter().enumerate() {
        for r in 0..4 {
            for c in 0..4 {
                row("transition", j + 1, r + 1, c + 1, t.t[r][c]);
            }
        }
    }
    Ok(out)
}

fn evolve_csv(args: &CommonArgs, input: &InputFile) -> Result<String> {
    let protocol = input.protocol(args.regime)?;
    let grid = grid_or(args, input, || Grid::new(0.0, protocol.total_duration(), 101))?;
    let rho0 = input.rho0(protocol.segments()[0].gap)?;
    let a = input.observable()?;
    let rows: Vec<(f64, String)> = grid
        .times()
        .into_par_iter()
        .map(|t| -> Result<(f64, String)> {
            let p = protocol.until(t)?;
            let (e, k_label) = match args.max_jumps {
                Some(k) => (expectation_truncated(&p, &rho0, &a, k)?, k.to_string()),
                None => (expectation_full(&p, &rho0, &a)?, "full".to_string()),
            };
            let mut line = format!(
                "{},{},{},{},{}",
                num(t),
                num(e.value.re),
                num(e.value.im),
                k_label,
                remainder_label(e.remainder.class)
            );
            if args.oracle {
                let diff = if args.max_jumps.is_some() && p.len() <= FULL_BUDGET {
                    let full = expectation_full(&p, &rho0, &a)?;
                    num((full.value - e.value).norm())
                } else {
                    String::new()
                };
                line.push(',');
                line.push_str(&diff);
            }
            Ok((t, line))
        })
        .collect::<Result<_>>()?;
    let mut out = String::from("t,re,im,truncation_K,remainder_class");
    out.push_str(if args.oracle { ",oracle_abs_diff\n" } else { "\n" });
    for (_, line) in rows {
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

fn crossing_csv(args: &CommonArgs, input: &InputFile) -> Result<String> {
    let spec = input.crossing(args.regime)?;
    let grid = grid_or(args, input, || Grid::new(0.0, 3.0 * spec.t_c, 101))?;
    let mut rows: Vec<(f64, &str, f64, RemainderClass)> = grid
        .times()
        .into_par_iter()
        .map(|t| crossing_probability(&spec, t).map(|p| (t, "", p.value, p.remainder.class)))
        .collect::<Result<_>>()?;
    if spec.t_c >= grid.start && spec.t_c <= grid.end {
        let (before, after) = crossing_limits(&spec)?;
        let at = rows.partition_point(|r| r.0 < spec.t_c);
        // A grid point exactly at t_c is the left limit; keep only the marked rows.
        let end = if rows.get(at).is_some_and(|r| r.0 == spec.t_c) { at + 1 } else { at };
        rows.splice(
            at..end,
            [
                (spec.t_c, "t_c-", before.value, before.remainder.class),
                (spec.t_c, "t_c+", after.value, after.remainder.class),
            ],
        );
    }
    let mut out = String::from("t,marker,p_ge,remainder_class\n");
    for (t, marker, p, class) in rows {
        let _ = writeln!(out, "{},{marker},{},{}", num(t), num(p), remainder_label(class));
    }
    Ok(out)
}

fn continuum_csv(args: &CommonArgs, input: &InputFile) -> Result<String> {
    let horizon = input.required("horizon")?;
    let lambda = input.required("lambda")?;
    let schedule = GapSchedule::new(input.schedule()?, lambda, input.spectral()?, horizon)?;
    let grid = grid_or(args, input, || Grid::new(0.0, horizon, 21))?;
    if grid.end > horizon {
        return Err(Error::validation("grid within horizon", format!("t1 = {} > horizon = {horizon}", grid.end)));
    }
    let first_gap = schedule.schedule().gap(0.0);
    let rho0 = input.rho0(first_gap)?;
    let a = input.observable()?;
    let n_values = input.n_values()?;
    let sampling = input.sampling()?;
    let k = args.max_jumps.unwrap_or(1);
    let blocks: Vec<String> = grid
        .times()
        .into_par_iter()
        .map(|t| -> Result<String> {
            let c = continuum_value(&schedule, t, &rho0, &a)?;
            let label = remainder_label(c.remainder.class);
            let mut block = format!("{},continuum,,,{},{},{label}\n", num(t), num(c.value.re), num(c.value.im));
            if t > 0.0 {
                for &n in &n_values {
                    let p = schedule.discretize(t, n, sampling)?;
                    let e = expectation_truncated(&p, &rho0, &a, k)?;
                    let _ = writeln!(
                        block,
                        "{},discretized,{n},{k},{},{},{label}",
                        num(t),
                        num(e.value.re),
                        num(e.value.im)
                    );
                }
            }
            Ok(block)
        })
        .collect::<Result<_>>()?;
    let mut out = String::from("t,method,n,truncation_K,re,im,remainder_class\n");
    for b in blocks {
        out.push_str(&b);
    }
    Ok(out)
}

/// Runs one subcommand and returns its CSV text.
pub fn execute(command: &Command) -> Result<String> {
    let (args, f): (&CommonArgs, fn(&CommonArgs, &InputFile) -> Result<String>) = match command {
        Command::Resonances(a) => (a, resonances_csv),
        Command::Evolve(a) => (a, evolve_csv),
        Command::Crossing(a) => (a, crossing_csv),
        Command::Continuum(a) => (a, continuum_csv),
    };
    let input = InputFile::from_file(&args.input)?;
    f(args, &input)
}

/// Runs a subcommand and writes its output; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = execute(&cli.command).and_then(|csv| {
        let args = match &cli.command {
            Command::Resonances(a) | Command::Evolve(a) | Command::Crossing(a) | Command::Continuum(a) => a,
        };
        match &args.output {
            Some(path) => std::fs::write(path, csv).map_err(Error::from),
            None => {
                print!("{csv}");
                Ok(())
            }
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Entry point shared by the binary and the tests. Usage errors exit with 2.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        let z = |s| parse_complex(s, 1).unwrap();
        assert_eq!(z("1.5"), Complex64::new(1.5, 0.0));
        assert_eq!(z("0.5+0.25i"), Complex64::new(0.5, 0.25));
        assert_eq!(z("-0.5-2i"), Complex64::new(-0.5, -2.0));
        assert_eq!(z("i"), Complex64::new(0.0, 1.0));
        assert_eq!(z("-i"), Complex64::new(0.0, -1.0));
        assert_eq!(z("1e-3-1e-2i"), Complex64::new(1e-3, -1e-2));
        assert!(parse_complex("1+xi", 4).is_err());
    }

    #[test]
    fn grid_parsing() {
        let g: Grid = "0:2:5".parse().unwrap();
        assert_eq!(g.times(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert!("0:2:1".parse::<Grid>().is_err());
        assert!("2:1:5".parse::<Grid>().is_err());
        assert!("0:1".parse::<Grid>().is_err());
    }

    #[test]
    fn two_segment_file() {
        let text = "beta = 2\nlambda = 0.3\nregime = overlapping\nsegment 0.05 1.0\nsegment -0.04 2.0 0.25\n";
        let p = parse_protocol(text).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.beta(), 2.0);
        assert_eq!(p.segments()[1].coupling, 0.25);
        assert_eq!(p.segments()[0].coupling, 0.3);
    }

    #[test]
    fn duplicate_key_last_wins() {
        let p = parse_protocol("beta = 1\nbeta = 3\nlambda = 0.3\nsegment 0.05 1\n").unwrap();
        assert_eq!(p.beta(), 3.0);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_protocol("beta = 1\n\nsegment 0.1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_protocol("colour = red\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_protocol("lambda = 0.3\nsegment 0.1 abc\n").unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn validation_errors() {
        let err = parse_protocol("lambda = 0.3\n").unwrap_err();
        assert!(matches!(err, Error::Validation { invariant: "N >= 1", .. }));
        // τ = Δ/σ = 1 exactly.
        let sigma = crate::spectral::sigma_from_gamma0(0.3, 2.0 * std::f64::consts::PI);
        let err = parse_protocol(&format!("lambda = 0.3\nsegment {sigma} 1\n")).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn observables_by_name_and_entries() {
        let f = InputFile::parse("observable = 1 0.5-0.5i 0.5+0.5i -1\n").unwrap();
        let a = f.observable().unwrap();
        assert_eq!(a.matrix()[0][1], Complex64::new(0.5, -0.5));
        let f = InputFile::parse("observable = 1 2 3 4\n").unwrap();
        assert!(matches!(f.observable(), Err(Error::Validation { .. })));
        let f = InputFile::parse("rho0 = mixed\n").unwrap();
        assert_eq!(f.rho0(1.0).unwrap(), SystemState::maximally_mixed());
    }
}
