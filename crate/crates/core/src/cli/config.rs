//! Parser for the flat `key = value` experiment format.
//!
//! ```text
//! # comment
//! [section]
//! key = value        # trailing comments allowed
//! ```
//!
//! Values are numbers, `true`/`false`, bare words, or comma-separated lists.
//! Every diagnostic carries the line it refers to; a missing key points at
//! its section header, or one past the last line when the section is absent.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use crate::analysis::AnalysisSettings;
use crate::error::Error;
use crate::evolve::Scheme;
use crate::frac_time::MixedDerivative;
use crate::grid::{Grid, GridFunction, C64};
use crate::operators::{check_exponent_admissible, Field, Operator};

const SECTIONS: &[(&str, &[&str])] = &[
    ("grid", &["a", "b", "n"]),
    ("time", &["lambda1", "lambda2", "alpha", "dt", "t_end", "scheme", "start_correction"]),
    (
        "operator",
        &["kind", "sigma", "epsilon", "c_kernel", "m0", "b", "field", "field_modes", "potential", "potential_modes", "gamma"],
    ),
    ("initial", &["profile", "amplitude", "mode", "center", "width", "wave"]),
    ("analysis", &["s", "window", "tol_power", "tol_degenerate"]),
    ("output", &["dir", "svg"]),
    ("run", &["seed", "workers"]),
    ("sweep", &["alpha", "sigma", "s", "gamma"]),
    ("verify", &["samples", "structural_samples", "s", "barrier_alpha", "barrier_gamma"]),
];

/// One problem found while reading a config.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub line: usize,
    pub msg: String,
}

/// All problems found in a config, in line order.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "line {}: {}", d.line, d.msg)?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostics {}

impl From<Diagnostics> for Error {
    fn from(d: Diagnostics) -> Self {
        let first = d.0.first().cloned().unwrap_or(Diagnostic { line: 0, msg: "invalid config".into() });
        let msg = match d.0.len() {
            0 | 1 => first.msg,
            n => format!("{} (and {} more)", first.msg, n - 1),
        };
        Error::Config { line: first.line, msg }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Profile {
    /// `amplitude · sin(mode π (x-a)/(b-a))`.
    Sine { mode: u32 },
    /// `amplitude · exp(-((x-center)/width)²)`.
    Bump { center: f64, width: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialConfig {
    pub profile: Profile,
    pub amplitude: f64,
    /// Phase factor `e^{i wave x}`; zero keeps the datum real.
    pub wave: f64,
}

impl InitialConfig {
    pub fn build(&self, g: Grid) -> crate::Result<GridFunction> {
        let w = g.width();
        let a = g.a();
        let amp = self.amplitude;
        let wave = self.wave;
        let prof = self.profile;
        GridFunction::from_fn(g, move |x| {
            let r = match prof {
                Profile::Sine { mode } => amp * (mode as f64 * std::f64::consts::PI * (x - a) / w).sin(),
                Profile::Bump { center, width } => amp * (-((x - center) / width).powi(2)).exp(),
            };
            if wave == 0.0 {
                C64::new(r, 0.0)
            } else {
                C64::from_polar(r, wave * x)
            }
        })
    }
}

/// Parameters of the verification battery.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    pub samples: usize,
    pub structural_samples: usize,
    pub s: f64,
    pub barrier_alpha: Vec<f64>,
    pub barrier_gamma: Vec<f64>,
}

/// Lists a sweep runs over; an empty list leaves that parameter as configured.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepConfig {
    pub alpha: Vec<f64>,
    pub sigma: Vec<f64>,
    pub s: Vec<f64>,
    pub gamma: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub grid: Grid,
    pub deriv: MixedDerivative,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub start_correction: bool,
    pub operator: Operator,
    /// Structural exponent used for the prediction; defaults to the operator's.
    pub gamma: Option<f64>,
    pub initial: InitialConfig,
    pub tracked_s: Vec<f64>,
    pub analysis: AnalysisSettings,
    pub out_dir: PathBuf,
    pub svg: bool,
    pub seed: u64,
    pub workers: usize,
    pub sweep: SweepConfig,
    pub verify: VerifyConfig,
}

struct Entry {
    value: String,
    line: usize,
}

struct Raw {
    entries: BTreeMap<(String, String), Entry>,
    headers: BTreeMap<String, usize>,
    eof: usize,
    diags: Vec<Diagnostic>,
}

impl Raw {
    fn get(&self, sec: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(sec.to_string(), key.to_string()))
    }

    fn missing_line(&self, sec: &str) -> usize {
        self.headers.get(sec).copied().unwrap_or(self.eof + 1)
    }

    fn err(&mut self, line: usize, msg: impl Into<String>) {
        self.diags.push(Diagnostic { line, msg: msg.into() });
    }

    fn required(&mut self, sec: &str, key: &str) -> Option<(String, usize)> {
        match self.get(sec, key) {
            Some(e) => Some((e.value.clone(), e.line)),
            None => {
                let line = self.missing_line(sec);
                self.err(line, format!("missing required key `{key}` in [{sec}]"));
                None
            }
        }
    }

    fn line_of(&self, sec: &str, key: &str) -> usize {
        self.get(sec, key).map(|e| e.line).unwrap_or_else(|| self.missing_line(sec))
    }

    fn num(&mut self, sec: &str, key: &str) -> Option<f64> {
        let (v, line) = match self.get(sec, key) {
            Some(e) => (e.value.clone(), e.line),
            None => return None,
        };
        match parse_f64(&v) {
            Some(x) => Some(x),
            None => {
                self.err(line, format!("`{key}`: expected a number, got `{v}`"));
                None
            }
        }
    }

    fn num_or(&mut self, sec: &str, key: &str, default: f64) -> f64 {
        self.num(sec, key).unwrap_or(default)
    }

    fn int_or(&mut self, sec: &str, key: &str, default: u64) -> u64 {
        let (v, line) = match self.get(sec, key) {
            Some(e) => (e.value.clone(), e.line),
            None => return default,
        };
        match v.parse::<u64>() {
            Ok(x) => x,
            Err(_) => {
                self.err(line, format!("`{key}`: expected a non-negative integer, got `{v}`"));
                default
            }
        }
    }

    fn bool_or(&mut self, sec: &str, key: &str, default: bool) -> bool {
        let (v, line) = match self.get(sec, key) {
            Some(e) => (e.value.clone(), e.line),
            None => return default,
        };
        match v.as_str() {
            "true" => true,
            "false" => false,
            _ => {
                self.err(line, format!("`{key}`: expected true or false, got `{v}`"));
                default
            }
        }
    }

    fn list(&mut self, sec: &str, key: &str) -> Option<Vec<f64>> {
        let (v, line) = match self.get(sec, key) {
            Some(e) => (e.value.clone(), e.line),
            None => return None,
        };
        let mut out = Vec::new();
        for item in v.split(',') {
            match parse_f64(item.trim()) {
                Some(x) => out.push(x),
                None => {
                    self.err(line, format!("`{key}`: expected a comma-separated list of numbers, got `{v}`"));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn modes(&mut self, sec: &str, key: &str) -> Vec<(f64, f64, f64)> {
        let (v, line) = match self.get(sec, key) {
            Some(e) => (e.value.clone(), e.line),
            None => return Vec::new(),
        };
        let mut out = Vec::new();
        for item in v.split(',') {
            let parts: Vec<Option<f64>> = item.split(':').map(|p| parse_f64(p.trim())).collect();
            match parts.as_slice() {
                [Some(a), Some(w), Some(p)] => out.push((*a, *w, *p)),
                _ => {
                    self.err(line, format!("`{key}`: expected amplitude:frequency:phase triples, got `{}`", item.trim()));
                    return Vec::new();
                }
            }
        }
        out
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        _ => s.parse::<f64>().ok().filter(|x| x.is_finite()),
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn tokenize(text: &str) -> Raw {
    let mut raw = Raw { entries: BTreeMap::new(), headers: BTreeMap::new(), eof: 0, diags: Vec::new() };
    // None before the first header; Some(None) inside an unknown section
    let mut section: Option<Option<String>> = None;
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        raw.eof = ln;
        let body = strip_comment(line).trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[') {
            let Some(name) = name.strip_suffix(']') else {
                raw.err(ln, format!("malformed section header `{body}`"));
                section = Some(None);
                continue;
            };
            let name = name.trim();
            if !SECTIONS.iter().any(|(s, _)| *s == name) {
                raw.err(ln, format!("unknown section [{name}]"));
                section = Some(None);
                continue;
            }
            if raw.headers.insert(name.to_string(), ln).is_some() {
                raw.err(ln, format!("section [{name}] appears twice"));
            }
            section = Some(Some(name.to_string()));
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            raw.err(ln, format!("expected `key = value`, got `{body}`"));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        let sec = match &section {
            Some(Some(sec)) => sec.clone(),
            // already reported at the header
            Some(None) => continue,
            None => {
                raw.err(ln, format!("key `{key}` appears before any [section]"));
                continue;
            }
        };
        let known = SECTIONS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
        if !known.contains(&key) {
            raw.err(ln, format!("unknown key `{key}` in [{sec}]"));
            continue;
        }
        if value.is_empty() {
            raw.err(ln, format!("`{key}` has no value"));
            continue;
        }
        let value = value.trim_matches('"').to_string();
        let k = (sec.clone(), key.to_string());
        if let Some(prev) = raw.entries.get(&k) {
            let first = prev.line;
            raw.err(ln, format!("`{key}` already set on line {first}"));
            continue;
        }
        raw.entries.insert(k, Entry { value, line: ln });
    }
    raw
}

fn parse_scheme(s: &str) -> Option<Scheme> {
    match s {
        "explicit" => Some(Scheme::ExplicitL1),
        "semi-implicit" => Some(Scheme::SemiImplicitL1),
        "crank-nicolson" => Some(Scheme::CrankNicolson),
        _ => None,
    }
}

/// Reads and validates a config. Returns every diagnostic found, not just the first.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, Diagnostics> {
    let mut r = tokenize(text);

    // grid
    let a = r.num_or("grid", "a", 0.0);
    let b = r.num_or("grid", "b", 1.0);
    let n = r.int_or("grid", "n", 63) as usize;
    if n < 3 {
        let l = r.line_of("grid", "n");
        r.err(l, format!("`n` must be at least 3, got {n}"));
    }
    if !(b > a) {
        let l = r.line_of("grid", "b");
        r.err(l, format!("need a < b, got [{a}, {b}]"));
    }
    let grid = Grid::new(a, b, n.max(3)).unwrap_or_else(|_| Grid::new(0.0, 1.0, 63).expect("default grid"));

    // time
    let alpha_line = r.line_of("time", "alpha");
    let alpha = r.required("time", "alpha").and_then(|_| r.num("time", "alpha")).unwrap_or(0.5);
    if !(alpha > 0.0 && alpha < 1.0) {
        r.err(alpha_line, format!("`alpha` must lie in (0, 1), got {alpha}"));
    }
    let l1_line = r.line_of("time", "lambda1");
    let lambda1 = r.required("time", "lambda1").and_then(|_| r.num("time", "lambda1")).unwrap_or(1.0);
    if !(0.0..=1.0).contains(&lambda1) {
        r.err(l1_line, format!("`lambda1` must lie in [0, 1], got {lambda1}"));
    }
    let lambda2 = r.num("time", "lambda2").unwrap_or(1.0 - lambda1);
    if (lambda1 + lambda2 - 1.0).abs() > 1e-12 {
        let l = r.line_of("time", "lambda2");
        r.err(l, format!("`lambda1 + lambda2` must equal 1, got {}", lambda1 + lambda2));
    }
    // the placeholder is never returned: a failure here has already been diagnosed
    let deriv = MixedDerivative::new(lambda1, lambda2, alpha)
        .unwrap_or(MixedDerivative { lambda1: 1.0, lambda2: 0.0, alpha: 0.5 });
    let dt = r.num_or("time", "dt", 0.01);
    if !(dt > 0.0) {
        let l = r.line_of("time", "dt");
        r.err(l, format!("`dt` must be positive, got {dt}"));
    }
    let t_end = r.num_or("time", "t_end", 10.0);
    if !(t_end >= 0.0) {
        let l = r.line_of("time", "t_end");
        r.err(l, format!("`t_end` must be >= 0, got {t_end}"));
    }
    let start_correction = r.bool_or("time", "start_correction", true);

    // operator
    let kind_line = r.line_of("operator", "kind");
    let kind = r.required("operator", "kind").map(|(v, _)| v).unwrap_or_default();
    let sigma_line = r.line_of("operator", "sigma");
    let sigma = r.num("operator", "sigma");
    let field = Field { constant: r.num_or("operator", "field", 1.0), modes: r.modes("operator", "field_modes") };
    let potential =
        Field { constant: r.num_or("operator", "potential", 0.0), modes: r.modes("operator", "potential_modes") };
    let m0 = r.num_or("operator", "m0", 1.0);
    let kb = r.num_or("operator", "b", 1.0);
    let epsilon = r.num("operator", "epsilon");
    let c_kernel = r.num_or("operator", "c_kernel", 1.0);
    let need_sigma = |r: &mut Raw, default: f64| -> f64 {
        match sigma {
            Some(s) => {
                if !(s > 0.0 && s < 1.0) {
                    r.err(sigma_line, format!("`sigma` must lie in (0, 1), got {s}"));
                }
                s
            }
            None => default,
        }
    };
    let operator = match kind.as_str() {
        "laplacian" => Some(Operator::Laplacian),
        "frac-laplacian" => Some(Operator::FracLaplacian { sigma: need_sigma(&mut r, 0.5) }),
        "porous" => {
            let s = sigma.unwrap_or(0.25);
            if !(s > 0.0 && s < 0.5) {
                r.err(
                    sigma_line,
                    format!("porous kernel exponent 1 - 2 sigma must be positive in 1-D; need sigma in (0, 1/2), got {s}"),
                );
            }
            Some(Operator::PorousMedium { sigma: s, epsilon, c_kernel })
        }
        "kirchhoff" => Some(Operator::Kirchhoff { m0, b: kb }),
        "frac-kirchhoff" => Some(Operator::FracKirchhoff { sigma: need_sigma(&mut r, 0.5), m0, b: kb }),
        "magnetic" => Some(Operator::Magnetic { field }),
        "frac-magnetic" => Some(Operator::FracMagnetic { sigma: need_sigma(&mut r, 0.5), field }),
        "schrodinger" => Some(Operator::SchrodingerControl { potential }),
        "" => None,
        other => {
            r.err(kind_line, format!("unknown operator kind `{other}`"));
            None
        }
    };
    if let Some(op) = &operator {
        if r.diags.is_empty() {
            if let Err(e) = op.validate() {
                r.err(kind_line, e.to_string());
            }
        }
    }
    let gamma = r.num("operator", "gamma");
    if let Some(g) = gamma {
        if ![1.0, 2.0, 3.0].contains(&g) {
            let l = r.line_of("operator", "gamma");
            r.err(l, format!("`gamma` must be 1, 2 or 3, got {g}"));
        }
    }
    let default_scheme = match operator {
        Some(Operator::SchrodingerControl { .. }) => Scheme::CrankNicolson,
        _ => Scheme::SemiImplicitL1,
    };
    let scheme = match r.get("time", "scheme").map(|e| (e.value.clone(), e.line)) {
        Some((v, line)) => parse_scheme(&v).unwrap_or_else(|| {
            r.err(line, format!("unknown scheme `{v}` (explicit, semi-implicit, crank-nicolson)"));
            default_scheme
        }),
        None => default_scheme,
    };

    // initial datum
    let amplitude = r.num_or("initial", "amplitude", 1.0);
    let wave = r.num_or("initial", "wave", 0.0);
    let profile = match r.get("initial", "profile").map(|e| (e.value.clone(), e.line)) {
        None => Profile::Sine { mode: r.int_or("initial", "mode", 1) as u32 },
        Some((v, line)) => match v.as_str() {
            "sine" => Profile::Sine { mode: r.int_or("initial", "mode", 1) as u32 },
            "bump" => {
                let width = r.num_or("initial", "width", 0.1 * grid.width());
                if !(width > 0.0) {
                    let l = r.line_of("initial", "width");
                    r.err(l, format!("`width` must be positive, got {width}"));
                }
                Profile::Bump { center: r.num_or("initial", "center", 0.5 * (grid.a() + grid.b())), width }
            }
            other => {
                r.err(line, format!("unknown profile `{other}` (sine, bump)"));
                Profile::Sine { mode: 1 }
            }
        },
    };
    if let Profile::Sine { mode: 0 } = profile {
        let l = r.line_of("initial", "mode");
        r.err(l, "`mode` must be at least 1");
    }
    if !(amplitude > 0.0) {
        let l = r.line_of("initial", "amplitude");
        r.err(l, format!("`amplitude` must be positive, got {amplitude}"));
    }
    if wave != 0.0 && operator.as_ref().is_some_and(|o| o.requires_real()) {
        let l = r.line_of("initial", "wave");
        r.err(l, format!("{} needs a real initial datum; set wave = 0", operator.as_ref().map(|o| o.name()).unwrap_or("")));
    }

    // analysis
    let s_line = r.line_of("analysis", "s");
    let tracked_s = r.list("analysis", "s").unwrap_or_else(|| vec![2.0]);
    if tracked_s.is_empty() {
        r.err(s_line, "`s` needs at least one exponent");
    }
    for &s in &tracked_s {
        if !(s >= 1.0) {
            r.err(s_line, format!("norm exponent must be >= 1, got {s}"));
        } else if let Some(op) = &operator {
            if s.is_finite() && !matches!(op, Operator::SchrodingerControl { .. }) {
                if let Err(e) = check_exponent_admissible(op, s, 1) {
                    r.err(s_line, e.to_string());
                }
            }
        }
    }
    let window = match r.list("analysis", "window") {
        None => None,
        Some(w) if w.len() == 2 && w[0] >= 0.0 && w[0] < w[1] => Some((w[0], w[1])),
        Some(w) => {
            let l = r.line_of("analysis", "window");
            r.err(l, format!("`window` must be `t_lo, t_hi` with 0 <= t_lo < t_hi, got {w:?}"));
            None
        }
    };
    let tol_power = r.num_or("analysis", "tol_power", 0.15);
    let tol_degenerate = r.num_or("analysis", "tol_degenerate", 0.20);
    for (key, v) in [("tol_power", tol_power), ("tol_degenerate", tol_degenerate)] {
        if !(0.0..1.0).contains(&v) {
            let l = r.line_of("analysis", key);
            r.err(l, format!("`{key}` must lie in [0, 1), got {v}"));
        }
    }

    // output and run
    let out_dir = PathBuf::from(r.get("output", "dir").map(|e| e.value.clone()).unwrap_or_else(|| "out".into()));
    let svg = r.bool_or("output", "svg", true);
    let seed = r.int_or("run", "seed", 0);
    let workers = r.int_or("run", "workers", 1) as usize;
    if workers == 0 {
        let l = r.line_of("run", "workers");
        r.err(l, "`workers` must be at least 1");
    }

    // sweep
    let sweep = SweepConfig {
        alpha: r.list("sweep", "alpha").unwrap_or_default(),
        sigma: r.list("sweep", "sigma").unwrap_or_default(),
        s: r.list("sweep", "s").unwrap_or_default(),
        gamma: r.list("sweep", "gamma").unwrap_or_default(),
    };
    if !sweep.sigma.is_empty() && !matches!(operator, Some(ref o) if op_sigma(o).is_some()) {
        let l = r.line_of("sweep", "sigma");
        r.err(l, "`sigma` sweep needs an operator with a sigma parameter");
    }

    // verify
    let verify = VerifyConfig {
        samples: r.int_or("verify", "samples", 100_000) as usize,
        structural_samples: r.int_or("verify", "structural_samples", 100) as usize,
        s: r.num_or("verify", "s", 2.0),
        barrier_alpha: r.list("verify", "barrier_alpha").unwrap_or_else(|| vec![0.4, 0.7]),
        barrier_gamma: r.list("verify", "barrier_gamma").unwrap_or_else(|| vec![1.0, 2.0, 3.0]),
    };
    if verify.samples == 0 || verify.structural_samples < 2 {
        let l = r.missing_line("verify");
        r.err(l, "`samples` must be positive and `structural_samples` at least 2");
    }
    if !(verify.s > 1.0) {
        let l = r.line_of("verify", "s");
        r.err(l, format!("verification exponent must be > 1, got {}", verify.s));
    }

    if !r.diags.is_empty() {
        r.diags.sort_by_key(|d| d.line);
        return Err(Diagnostics(r.diags));
    }
    Ok(ExperimentConfig {
        grid,
        deriv,
        dt,
        t_end,
        scheme,
        start_correction,
        operator: operator.expect("validated operator"),
        gamma,
        initial: InitialConfig { profile, amplitude, wave },
        tracked_s,
        analysis: AnalysisSettings { window, tol_power, tol_degenerate },
        out_dir,
        svg,
        seed,
        workers,
        sweep,
        verify,
    })
}

/// The `sigma` of an operator, if it has one.
pub fn op_sigma(op: &Operator) -> Option<f64> {
    match op {
        Operator::FracLaplacian { sigma }
        | Operator::PorousMedium { sigma, .. }
        | Operator::FracKirchhoff { sigma, .. }
        | Operator::FracMagnetic { sigma, .. } => Some(*sigma),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[operator]\nkind = laplacian\n[time]\nalpha = 0.5\nlambda1 = 1\nlambda2 = 0\n[analysis]\ns = 2\n";

    #[test]
    fn minimal_config() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.operator, Operator::Laplacian);
        assert_eq!(c.tracked_s, vec![2.0]);
        assert_eq!(c.deriv, MixedDerivative::new(1.0, 0.0, 0.5).unwrap());
    }

    #[test]
    fn sigma_out_of_range() {
        let d = parse_config("[operator]\nkind = frac-laplacian\nsigma = 1.2\n[time]\nalpha = 0.5\nlambda1 = 1\n")
            .unwrap_err();
        assert_eq!(d.0.len(), 1);
        assert_eq!(d.0[0].line, 3);
        assert!(d.0[0].msg.contains("sigma"));
    }

    #[test]
    fn porous_kernel_exponent() {
        let d = parse_config("[operator]\nkind = porous\nsigma = 0.7\n[time]\nalpha = 0.5\nlambda1 = 0\n")
            .unwrap_err();
        assert_eq!(d.0[0].line, 3);
        assert!(d.0[0].msg.contains("kernel exponent"));
    }

    #[test]
    fn unknown_and_missing_keys() {
        let d = parse_config("[time]\nalpha = 0.5\nbogus = 1\n").unwrap_err();
        let lines: Vec<usize> = d.0.iter().map(|x| x.line).collect();
        // lambda1 missing -> [time] header; bogus -> line 3; operator kind missing -> past the end
        assert_eq!(lines, vec![1, 3, 4]);
    }
}
