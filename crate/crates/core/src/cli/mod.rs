//! Experiment orchestration behind the `decaylab` binary.
//!
//! * [`cmd_run`] integrates one problem and writes `history.csv`,
//!   `report.txt` and optionally `decay.svg`;
//! * [`cmd_sweep`] runs the cartesian product of the `[sweep]` lists,
//!   one subdirectory per cell, and writes `summary.csv` at the end;
//! * [`cmd_verify`] runs the inequality and barrier battery.
//!
//! See [`config`] for the input format.

pub mod config;
pub mod svg;
pub mod verify;

use std::fmt::Write as _;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

pub use config::{parse_config, Diagnostic, Diagnostics, ExperimentConfig};

use crate::analysis::{build_report, classify_decay, DecayReport, Prediction};
use crate::error::{Error, Result};
use crate::evolve::{evolve, EvolveProblem, Trajectory};
use crate::operators::Operator;
use crate::parallel::Execution;

/// Environment variable that overrides the configured output directory.
pub const OUT_ENV: &str = "DECAYLAB_OUT";

/// Slack per step for the norm monotonicity check.
pub const MONOTONE_SLACK: f64 = 1e-10;
/// Relative drift allowed for the conservative Schrödinger control.
pub const CONSERVATION_TOL: f64 = 1e-6;

/// Command-line overrides, applied on top of the config file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub no_svg: bool,
}

/// Reads and parses a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(Error::from)
}

/// Applies overrides. The output directory is taken from `--out`, then from
/// `env_out`, then from the config.
pub fn apply_overrides(mut cfg: ExperimentConfig, o: &Overrides, env_out: Option<PathBuf>) -> Result<ExperimentConfig> {
    if let Some(dir) = o.out.clone().or(env_out) {
        cfg.out_dir = dir;
    }
    if let Some(w) = o.workers {
        if w == 0 {
            return Err(Error::Parameter("--workers must be at least 1".into()));
        }
        cfg.workers = w;
    }
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if o.no_svg {
        cfg.svg = false;
    }
    Ok(cfg)
}

pub fn problem_from(cfg: &ExperimentConfig) -> Result<EvolveProblem> {
    let u0 = cfg.initial.build(cfg.grid)?;
    let mut p = EvolveProblem::new(cfg.operator.clone(), cfg.deriv, u0, cfg.dt, cfg.t_end, cfg.scheme)
        .with_norms(&cfg.tracked_s);
    p.start_correction = cfg.start_correction;
    Ok(p)
}

fn s_label(s: f64) -> String {
    if s.is_infinite() {
        "inf".into()
    } else {
        format!("{s}")
    }
}

/// `t,norm_s<s>,...` with every value printed as `{:.16e}`.
pub fn history_csv(tr: &Trajectory) -> String {
    let mut out = String::from("t");
    for &s in &tr.tracked_s {
        let _ = write!(out, ",norm_s{}", s_label(s));
    }
    out.push('\n');
    for (m, t) in tr.t.iter().enumerate() {
        let _ = write!(out, "{t:.16e}");
        for series in &tr.norms {
            let _ = write!(out, ",{:.16e}", series[m]);
        }
        out.push('\n');
    }
    out
}

/// Outcome of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub pass: bool,
    /// One report per tracked norm; empty for the Schrödinger control.
    pub reports: Vec<DecayReport>,
    pub text: String,
}

fn describe(cfg: &ExperimentConfig) -> String {
    let op = &cfg.operator;
    let params = match op {
        Operator::FracLaplacian { sigma } | Operator::FracMagnetic { sigma, .. } => format!(" (sigma = {sigma})"),
        Operator::PorousMedium { sigma, epsilon, c_kernel } => format!(
            " (sigma = {sigma}, epsilon = {}, c_kernel = {c_kernel})",
            epsilon.map(|e| e.to_string()).unwrap_or_else(|| "h".into())
        ),
        Operator::Kirchhoff { m0, b } => format!(" (m0 = {m0}, b = {b})"),
        Operator::FracKirchhoff { sigma, m0, b } => format!(" (sigma = {sigma}, m0 = {m0}, b = {b})"),
        _ => String::new(),
    };
    let d = cfg.deriv;
    let g = cfg.grid;
    format!(
        "operator:    {}{params}\nderivative:  lambda1 = {}, lambda2 = {}, alpha = {}\ngrid:        {} interior nodes on [{}, {}]\ntime:        dt = {}, t_end = {}, scheme = {}\n",
        op.name(),
        d.lambda1,
        d.lambda2,
        d.alpha,
        g.len(),
        g.a(),
        g.b(),
        cfg.dt,
        cfg.t_end,
        cfg.scheme.name()
    )
}

/// Integrates `cfg` and judges the result. Nothing is written to disk.
pub fn execute(cfg: &ExperimentConfig) -> Result<(Trajectory, RunSummary)> {
    let p = problem_from(cfg)?;
    let tr = evolve(&p)?;
    let mut text = describe(cfg);
    let mut pass = true;
    let mut reports = Vec::new();
    let _ = writeln!(text, "steps:       {}", tr.t.len() - 1);

    if let Operator::SchrodingerControl { .. } = cfg.operator {
        text.push_str("decay:       none expected (conservative control)\n");
        for (k, &s) in tr.tracked_s.iter().enumerate() {
            let n = &tr.norms[k];
            let drift = n.iter().map(|v| (v / n[0] - 1.0).abs()).fold(0.0, f64::max);
            let _ = writeln!(text, "\n[L^{}]\ndrift:       {drift:.3e}", s_label(s));
            if s == 2.0 {
                pass &= drift <= CONSERVATION_TOL;
                let _ = writeln!(text, "tolerance:   {CONSERVATION_TOL:e}");
            }
            let c = classify_decay(&tr.t, n, cfg.analysis.window)?;
            let _ = writeln!(
                text,
                "fitted:      p_hat = {:.3e}, r_hat = {:.3e}\nclassified:  {}",
                c.power.rate,
                c.exponential.rate,
                c.selected.map(|k| k.to_string()).unwrap_or_else(|| "no decay".into())
            );
            pass &= c.selected.is_none();
        }
    } else {
        let gamma = cfg.gamma.unwrap_or_else(|| cfg.operator.structural_gamma().expect("decaying operator"));
        let _ = writeln!(text, "gamma:       {gamma}");
        let viol = tr.monotonicity_violations(MONOTONE_SLACK);
        match viol.first() {
            None => text.push_str("monotone:    yes\n"),
            Some(&(m, s, inc)) => {
                pass = false;
                let _ = writeln!(
                    text,
                    "monotone:    NO, scheme-induced increase at {} steps (first: step {m}, L^{}, +{inc:.3e})",
                    viol.len(),
                    s_label(s)
                );
            }
        }
        if let Operator::PorousMedium { .. } = cfg.operator {
            let peak = p.u0.real_parts().into_iter().fold(0.0, f64::max);
            let ok = tr.min_real >= -1e-8 * peak;
            pass &= ok;
            let _ = writeln!(text, "positivity:  min u = {:.3e}{}", tr.min_real, if ok { "" } else { " (VIOLATED)" });
        }
        for (k, &s) in tr.tracked_s.iter().enumerate() {
            let r = build_report(&p, s, &tr.t, &tr.norms[k], gamma, &cfg.analysis)?;
            pass &= r.pass;
            let _ = write!(text, "\n[L^{}]\n{r}", s_label(s));
            reports.push(r);
        }
    }
    let _ = writeln!(text, "\noverall:     {}", if pass { "PASS" } else { "FAIL" });
    Ok((tr, RunSummary { pass, reports, text }))
}

fn write_run(cfg: &ExperimentConfig, dir: &Path) -> Result<RunSummary> {
    fs::create_dir_all(dir)?;
    let (tr, summary) = execute(cfg)?;
    fs::write(dir.join("history.csv"), history_csv(&tr))?;
    fs::write(dir.join("report.txt"), &summary.text)?;
    if cfg.svg {
        let series: Vec<(String, &[f64])> =
            tr.tracked_s.iter().zip(&tr.norms).map(|(s, n)| (format!("L^{}", s_label(*s)), n.as_slice())).collect();
        fs::write(dir.join("decay.svg"), svg::decay_svg(&tr.t, &series, summary.reports.first()))?;
    }
    Ok(summary)
}

/// `run`: integrates the configured problem into `cfg.out_dir`.
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<RunSummary> {
    write_run(cfg, &cfg.out_dir)
}

/// One cell of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct CellOutcome {
    pub dir: String,
    pub alpha: f64,
    pub sigma: Option<f64>,
    pub s: f64,
    pub gamma: f64,
    /// `Err` holds the message of a failed cell.
    pub result: std::result::Result<RunSummary, String>,
}

impl CellOutcome {
    pub fn pass(&self) -> bool {
        matches!(&self.result, Ok(r) if r.pass)
    }
}

struct Cell {
    dir: String,
    cfg: ExperimentConfig,
}

fn with_sigma(op: &Operator, sigma: f64) -> Operator {
    let mut op = op.clone();
    match &mut op {
        Operator::FracLaplacian { sigma: s }
        | Operator::PorousMedium { sigma: s, .. }
        | Operator::FracKirchhoff { sigma: s, .. }
        | Operator::FracMagnetic { sigma: s, .. } => *s = sigma,
        _ => {}
    }
    op
}

fn sweep_cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let or_current = |v: &[f64], cur: f64| if v.is_empty() { vec![cur] } else { v.to_vec() };
    let sigma_now = config::op_sigma(&cfg.operator);
    let alphas = or_current(&cfg.sweep.alpha, cfg.deriv.alpha);
    let sigmas: Vec<Option<f64>> = if cfg.sweep.sigma.is_empty() {
        vec![sigma_now]
    } else {
        cfg.sweep.sigma.iter().map(|s| Some(*s)).collect()
    };
    let ss = or_current(&cfg.sweep.s, cfg.tracked_s[0]);
    let default_gamma = cfg.gamma.or(cfg.operator.structural_gamma()).unwrap_or(0.0);
    let gammas = or_current(&cfg.sweep.gamma, default_gamma);
    let mut cells = Vec::new();
    for &alpha in &alphas {
        for &sigma in &sigmas {
            for &s in &ss {
                for &gamma in &gammas {
                    let mut c = cfg.clone();
                    c.deriv.alpha = alpha;
                    if let Some(sg) = sigma {
                        c.operator = with_sigma(&cfg.operator, sg);
                    }
                    c.tracked_s = vec![s];
                    c.gamma = Some(gamma).filter(|g| *g > 0.0);
                    let mut dir = format!("cell_{:03}_alpha{alpha}", cells.len());
                    if let Some(sg) = sigma {
                        let _ = write!(dir, "_sigma{sg}");
                    }
                    let _ = write!(dir, "_s{}_gamma{gamma}", s_label(s));
                    cells.push(Cell { dir, cfg: c });
                }
            }
        }
    }
    cells
}

fn run_cell(cell: &Cell, root: &Path) -> std::result::Result<RunSummary, String> {
    let dir = root.join(&cell.dir);
    let checked = || -> Result<RunSummary> {
        crate::frac_time::MixedDerivative::new(cell.cfg.deriv.lambda1, cell.cfg.deriv.lambda2, cell.cfg.deriv.alpha)?;
        cell.cfg.operator.validate()?;
        write_run(&cell.cfg, &dir)
    };
    let out = match catch_unwind(AssertUnwindSafe(checked)) {
        Ok(Ok(r)) => Ok(r),
        Ok(Err(e)) => Err(e.to_string()),
        Err(p) => Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into())),
    };
    if let Err(msg) = &out {
        let _ = fs::create_dir_all(&dir);
        let _ = fs::write(dir.join("error.txt"), format!("{msg}\n"));
    }
    out
}

/// `sweep`: runs every cell on up to `cfg.workers` threads, then writes `summary.csv`.
///
/// A failing cell records `error.txt` in its directory and does not stop the others.
pub fn cmd_sweep(cfg: &ExperimentConfig) -> Result<Vec<CellOutcome>> {
    let root = cfg.out_dir.clone();
    fs::create_dir_all(&root)?;
    let cells = sweep_cells(cfg);
    let results: Vec<Mutex<Option<std::result::Result<RunSummary, String>>>> =
        cells.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..cfg.workers.min(cells.len()).max(1) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cells.len() {
                    break;
                }
                let r = run_cell(&cells[i], &root);
                *results[i].lock().expect("result slot") = Some(r);
            });
        }
    });
    let outcomes: Vec<CellOutcome> = cells
        .iter()
        .zip(results)
        .map(|(c, r)| CellOutcome {
            dir: c.dir.clone(),
            alpha: c.cfg.deriv.alpha,
            sigma: config::op_sigma(&c.cfg.operator),
            s: c.cfg.tracked_s[0],
            gamma: c.cfg.gamma.unwrap_or(0.0),
            result: r.into_inner().expect("result slot").unwrap_or_else(|| Err("cell did not run".into())),
        })
        .collect();
    fs::write(root.join("summary.csv"), summary_csv(&outcomes))?;
    Ok(outcomes)
}

/// `cell,alpha,sigma,s,gamma,status,model,rate,stderr,predicted,verdict`.
pub fn summary_csv(cells: &[CellOutcome]) -> String {
    let mut out = String::from("cell,alpha,sigma,s,gamma,status,model,rate,stderr,predicted,verdict\n");
    for c in cells {
        let sigma = c.sigma.map(|s| s.to_string()).unwrap_or_default();
        let head = format!("{},{},{sigma},{},{}", c.dir, c.alpha, s_label(c.s), c.gamma);
        match &c.result {
            Ok(r) => match r.reports.first() {
                Some(rep) => {
                    let predicted = match rep.predicted {
                        Prediction::Power { exponent } => format!("{exponent:.16e}"),
                        Prediction::Exponential => "exponential".into(),
                    };
                    let _ = writeln!(
                        out,
                        "{head},ok,{},{:.16e},{:.16e},{predicted},{}",
                        rep.model,
                        rep.fit.rate,
                        rep.fit.stderr,
                        if r.pass { "PASS" } else { "FAIL" }
                    );
                }
                None => {
                    let _ = writeln!(out, "{head},ok,none,,,none,{}", if r.pass { "PASS" } else { "FAIL" });
                }
            },
            Err(_) => {
                let _ = writeln!(out, "{head},error,,,,,ERROR");
            }
        }
    }
    out
}

/// `verify`: the inequality, structural and barrier battery with the configured seed.
pub fn cmd_verify(cfg: &ExperimentConfig) -> Vec<verify::CheckRow> {
    verify::verify_battery(&cfg.verify, cfg.seed, Execution::default())
}
