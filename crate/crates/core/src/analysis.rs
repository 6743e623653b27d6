//! Decay-rate fits on norm histories and comparison with the predicted rates.
//!
//! All fits are ordinary least squares on `log y`: against `log t` for a
//! power law, against `t` for an exponential. Residual sums are therefore
//! comparable between the two models and unaffected by rescaling `y`.

use std::fmt;

use crate::error::{param, Error, Result};
use crate::evolve::EvolveProblem;
use crate::operators::Operator;

/// Least-squares fit of one decay model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fit {
    /// `-slope`: `p̂` for a power law, `r̂` for an exponential.
    pub rate: f64,
    pub stderr: f64,
    pub intercept: f64,
    /// Residual sum of squares in `log y`.
    pub sse: f64,
    pub points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    PowerLaw,
    Exponential,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::PowerLaw => "power-law",
            ModelKind::Exponential => "exponential",
        })
    }
}

const MIN_POINTS: usize = 10;

/// Rates below this are reported as no decay by [`classify_decay`].
pub const MEANINGFUL_RATE: f64 = 1e-3;

fn window_points(t: &[f64], y: &[f64], window: (f64, f64)) -> Result<(Vec<f64>, Vec<f64>)> {
    if t.len() != y.len() {
        return Err(Error::Shape(format!("{} times vs {} values", t.len(), y.len())));
    }
    let (lo, hi) = window;
    if !(lo <= hi) {
        return param(format!("empty window [{lo}, {hi}]"));
    }
    let mut tw = Vec::new();
    let mut yw = Vec::new();
    for (&ti, &yi) in t.iter().zip(y) {
        if ti >= lo && ti <= hi {
            if !(yi > 0.0 && yi.is_finite()) {
                return param(format!("norm {yi} at t = {ti} cannot be fitted on a log scale"));
            }
            tw.push(ti);
            yw.push(yi);
        }
    }
    if tw.len() < MIN_POINTS {
        return param(format!("window [{lo}, {hi}] holds {} points, need {MIN_POINTS}", tw.len()));
    }
    Ok((tw, yw))
}

fn least_squares(x: &[f64], z: &[f64]) -> Result<Fit> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let mz = z.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return param("window abscissae are all equal");
    }
    let sxz: f64 = x.iter().zip(z).map(|(a, b)| (a - mx) * (b - mz)).sum();
    let slope = sxz / sxx;
    let intercept = mz - slope * mx;
    let sse: f64 = x.iter().zip(z).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let stderr = (sse / (n - 2.0) / sxx).sqrt();
    Ok(Fit { rate: -slope, stderr, intercept, sse, points: x.len() })
}

/// `y ≈ e^c t^{-p̂}` on `window`. Needs `t > 0` throughout the window.
pub fn fit_power(t: &[f64], y: &[f64], window: (f64, f64)) -> Result<Fit> {
    if !(window.0 > 0.0) {
        return param(format!("power-law window must start at t > 0, got {}", window.0));
    }
    let (tw, yw) = window_points(t, y, window)?;
    let x: Vec<f64> = tw.iter().map(|v| v.ln()).collect();
    let z: Vec<f64> = yw.iter().map(|v| v.ln()).collect();
    least_squares(&x, &z)
}

/// `y ≈ e^{c - r̂ t}` on `window`.
pub fn fit_exp(t: &[f64], y: &[f64], window: (f64, f64)) -> Result<Fit> {
    let (tw, yw) = window_points(t, y, window)?;
    let z: Vec<f64> = yw.iter().map(|v| v.ln()).collect();
    least_squares(&tw, &z)
}

/// Last decade `[t_end/10, t_end]` of a history.
pub fn default_window(t: &[f64]) -> Result<(f64, f64)> {
    let t_end = *t.last().ok_or_else(|| Error::Parameter("empty history".into()))?;
    if !(t_end > 0.0) {
        return param("history does not advance in time");
    }
    Ok((t_end / 10.0, t_end))
}

/// Both fits on a common window and the model with the smaller residual sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Classification {
    pub window: (f64, f64),
    pub power: Fit,
    pub exponential: Fit,
    /// `None` when neither fitted rate reaches [`MEANINGFUL_RATE`].
    pub selected: Option<ModelKind>,
}

impl Classification {
    pub fn fit(&self, kind: ModelKind) -> &Fit {
        match kind {
            ModelKind::PowerLaw => &self.power,
            ModelKind::Exponential => &self.exponential,
        }
    }
}

/// Classifies the tail of a history spanning at least two decades of positive times.
pub fn classify_decay(t: &[f64], y: &[f64], window: Option<(f64, f64)>) -> Result<Classification> {
    let t_min = t.iter().copied().find(|&v| v > 0.0);
    let t_max = t.last().copied().unwrap_or(0.0);
    match t_min {
        Some(t0) if t_max >= 100.0 * t0 => {}
        _ => return param("history must span at least two decades of positive times"),
    }
    let window = match window {
        Some(w) => w,
        None => default_window(t)?,
    };
    let power = fit_power(t, y, window)?;
    let exponential = fit_exp(t, y, window)?;
    let selected = if power.rate.abs() < MEANINGFUL_RATE && exponential.rate.abs() < MEANINGFUL_RATE {
        None
    } else if power.sse <= exponential.sse {
        Some(ModelKind::PowerLaw)
    } else {
        Some(ModelKind::Exponential)
    };
    Ok(Classification { window, power, exponential, selected })
}

/// Decay rate predicted for a problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Prediction {
    /// `‖u‖ ≤ C/(1 + t^{exponent})`.
    Power { exponent: f64 },
    /// `‖u‖ ≤ C e^{-t/C'}` with an unspecified `C'`.
    Exponential,
}

impl fmt::Display for Prediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prediction::Power { exponent } => write!(f, "power-law t^-{exponent}"),
            Prediction::Exponential => f.write_str("exponential e^-t/C"),
        }
    }
}

/// Predicted decay for `(λ₁, λ₂, α)` and structural exponent `γ`.
///
/// `γ` must be the one the operator satisfies: 1 for the linear, magnetic
/// and non-degenerate Kirchhoff operators, 2 for the porous operator, 3 for
/// degenerate Kirchhoff.
pub fn predicted_decay(problem: &EvolveProblem, gamma: f64) -> Result<Prediction> {
    if matches!(problem.op, Operator::SchrodingerControl { .. }) {
        return param("the Schrödinger control has no decay estimate");
    }
    if ![1.0, 2.0, 3.0].contains(&gamma) {
        return param(format!("gamma must be 1, 2 or 3, got {gamma}"));
    }
    let expected = problem.op.structural_gamma().expect("decaying operator");
    if expected != gamma {
        return param(format!(
            "{} satisfies the structural inequality with gamma = {expected}, not {gamma}",
            problem.op.name()
        ));
    }
    let d = problem.deriv;
    Ok(if d.lambda1 > 0.0 {
        Prediction::Power { exponent: d.alpha / gamma }
    } else if gamma <= 1.0 {
        Prediction::Exponential
    } else {
        Prediction::Power { exponent: 1.0 / (gamma - 1.0) }
    })
}

/// Fit window and verdict tolerances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalysisSettings {
    /// `None` uses the last decade, raised to `t ≥ 1` for power laws.
    pub window: Option<(f64, f64)>,
    pub tol_power: f64,
    pub tol_degenerate: f64,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings { window: None, tol_power: 0.15, tol_degenerate: 0.20 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    pub s: f64,
    pub predicted: Prediction,
    /// Fit of the predicted model.
    pub model: ModelKind,
    pub fit: Fit,
    pub window: (f64, f64),
    pub classification: Classification,
    pub tolerance: f64,
    /// `(fitted - predicted)/predicted` for power laws.
    pub deviation: Option<f64>,
    pub pass: bool,
}

impl DecayReport {
    pub fn verdict(&self) -> &'static str {
        if self.pass {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

impl fmt::Display for DecayReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "norm:        L^{}", self.s)?;
        writeln!(f, "window:      [{}, {}]", self.window.0, self.window.1)?;
        writeln!(f, "predicted:   {}", self.predicted)?;
        let label = match self.model {
            ModelKind::PowerLaw => "p_hat",
            ModelKind::Exponential => "r_hat",
        };
        writeln!(f, "fitted:      {label} = {:.6} +- {:.2e} ({} points)", self.fit.rate, self.fit.stderr, self.fit.points)?;
        writeln!(
            f,
            "residuals:   power {:.3e}, exponential {:.3e}",
            self.classification.power.sse, self.classification.exponential.sse
        )?;
        match self.classification.selected {
            Some(k) => writeln!(f, "classified:  {k}")?,
            None => writeln!(f, "classified:  no decay")?,
        }
        if let Some(d) = self.deviation {
            writeln!(f, "deviation:   {:+.4} (tolerance -{})", d, self.tolerance)?;
        }
        writeln!(f, "verdict:     {}", self.verdict())
    }
}

/// Fits the norm history `(t, y)` and judges it against the predicted rate.
///
/// Decaying faster than predicted never fails: a power law passes when
/// `p̂ ≥ (1 - tol) p`, an exponential prediction when `r̂ > 0` and the tail
/// is classified as exponential.
pub fn build_report(
    problem: &EvolveProblem,
    s: f64,
    t: &[f64],
    y: &[f64],
    gamma: f64,
    settings: &AnalysisSettings,
) -> Result<DecayReport> {
    let predicted = predicted_decay(problem, gamma)?;
    let tail = default_window(t)?;
    let window = match (settings.window, predicted) {
        (Some(w), _) => w,
        (None, Prediction::Power { .. }) => (tail.0.max(1.0), tail.1),
        (None, Prediction::Exponential) => tail,
    };
    if matches!(predicted, Prediction::Power { .. }) && window.0 < 1.0 {
        return param(format!("power-law windows must start at t >= 1, got {}", window.0));
    }
    let classification = classify_decay(t, y, Some(window))?;
    let tolerance = if problem.op.is_degenerate() { settings.tol_degenerate } else { settings.tol_power };
    let (model, deviation, pass) = match predicted {
        Prediction::Power { exponent } => {
            let p = classification.power.rate;
            (ModelKind::PowerLaw, Some((p - exponent) / exponent), p >= (1.0 - tolerance) * exponent)
        }
        Prediction::Exponential => {
            let r = classification.exponential.rate;
            let ok = r > 0.0 && classification.selected == Some(ModelKind::Exponential);
            (ModelKind::Exponential, None, ok)
        }
    };
    Ok(DecayReport {
        s,
        predicted,
        model,
        fit: *classification.fit(model),
        window,
        classification,
        tolerance,
        deviation,
        pass,
    })
}

/// Fit of `y ≈ C/(1 + t)^p` on a window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Envelope {
    /// Geometric mean of `y (1+t)^p` over the window.
    pub c_fit: f64,
    /// Smallest `C` with `y ≤ C/(1+t)^p` on the whole history.
    pub c_sup: f64,
    /// `max |y (1+t)^p / c_fit - 1|` over the window.
    pub residual: f64,
}

pub fn fit_envelope(t: &[f64], y: &[f64], p: f64, window: (f64, f64)) -> Result<Envelope> {
    let (tw, yw) = window_points(t, y, window)?;
    let scaled: Vec<f64> = tw.iter().zip(&yw).map(|(ti, yi)| yi * (1.0 + ti).powf(p)).collect();
    let c_fit = (scaled.iter().map(|v| v.ln()).sum::<f64>() / scaled.len() as f64).exp();
    let residual = scaled.iter().map(|v| (v / c_fit - 1.0).abs()).fold(0.0, f64::max);
    let c_sup = t.iter().zip(y).map(|(ti, yi)| yi * (1.0 + ti).powf(p)).fold(0.0, f64::max);
    Ok(Envelope { c_fit, c_sup, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn times(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
    }

    #[test]
    fn exact_models() {
        let t = times(1.0, 1000.0, 200);
        let y: Vec<f64> = t.iter().map(|v| v.powf(-0.5)).collect();
        assert!((fit_power(&t, &y, (1.0, 1000.0)).unwrap().rate - 0.5).abs() < 1e-10);
        let t: Vec<f64> = (0..=100).map(|i| i as f64 * 0.05).collect();
        let y: Vec<f64> = t.iter().map(|v| (-2.0 * v).exp()).collect();
        assert!((fit_exp(&t, &y, (0.0, 5.0)).unwrap().rate - 2.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_windows() {
        let t = times(1.0, 100.0, 50);
        let mut y: Vec<f64> = t.iter().map(|v| 1.0 / v).collect();
        assert!(fit_power(&t, &y, (50.0, 60.0)).is_err());
        y[40] = 0.0;
        assert!(fit_power(&t, &y, (1.0, 100.0)).is_err());
        assert!(classify_decay(&t[..10], &y[..10], None).is_err());
    }
}
