//! Log-log decay plots written as plain SVG.

use std::fmt::Write as _;

use crate::analysis::{DecayReport, ModelKind, Prediction};

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 4] = ["#1f77b4", "#2ca02c", "#9467bd", "#8c564b"];
const MAX_POINTS: usize = 1500;

struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Axes {
    fn px(&self, lx: f64) -> f64 {
        LEFT + (lx - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }

    fn py(&self, ly: f64) -> f64 {
        H - BOTTOM - (ly - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }
}

fn polyline(out: &mut String, ax: &Axes, pts: &[(f64, f64)], color: &str, dash: Option<&str>) {
    if pts.len() < 2 {
        return;
    }
    let mut d = String::new();
    for (lx, ly) in pts {
        let _ = write!(d, "{:.2},{:.2} ", ax.px(*lx), ax.py(*ly));
    }
    let dash = dash.map(|s| format!(" stroke-dasharray=\"{s}\"")).unwrap_or_default();
    let _ = writeln!(
        out,
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash} points=\"{}\"/>",
        d.trim_end()
    );
}

/// Norm histories on log-log axes, the fitted model over its window, and a
/// reference line with the predicted slope.
///
/// `series` pairs a label with one value per entry of `t`. Only points with
/// `t > 0` and positive values are drawn.
pub fn decay_svg(t: &[f64], series: &[(String, &[f64])], report: Option<&DecayReport>) -> String {
    let logs: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|(_, y)| {
            let pts: Vec<(f64, f64)> = t
                .iter()
                .zip(y.iter())
                .filter(|(ti, yi)| **ti > 0.0 && **yi > 0.0 && yi.is_finite())
                .map(|(ti, yi)| (ti.log10(), yi.log10()))
                .collect();
            let stride = pts.len().div_ceil(MAX_POINTS).max(1);
            let mut thin: Vec<(f64, f64)> = pts.iter().copied().step_by(stride).collect();
            if let Some(last) = pts.last() {
                if thin.last() != Some(last) {
                    thin.push(*last);
                }
            }
            thin
        })
        .collect();
    let all = logs.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in all {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let ax = Axes { x0: x0.floor(), x1: x1.ceil().max(x0.floor() + 1.0), y0: y0.floor(), y1: y1.ceil().max(y0.floor() + 1.0) };

    let mut out = String::new();
    let _ = writeln!(out, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">");
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        W - LEFT - RIGHT,
        H - TOP - BOTTOM
    );
    let mut k = ax.x0;
    while k <= ax.x1 {
        let x = ax.px(k);
        let _ = writeln!(out, "<line x1=\"{x:.2}\" y1=\"{TOP}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"#dddddd\"/>", H - BOTTOM);
        let _ = writeln!(
            out,
            "<text x=\"{x:.2}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">1e{k}</text>",
            H - BOTTOM + 16.0
        );
        k += 1.0;
    }
    let mut k = ax.y0;
    let ystep = ((ax.y1 - ax.y0) / 10.0).ceil().max(1.0);
    while k <= ax.y1 {
        let y = ax.py(k);
        let _ = writeln!(out, "<line x1=\"{LEFT}\" y1=\"{y:.2}\" x2=\"{}\" y2=\"{y:.2}\" stroke=\"#dddddd\"/>", W - RIGHT);
        let _ = writeln!(out, "<text x=\"{}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">1e{k}</text>", LEFT - 6.0, y + 4.0);
        k += ystep;
    }
    let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">t</text>", (LEFT + W - RIGHT) / 2.0, H - 12.0);
    let _ = writeln!(out, "<text x=\"16\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 16 {})\" text-anchor=\"middle\">norm</text>", (TOP + H - BOTTOM) / 2.0, (TOP + H - BOTTOM) / 2.0);

    for (i, pts) in logs.iter().enumerate() {
        polyline(&mut out, &ax, pts, COLORS[i % COLORS.len()], None);
    }
    let mut legend: Vec<(String, &str, Option<&str>)> =
        series.iter().enumerate().map(|(i, (l, _))| (l.clone(), COLORS[i % COLORS.len()], None)).collect();

    if let Some(r) = report {
        let (lo, hi) = r.window;
        let lo = lo.max(10f64.powf(ax.x0));
        let n = 64;
        let model_pts: Vec<(f64, f64)> = (0..=n)
            .map(|i| {
                let lt = lo.log10() + (hi.log10() - lo.log10()) * i as f64 / n as f64;
                let tt = 10f64.powf(lt);
                let ln_y = match r.model {
                    ModelKind::PowerLaw => r.fit.intercept - r.fit.rate * tt.ln(),
                    ModelKind::Exponential => r.fit.intercept - r.fit.rate * tt,
                };
                (lt, ln_y / std::f64::consts::LN_10)
            })
            .collect();
        polyline(&mut out, &ax, &model_pts, "#d62728", Some("6 3"));
        legend.push((format!("fit: {} rate {:.4}", r.model, r.fit.rate), "#d62728", Some("6 3")));
        if let (Prediction::Power { exponent }, Some(&(lx, ly))) = (r.predicted, model_pts.first()) {
            let lx1 = hi.log10();
            let refline = [(lx, ly), (lx1, ly - exponent * (lx1 - lx))];
            polyline(&mut out, &ax, &refline, "#ff7f0e", Some("2 3"));
            legend.push((format!("predicted slope -{exponent:.4}"), "#ff7f0e", Some("2 3")));
        }
    }
    for (i, (label, color, dash)) in legend.iter().enumerate() {
        let y = TOP + 14.0 + 16.0 * i as f64;
        let x = W - RIGHT - 210.0;
        let dash = dash.map(|s| format!(" stroke-dasharray=\"{s}\"")).unwrap_or_default();
        let _ = writeln!(out, "<line x1=\"{x}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>", x + 24.0);
        let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" font-size=\"11\">{}</text>", x + 30.0, y + 4.0, escape(label));
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
