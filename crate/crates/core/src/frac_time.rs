//! Caputo derivatives, the mixed time operator and the scalar model problem.
//!
//! # Definition
//!
//! For `α ∈ (0, 1)` the Caputo derivative is normalized by `1/Γ(1-α)`:
//!
//! ```text
//! ∂ₜ^α v(t) = 1/Γ(1-α) ∫₀ᵗ (t-τ)^{-α} v'(τ) dτ
//! ```
//!
//! On a uniform history `v_0..v_m` with step `dt` the L1 scheme reads
//!
//! ```text
//! ∂ₜ^α v(t_m) ≈ dt^{-α}/Γ(2-α) Σ_{k<m} b_k (v_{m-k} - v_{m-k-1}),   b_k = (k+1)^{1-α} - k^{1-α}
//! ```
//!
//! and equals the exact Caputo derivative of the piecewise linear interpolant.

use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{param, Error, Result};
use crate::parallel::Execution;
use crate::quad;

/// `λ₁ ∂ₜ^α + λ₂ ∂ₜ` with `λ₁ + λ₂ = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixedDerivative {
    pub lambda1: f64,
    pub lambda2: f64,
    pub alpha: f64,
}

impl MixedDerivative {
    pub fn new(lambda1: f64, lambda2: f64, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda1) || !(0.0..=1.0).contains(&lambda2) {
            return param(format!("lambda1, lambda2 must lie in [0, 1], got {lambda1}, {lambda2}"));
        }
        if (lambda1 + lambda2 - 1.0).abs() > 1e-12 {
            return param(format!("lambda1 + lambda2 must equal 1, got {}", lambda1 + lambda2));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return param(format!("alpha must lie in (0, 1), got {alpha}"));
        }
        Ok(MixedDerivative { lambda1, lambda2, alpha })
    }

    /// Builds the operator from `λ₁` alone, with `λ₂ = 1 - λ₁`.
    pub fn from_lambda1(lambda1: f64, alpha: f64) -> Result<Self> {
        Self::new(lambda1, 1.0 - lambda1, alpha)
    }

    /// `dt^{-α}/Γ(2-α)`, the leading L1 coefficient.
    pub fn l1_coefficient(&self, dt: f64) -> f64 {
        dt.powf(-self.alpha) / gamma(2.0 - self.alpha)
    }
}

/// Scalar samples on a uniform time grid starting at `t[0]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarHistory {
    t: Vec<f64>,
    v: Vec<f64>,
}

impl ScalarHistory {
    pub fn new(t: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if t.len() != v.len() {
            return Err(Error::Shape(format!("{} times but {} values", t.len(), v.len())));
        }
        if t.len() < 2 {
            return param("history needs at least two samples");
        }
        if t.iter().chain(v.iter()).any(|x| !x.is_finite()) {
            return param("history has non-finite entries");
        }
        let dt = t[1] - t[0];
        if dt <= 0.0 {
            return param("history times must increase");
        }
        for w in t.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(w[1].abs() * 1e-7) {
                return param("history times must be uniformly spaced");
            }
        }
        Ok(ScalarHistory { t, v })
    }

    /// Samples at `t_i = i dt`.
    pub fn uniform(dt: f64, v: Vec<f64>) -> Result<Self> {
        let t = (0..v.len()).map(|i| i as f64 * dt).collect();
        Self::new(t, v)
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn dt(&self) -> f64 {
        (self.t[self.t.len() - 1] - self.t[0]) / (self.t.len() - 1) as f64
    }

    pub fn last(&self) -> f64 {
        self.v[self.v.len() - 1]
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return param(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    Ok(())
}

/// L1 weights `b_k = (k+1)^{1-α} - k^{1-α}` for `k = 0..m`.
pub fn l1_weights(alpha: f64, m: usize) -> Vec<f64> {
    let e = 1.0 - alpha;
    (0..m).map(|k| ((k + 1) as f64).powf(e) - (k as f64).powf(e)).collect()
}

/// L1 approximation of `∂ₜ^α v` at the last sample.
pub fn caputo_l1(h: &ScalarHistory, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let m = h.len() - 1;
    let b = l1_weights(alpha, m);
    let v = &h.v;
    let sum: f64 = (0..m).map(|k| b[k] * (v[m - k] - v[m - k - 1])).sum();
    Ok(sum * h.dt().powf(-alpha) / gamma(2.0 - alpha))
}

/// Caputo derivative at the last sample from the integrated-by-parts form
///
/// ```text
/// 1/Γ(1-α) [ (v(t) - v(0))/t^α + α ∫₀ᵗ (v(t) - v(τ))/(t-τ)^{1+α} dτ ]
/// ```
///
/// with `v` replaced by its piecewise linear interpolant and each cell
/// integrated in closed form.
pub fn caputo_pointwise(h: &ScalarHistory, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let m = h.len() - 1;
    let dt = h.dt();
    let v = &h.v;
    let t = m as f64 * dt;
    let vm = v[m];
    let mut integral = 0.0;
    for j in 0..m - 1 {
        let s = (v[j + 1] - v[j]) / dt;
        let r0 = t - j as f64 * dt;
        let r1 = t - (j + 1) as f64 * dt;
        let c = vm - v[j] - s * r0;
        // α ∫ c (t-τ)^{-1-α} = c (r1^{-α} - r0^{-α})
        integral += c * (r1.powf(-alpha) - r0.powf(-alpha))
            + alpha * s * (r0.powf(1.0 - alpha) - r1.powf(1.0 - alpha)) / (1.0 - alpha);
    }
    // last cell: v(t) - v(τ) = s (t - τ) exactly
    let s = (v[m] - v[m - 1]) / dt;
    integral += alpha * s * dt.powf(1.0 - alpha) / (1.0 - alpha);
    Ok(((vm - v[0]) / t.powf(alpha) + integral) / gamma(1.0 - alpha))
}

/// `λ₁ ∂ₜ^α v + λ₂ v'` at the last sample (L1 plus a backward difference).
pub fn mixed_apply(spec: &MixedDerivative, h: &ScalarHistory) -> Result<f64> {
    let m = h.len() - 1;
    let frac = if spec.lambda1 > 0.0 { caputo_l1(h, spec.alpha)? } else { 0.0 };
    let classical = (h.v[m] - h.v[m - 1]) / h.dt();
    Ok(spec.lambda1 * frac + spec.lambda2 * classical)
}

/// Starting weights `e_m` that make `L1 + e_m dt^{-α} (v_1 - v_0)` exact for `v = t^α`.
///
/// Solutions of fractional relaxation problems behave like `v_0 + c t^α` near
/// `t = 0`; plain L1 loses accuracy on the first steps there. Entry 0 is unused.
pub fn l1_start_correction(alpha: f64, m_max: usize, exec: Execution) -> Vec<f64> {
    let b = l1_weights(alpha, m_max);
    let inc: Vec<f64> = (0..m_max)
        .map(|j| ((j + 1) as f64).powf(alpha) - (j as f64).powf(alpha))
        .collect();
    let exact = gamma(1.0 + alpha);
    let g2 = gamma(2.0 - alpha);
    let mut out = exec.map_range(m_max + 1, |m| {
        if m == 0 {
            return 0.0;
        }
        // Σ_k b_k ((m-k)^α - (m-k-1)^α)
        let s: f64 = (0..m).map(|k| b[k] * inc[m - k - 1]).sum();
        exact - s / g2
    });
    out[0] = 0.0;
    out
}

/// Reciprocal gamma function, exactly zero at the poles.
pub(crate) fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x < 0.5 {
        gamma(1.0 - x) * (std::f64::consts::PI * x).sin() / std::f64::consts::PI
    } else {
        1.0 / gamma(x)
    }
}

const ML_SERIES_LIMIT: f64 = 8.0;
const ML_ASYMPTOTIC_TERMS: usize = 8;

/// Mittag-Leffler function `E_α(z) = Σ z^k/Γ(αk + 1)` for `α ∈ (0, 1]`, `z ≤ 0`.
///
/// Three evaluation routes are used: the power series while
/// `|z|^{1/α} ≤ 8` (cancellation costs at most a factor `e^8`), the
/// asymptotic expansion `-Σ_{k=1}^{8} z^{-k}/Γ(1-αk)` once its next term is
/// negligible, and otherwise the Laplace representation
///
/// ```text
/// E_α(-x) = sin(απ)/(απ) ∫₀^∞ exp(-(x y)^{1/α}) / (y² + 2y cos(απ) + 1) dy
/// ```
///
/// evaluated by adaptive quadrature. `α = 1` returns `exp(z)`.
pub fn mittag_leffler(alpha: f64, z: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return param(format!("Mittag-Leffler order must lie in (0, 1], got {alpha}"));
    }
    if z.is_nan() || z > 0.0 {
        return Err(Error::Domain(format!("Mittag-Leffler argument must be <= 0, got {z}")));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if alpha == 1.0 {
        return Ok(z.exp());
    }
    let x = -z;
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x.powf(1.0 / alpha) <= ML_SERIES_LIMIT {
        return Ok(ml_series(alpha, x));
    }
    if alpha <= 0.95 {
        let (val, next) = ml_asymptotic(alpha, x);
        if next.abs() <= 1e-14 * val.abs() {
            return Ok(val);
        }
    }
    Ok(ml_integral(alpha, x))
}

fn ml_series(alpha: f64, x: f64) -> f64 {
    let lx = x.ln();
    let mut sum = 1.0;
    let mut prev = 1.0;
    let mut k = 1usize;
    loop {
        let mag = (k as f64 * lx - ln_gamma(alpha * k as f64 + 1.0)).exp();
        sum += if k % 2 == 0 { mag } else { -mag };
        if mag < prev && mag <= 1e-17 * sum.abs().max(1e-300) {
            return sum;
        }
        prev = mag;
        k += 1;
        if k > 10_000 {
            return sum;
        }
    }
}

/// Asymptotic value and the size of the first omitted term.
fn ml_asymptotic(alpha: f64, x: f64) -> (f64, f64) {
    let mut sum = 0.0;
    let mut xp = 1.0;
    for k in 1..=ML_ASYMPTOTIC_TERMS {
        xp /= x;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * xp * rgamma(1.0 - alpha * k as f64);
    }
    let k = ML_ASYMPTOTIC_TERMS + 1;
    let next = xp / x * rgamma(1.0 - alpha * k as f64);
    (sum, next)
}

fn ml_integral(alpha: f64, x: f64) -> f64 {
    let (s, c) = (alpha * std::f64::consts::PI).sin_cos();
    let p = 1.0 / alpha;
    let inner = |y: f64| (-(x * y).powf(p)).exp() / (y * y + 2.0 * y * c + 1.0);
    let outer = |v: f64| {
        if v == 0.0 {
            0.0
        } else {
            (-(x / v).powf(p)).exp() / (1.0 + 2.0 * v * c + v * v)
        }
    };
    let total = quad::integrate(inner, 0.0, 1.0, 1e-16) + quad::integrate(outer, 0.0, 1.0, 1e-16);
    s / (alpha * std::f64::consts::PI) * total
}

/// Scalar model problem `λ₁ ∂ₜ^α v + λ₂ v' = -k v^γ`, `v(0) = v_0 ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarProblem {
    pub deriv: MixedDerivative,
    pub k: f64,
    pub gamma: f64,
    pub v0: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Apply the `t^α` starting correction (see [`l1_start_correction`]).
    pub start_correction: bool,
}

impl ScalarProblem {
    pub fn new(deriv: MixedDerivative, k: f64, gamma: f64, v0: f64, dt: f64, t_end: f64) -> Self {
        ScalarProblem { deriv, k, gamma, v0, dt, t_end, start_correction: true }
    }

    fn validate(&self) -> Result<usize> {
        if !(self.k >= 0.0 && self.k.is_finite()) {
            return param(format!("k must be finite and >= 0, got {}", self.k));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return param(format!("gamma must be positive, got {}", self.gamma));
        }
        if !(self.v0 >= 0.0 && self.v0.is_finite()) {
            return param(format!("v0 must be finite and >= 0, got {}", self.v0));
        }
        if !(self.dt > 0.0 && self.t_end > self.dt && self.t_end.is_finite()) {
            return param(format!("need 0 < dt < t_end, got dt={}, t_end={}", self.dt, self.t_end));
        }
        Ok((self.t_end / self.dt - 1e-9).ceil() as usize)
    }
}

/// Implicit L1 solver for [`ScalarProblem`].
///
/// The memory term is explicit; the new value solves
/// `a v + k v^γ = rhs` by safeguarded Newton iteration, clamped at zero.
pub fn solve_scalar_mixed(p: &ScalarProblem) -> Result<ScalarHistory> {
    let steps = p.validate()?;
    let d = p.deriv;
    let alpha = d.alpha;
    let c_l1 = d.lambda1 * d.l1_coefficient(p.dt);
    let a = c_l1 + d.lambda2 / p.dt;
    let use_corr = p.start_correction && d.lambda1 > 0.0;
    let corr = if use_corr {
        l1_start_correction(alpha, steps, Execution::Sequential)
    } else {
        Vec::new()
    };
    let corr_scale = d.lambda1 * p.dt.powf(-alpha);
    let b = l1_weights(alpha, steps);

    let mut v = Vec::with_capacity(steps + 1);
    v.push(p.v0);
    let mut diffs: Vec<f64> = Vec::with_capacity(steps);
    for m in 1..=steps {
        let prev = v[m - 1];
        let (coef, rhs) = if m == 1 {
            let coef = if use_corr { corr_scale * gamma(1.0 + alpha) + d.lambda2 / p.dt } else { a };
            (coef, coef * prev)
        } else {
            let hist: f64 = (1..m).map(|k| b[k] * diffs[m - k - 1]).sum();
            let mut rhs = a * prev - c_l1 * hist;
            if use_corr {
                rhs -= corr_scale * corr[m] * diffs[0];
            }
            (a, rhs)
        };
        let next = solve_implicit(coef, p.k, p.gamma, rhs, prev).ok_or_else(|| {
            Error::Convergence { step: m, detail: "Newton iteration did not reach 1e-12".into() }
        })?;
        diffs.push(next - prev);
        v.push(next);
    }
    ScalarHistory::uniform(p.dt, v)
}

/// Root of `a v + k v^γ = rhs` on `v ≥ 0`, or 0 when `rhs ≤ 0`.
fn solve_implicit(a: f64, k: f64, g: f64, rhs: f64, guess: f64) -> Option<f64> {
    if rhs <= 0.0 {
        return Some(0.0);
    }
    let f = |v: f64| a * v + k * v.powf(g) - rhs;
    let (mut lo, mut hi) = (0.0, rhs / a);
    let mut v = guess.clamp(lo, hi);
    for _ in 0..50 {
        let fv = f(v);
        if fv == 0.0 {
            return Some(v);
        }
        if fv > 0.0 {
            hi = v;
        } else {
            lo = v;
        }
        let df = a + k * g * v.powf(g - 1.0);
        let mut next = v - fv / df;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - v).abs() <= 1e-12 * next.abs() || hi - lo <= 1e-12 * hi {
            return Some(next);
        }
        v = next;
    }
    None
}
