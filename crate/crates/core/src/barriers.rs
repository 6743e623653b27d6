//! Explicit supersolutions of the scalar problem `λ₁ ∂ₜ^α w + λ₂ w' ≥ -ν w^γ`.
//!
//! Three barrier families are provided:
//!
//! * [`mixed_power_barrier`]: `w = u₀` on `[0, t₀]`, `K t^{-α/γ}` after, valid for any `λ₁ + λ₂ = 1`;
//! * [`exponential_barrier`]: classical derivative, `γ ≤ 1`, exponential tail;
//! * [`classical_power_barrier`]: classical derivative, `γ > 1`, tail `t^{-1/(γ-1)}`.
//!
//! Every barrier is continuous at its switching time `t₀`.

use statrs::function::gamma::gamma;

use crate::error::{param, Error, Result};
use crate::frac_time::{mixed_apply, MixedDerivative, ScalarHistory};
use crate::parallel::Execution;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Barrier {
    MixedPower { u0: f64, t0: f64, k_coef: f64, alpha: f64, gamma: f64 },
    Exponential { w0: f64, t0: f64, theta0: f64, c: f64, gamma: f64 },
    ClassicalPower { w0: f64, gamma: f64 },
}

impl Barrier {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Barrier::MixedPower { u0, t0, k_coef, alpha, gamma } => {
                if t <= t0 {
                    u0
                } else {
                    k_coef * t.powf(-alpha / gamma)
                }
            }
            Barrier::Exponential { w0, t0, theta0, c, gamma } => {
                if t <= t0 {
                    if gamma == 1.0 {
                        w0
                    } else {
                        (w0.powf(1.0 - gamma) - (1.0 - gamma) * t / c).powf(1.0 / (1.0 - gamma))
                    }
                } else {
                    theta0 * ((t0 - t) / c).exp()
                }
            }
            Barrier::ClassicalPower { w0, gamma } => {
                if t <= 1.0 {
                    w0
                } else {
                    w0 * t.powf(-1.0 / (gamma - 1.0))
                }
            }
        }
    }

    /// Switching time where the two branches meet.
    pub fn t0(&self) -> f64 {
        match *self {
            Barrier::MixedPower { t0, .. } | Barrier::Exponential { t0, .. } => t0,
            Barrier::ClassicalPower { .. } => 1.0,
        }
    }

    /// Barrier values on the times of `like`.
    pub fn sample_like(&self, like: &ScalarHistory) -> Result<ScalarHistory> {
        let t = like.times().to_vec();
        let v = t.iter().map(|&s| self.value(s)).collect();
        ScalarHistory::new(t, v)
    }
}

/// Mixed-derivative power barrier for initial size `u₀` and rate `ν = 1/C`.
///
/// `t₀` is the largest of
///
/// ```text
/// T = (u₀^{1-γ}/ν) (2^α/Γ(1-α) + (α/γ) 2^{α+α/γ}/Γ(2-α)),   T^{1/α},   1,   (α/(γν)) u₀^{1-γ}
/// ```
///
/// The memory estimate bounds `t₀^α`, so `T^{1/α}` is what makes the
/// barrier scale correctly when `u₀^{1-γ}/ν` is large; `T` itself is kept
/// so `t₀` is never smaller than the unscaled condition.
pub fn mixed_power_barrier(u0: f64, alpha: f64, gamma_exp: f64, nu: f64) -> Result<Barrier> {
    if !(u0 > 0.0 && u0.is_finite()) {
        return param(format!("u0 must be positive, got {u0}"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return param(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    if !(gamma_exp > 0.0 && gamma_exp.is_finite()) {
        return param(format!("gamma must be positive, got {gamma_exp}"));
    }
    if !(nu > 0.0 && nu.is_finite()) {
        return param(format!("nu must be positive, got {nu}"));
    }
    let beta = alpha / gamma_exp;
    let scale = u0.powf(1.0 - gamma_exp) / nu;
    let memory = scale
        * (2f64.powf(alpha) / gamma(1.0 - alpha)
            + beta * 2f64.powf(alpha + beta) / gamma(2.0 - alpha));
    let classical = beta * scale;
    let t0 = memory.max(memory.powf(1.0 / alpha)).max(1.0).max(classical);
    Ok(Barrier::MixedPower { u0, t0, k_coef: u0 * t0.powf(beta), alpha, gamma: gamma_exp })
}

/// Exponential barrier for `w' ≥ -w^γ/C` with `γ ∈ (0, 1]`.
///
/// For `γ < 1` the barrier follows the explicit solution until it reaches 1
/// at `t₀ = C (w₀^{1-γ} - 1)/(1-γ)` and decays like `e^{-t/C}` afterwards.
pub fn exponential_barrier(w0: f64, c: f64, gamma_exp: f64) -> Result<Barrier> {
    if !(w0 > 0.0 && w0.is_finite()) {
        return param(format!("w0 must be positive, got {w0}"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return param(format!("C must be positive, got {c}"));
    }
    if !(gamma_exp > 0.0 && gamma_exp <= 1.0) {
        return param(format!("exponential barrier needs gamma in (0, 1], got {gamma_exp}"));
    }
    if gamma_exp == 1.0 {
        return Ok(Barrier::Exponential { w0, t0: 0.0, theta0: w0, c, gamma: 1.0 });
    }
    let q = 1.0 - gamma_exp;
    let t0 = (c * (w0.powf(q) - 1.0) / q).max(0.0);
    let theta0 = (w0.powf(q) - q * t0 / c).powf(1.0 / q);
    Ok(Barrier::Exponential { w0, t0, theta0, c, gamma: gamma_exp })
}

/// Power barrier for `w' ≥ -w^γ/C` with `γ > 1`.
pub fn classical_power_barrier(w0_norm: f64, c: f64, gamma_exp: f64) -> Result<Barrier> {
    if !(w0_norm > 0.0 && w0_norm.is_finite()) {
        return param(format!("initial norm must be positive, got {w0_norm}"));
    }
    if !(c > 0.0 && c.is_finite()) {
        return param(format!("C must be positive, got {c}"));
    }
    if !(gamma_exp > 1.0 && gamma_exp.is_finite()) {
        return param(format!("classical power barrier needs gamma > 1, got {gamma_exp}"));
    }
    let floor = (c / (gamma_exp - 1.0)).powf(1.0 / (gamma_exp - 1.0));
    Ok(Barrier::ClassicalPower { w0: w0_norm.max(floor), gamma: gamma_exp })
}

/// Outcome of [`verify_supersolution`].
#[derive(Clone, Debug, PartialEq)]
pub struct SupersolutionCheck {
    pub pass: bool,
    /// `r(t)` at each checked time.
    pub residuals: Vec<f64>,
    /// Smallest `r(t) / (k w(t)^γ)`.
    pub min_relative: f64,
    pub worst_time: f64,
}

const RESIDUAL_TOL: f64 = 1e-2;

/// Checks `r(t) = λ₁ ∂ₜ^α w + λ₂ w' + k w^γ ≥ -0.01 k w^γ` at each time in `t_grid`.
///
/// Derivatives are evaluated with [`mixed_apply`] on a dense uniform sampling
/// of `w` over `[0, t]`. Times must be positive and at least one dense step
/// away from the switching time.
pub fn verify_supersolution(
    b: &Barrier,
    spec: &MixedDerivative,
    k: f64,
    gamma_exp: f64,
    t_grid: &[f64],
) -> Result<SupersolutionCheck> {
    verify_supersolution_with(b, spec, k, gamma_exp, t_grid, Execution::default())
}

pub fn verify_supersolution_with(
    b: &Barrier,
    spec: &MixedDerivative,
    k: f64,
    gamma_exp: f64,
    t_grid: &[f64],
    exec: Execution,
) -> Result<SupersolutionCheck> {
    if t_grid.is_empty() {
        return param("empty time grid");
    }
    if !(k > 0.0 && gamma_exp > 0.0) {
        return param("k and gamma must be positive");
    }
    let t0 = b.t0();
    let mut steps = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if !(t > 0.0 && t.is_finite()) {
            return param(format!("check times must be positive, got {t}"));
        }
        let scale = if t0 > 0.0 { t0.min(t) } else { t };
        let m = ((400.0 * t / scale).ceil() as usize).clamp(200, 20_000);
        let dt = t / m as f64;
        if (t - t0).abs() < dt {
            return param(format!("check time {t} is within one step of the switching time {t0}"));
        }
        steps.push(m);
    }
    let results = exec.map_range(t_grid.len(), |i| -> Result<(f64, f64)> {
        let t = t_grid[i];
        let m = steps[i];
        let dt = t / m as f64;
        let v: Vec<f64> = (0..=m).map(|j| b.value(j as f64 * dt)).collect();
        let h = ScalarHistory::uniform(dt, v)?;
        let w = h.last();
        let scale = k * w.powf(gamma_exp);
        let r = mixed_apply(spec, &h)? + scale;
        Ok((r, r / scale))
    });
    let mut residuals = Vec::with_capacity(results.len());
    let mut min_relative = f64::INFINITY;
    let mut worst_time = t_grid[0];
    for (i, r) in results.into_iter().enumerate() {
        let (res, rel) = r?;
        residuals.push(res);
        if rel < min_relative {
            min_relative = rel;
            worst_time = t_grid[i];
        }
    }
    Ok(SupersolutionCheck {
        pass: min_relative >= -RESIDUAL_TOL,
        residuals,
        min_relative,
        worst_time,
    })
}

/// True when `w` dominates `v` at every sample time.
pub fn compare_series(w: &ScalarHistory, v: &ScalarHistory) -> Result<bool> {
    if w.len() != v.len() {
        return Err(Error::Shape(format!("{} barrier samples vs {} solution samples", w.len(), v.len())));
    }
    let same = w
        .times()
        .iter()
        .zip(v.times())
        .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0));
    if !same {
        return Err(Error::Shape("barrier and solution use different time grids".into()));
    }
    if w.values()[0] <= v.values()[0] {
        return Err(Error::Precondition("barrier must start strictly above the solution".into()));
    }
    Ok(w.values().iter().zip(v.values()).all(|(a, b)| a >= b))
}
