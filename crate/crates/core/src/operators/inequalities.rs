//! Pointwise inequalities behind the structural estimates, as executable checks.

use crate::error::{param, Error, Result};
use crate::grid::{GridFunction, C64};
use crate::operators::{dissipation, FracKernel, Field, Operator};
use crate::parallel::Execution;

/// `|x|^{s-2} x`, zero at the origin.
fn signed_pow(x: f64, s: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.abs().powf(s - 2.0) * x
    }
}

/// `(a - b)(|a|^{s-2}a - |b|^{s-2}b) ≥ 0`, with slack `1e-12` of the factor sizes.
pub fn check_monotone_pairing(a: f64, b: f64, s: f64) -> bool {
    let (pa, pb) = (signed_pow(a, s), signed_pow(b, s));
    let prod = (a - b) * (pa - pb);
    prod >= -1e-12 * (a - b).abs() * (pa.abs() + pb.abs())
}

/// `(a² + b²)(|at - β|² + |bt + α|²) ≥ |aα + bβ|²` for vectors `α, β, t`.
pub fn check_magnetic_quadratic(a: f64, b: f64, alpha: &[f64], beta: &[f64], t: &[f64]) -> Result<bool> {
    if alpha.len() != beta.len() || alpha.len() != t.len() {
        return Err(Error::Shape(format!(
            "vector lengths {}, {}, {} differ",
            alpha.len(),
            beta.len(),
            t.len()
        )));
    }
    let mut q = 0.0;
    let mut rhs = 0.0;
    for i in 0..t.len() {
        q += (a * t[i] - beta[i]).powi(2) + (b * t[i] + alpha[i]).powi(2);
        rhs += (a * alpha[i] + b * beta[i]).powi(2);
    }
    let lhs = (a * a + b * b) * q;
    Ok(lhs >= rhs - 1e-12 * (1.0 + rhs))
}

/// Exponent `p = max{2, (s+2)/2}`.
pub fn lap_exponent(s: f64) -> f64 {
    (0.5 * (s + 2.0)).max(2.0)
}

/// `g(λ) = (1 - |λ|^{(s+2)/(2p)})^{2p} / ((1-λ)³ (1 - |λ|^{s-2}λ))` on `[-1, 1)`.
pub fn power_ratio_g(s: f64, p: f64, lambda: f64) -> f64 {
    let r = (s + 2.0) / (2.0 * p);
    if lambda == 0.0 {
        return 1.0;
    }
    let eps = 1.0 - lambda;
    let (num_base, den_tail) = if lambda > 0.0 {
        let ln = (-eps).ln_1p();
        // 1 - λ^r and 1 - λ^{s-1}, both free of cancellation near λ = 1
        (-(r * ln).exp_m1(), -((s - 1.0) * ln).exp_m1())
    } else {
        let m = -lambda;
        (1.0 - m.powf(r), 1.0 + m.powf(s - 1.0))
    };
    num_base.powf(2.0 * p) / (eps.powi(3) * den_tail)
}

/// Limit of `g` at `λ → 1⁻`: `((s+2)/4)⁴/(s-1)` for `p = 2`, `0` for `p > 2`.
fn power_ratio_limit(s: f64, p: f64) -> f64 {
    if p > 2.0 {
        0.0
    } else {
        (0.25 * (s + 2.0)).powi(4) / (s - 1.0)
    }
}

fn check_ratio_params(s: f64, p: f64) -> Result<()> {
    if !(p >= 2.0 && p.is_finite()) {
        return param(format!("p must be >= 2, got {p}"));
    }
    if !(s > 1.0 && s.is_finite()) {
        // at s = 1 the factor 1 - |λ|^{-1}λ vanishes on (0, 1)
        return Err(Error::Domain(format!("g is unbounded for s = {s}; need s > 1")));
    }
    Ok(())
}

/// Largest `g(λ)` over `lambda_grid ⊂ (-1, 1)`.
pub fn check_power_ratio_bound(s: f64, p: f64, lambda_grid: &[f64]) -> Result<f64> {
    check_ratio_params(s, p)?;
    let mut best: f64 = 0.0;
    for &l in lambda_grid {
        if !(l > -1.0 && l < 1.0) {
            return param(format!("grid point {l} outside (-1, 1)"));
        }
        let g = power_ratio_g(s, p, l);
        if !g.is_finite() {
            return Err(Error::Domain(format!("g({l}) is not finite")));
        }
        best = best.max(g);
    }
    Ok(best)
}

/// `sup_{(-1,1)} g`, from a dense scan, golden-section refinement and the limit at `1⁻`.
pub fn power_ratio_sup(s: f64, p: f64) -> Result<f64> {
    check_ratio_params(s, p)?;
    let g = |l: f64| power_ratio_g(s, p, l);
    // uniform points, then points clustering at 1
    let mut pts: Vec<f64> = (1..4000).map(|i| -1.0 + i as f64 / 2000.0).collect();
    pts.extend((10..=160).map(|k| 1.0 - 10f64.powf(-k as f64 / 10.0)));
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();
    let vals: Vec<f64> = pts.iter().map(|&l| g(l)).collect();
    let (imax, &vmax) = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty scan");
    let lo = if imax == 0 { -1.0 + 1e-15 } else { pts[imax - 1] };
    let hi = if imax + 1 == pts.len() { pts[imax] } else { pts[imax + 1] };
    let refined = golden_max(&g, lo, hi);
    Ok(vmax.max(refined).max(power_ratio_limit(s, p)))
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = fc.max(fd);
    for _ in 0..200 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
        best = best.max(fc).max(fd);
        if (b - a).abs() < 1e-15 {
            break;
        }
    }
    best
}

/// Which magnetic operator a diamagnetic check uses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DiamagneticVariant {
    Classical,
    Fractional { sigma: f64 },
}

/// Both sides of a diamagnetic inequality `lhs ≥ rhs`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiamagneticCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// `|u|^{e}` with the zero-weight convention at nodes where `u = 0`.
fn abs_pow(z: C64, e: f64) -> f64 {
    let r = z.norm();
    if r == 0.0 {
        0.0
    } else {
        r.powf(e)
    }
}

/// Diamagnetic inequality with tolerance `1e-8` of the magnitude of both sides.
pub fn check_diamagnetic(
    u: &GridFunction,
    field: &Field,
    variant: DiamagneticVariant,
    s: f64,
) -> Result<DiamagneticCheck> {
    check_diamagnetic_tol(u, field, variant, s, 1e-8)
}

/// Classical: `h Σ |u|^{s-2} Re(ū N_A u) ≥ h Σ_links D⁺|u|^{s-1} · D⁺|u|`.
///
/// Fractional: `h Σ |u|^{s-2} Re(ū N_{A,σ} u) ≥ h Σ |u|^{s-1} (L_σ |u|)`.
pub fn check_diamagnetic_tol(
    u: &GridFunction,
    field: &Field,
    variant: DiamagneticVariant,
    s: f64,
    tol: f64,
) -> Result<DiamagneticCheck> {
    if !(s >= 1.0 && s.is_finite()) {
        return param(format!("exponent must be finite and >= 1, got {s}"));
    }
    let g = *u.grid();
    let h = g.h();
    let (lhs, rhs) = match variant {
        DiamagneticVariant::Classical => {
            let lhs = dissipation(&Operator::Magnetic { field: field.clone() }, u, s)?;
            let n = u.values().len() as isize;
            let mut rhs = 0.0;
            for q in -1..n {
                let (l, r) = (u.at(q), u.at(q + 1));
                rhs += (abs_pow(r, s - 1.0) - abs_pow(l, s - 1.0)) * (r.norm() - l.norm());
            }
            (lhs, rhs / h)
        }
        DiamagneticVariant::Fractional { sigma } => {
            let op = Operator::FracMagnetic { sigma, field: field.clone() };
            let lhs = dissipation(&op, u, s)?;
            let modulus = GridFunction::from_real(g, &u.moduli())?;
            let lm = FracKernel::new(&g, sigma).apply(&modulus, Execution::Sequential);
            let rhs: f64 = u
                .values()
                .iter()
                .zip(&lm)
                .map(|(z, l)| abs_pow(*z, s - 1.0) * l.re)
                .sum();
            (lhs, rhs * h)
        }
    };
    let scale = lhs.abs() + rhs.abs() + f64::MIN_POSITIVE;
    Ok(DiamagneticCheck { lhs, rhs, pass: lhs >= rhs - tol * scale })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_fixed_points() {
        assert_eq!(power_ratio_g(3.0, lap_exponent(3.0), 0.0), 1.0);
        assert_eq!(power_ratio_g(3.0, lap_exponent(3.0), -1.0), 0.0);
        assert!(check_power_ratio_bound(3.0, 1.5, &[0.1]).is_err());
        assert!(check_power_ratio_bound(1.0, 2.0, &[0.5]).is_err());
    }

    #[test]
    fn monotone_pairing_examples() {
        assert!(check_monotone_pairing(1.0, 1.0, 2.0));
        assert!(check_monotone_pairing(1.0, -1.0, 3.0));
        assert!(check_monotone_pairing(0.0, -2.0, 1.0));
    }
}
