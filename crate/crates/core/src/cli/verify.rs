//! The `verify` battery: seeded sweeps of the pointwise inequalities,
//! structural constants for every operator family, and barrier residuals.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::barriers::{mixed_power_barrier, verify_supersolution_with};
use crate::error::Result;
use crate::frac_time::MixedDerivative;
use crate::grid::Grid;
use crate::operators::{
    check_diamagnetic_tol, check_magnetic_quadratic, check_monotone_pairing, estimate_structural_constant_with,
    lap_exponent, power_ratio_g, power_ratio_sup, random_field, smooth_samples, DiamagneticVariant, Field,
    Operator, SampleFamily,
};
use crate::parallel::Execution;

use super::config::VerifyConfig;

/// One line of the PASS/FAIL table.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckRow {
    pub name: String,
    pub samples: usize,
    pub violations: usize,
    pub detail: String,
    pub pass: bool,
}

/// Pointwise inequalities swept by [`inequality_sweep`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Inequality {
    MonotonePairing,
    MagneticQuadratic,
    PowerRatio,
    DiamagneticClassical,
    DiamagneticFractional,
}

impl Inequality {
    pub const ALL: [Inequality; 5] = [
        Inequality::MonotonePairing,
        Inequality::MagneticQuadratic,
        Inequality::PowerRatio,
        Inequality::DiamagneticClassical,
        Inequality::DiamagneticFractional,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Inequality::MonotonePairing => "monotone-pairing",
            Inequality::MagneticQuadratic => "magnetic-quadratic",
            Inequality::PowerRatio => "power-ratio-bounded",
            Inequality::DiamagneticClassical => "diamagnetic-classical",
            Inequality::DiamagneticFractional => "diamagnetic-fractional",
        }
    }
}

const BLOCK: usize = 1000;
/// Relative slack for the diamagnetic sweeps.
const SLACK: f64 = 1e-12;

fn block_rng(seed: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    rng
}

/// Draws a value with a random sign and magnitude spread over six decades.
fn wide<R: Rng>(rng: &mut R) -> f64 {
    let m = 10f64.powf(rng.gen_range(-3.0..3.0));
    if rng.gen_bool(0.5) {
        m
    } else {
        -m
    }
}

/// Violations in one block of `len` samples.
fn sweep_block(kind: Inequality, seed: u64, block: usize, len: usize) -> Result<usize> {
    let mut rng = block_rng(seed, block);
    let mut bad = 0;
    match kind {
        Inequality::MonotonePairing => {
            for _ in 0..len {
                let s = rng.gen_range(1.0..8.0);
                let a = wide(&mut rng);
                let b = match rng.gen_range(0..5) {
                    0 => a,
                    1 => -a,
                    2 => 0.0,
                    _ => wide(&mut rng),
                };
                if !check_monotone_pairing(a, b, s) {
                    bad += 1;
                }
            }
        }
        Inequality::MagneticQuadratic => {
            for _ in 0..len {
                let a = rng.gen_range(-5.0..5.0);
                let b = rng.gen_range(-5.0..5.0);
                let dim = rng.gen_range(1..=3);
                let al: Vec<f64> = (0..dim).map(|_| rng.gen_range(-5.0..5.0)).collect();
                let be: Vec<f64> = (0..dim).map(|_| rng.gen_range(-5.0..5.0)).collect();
                let minimizer = rng.gen_bool(0.25) && a * a + b * b > 0.0;
                let t: Vec<f64> = (0..dim)
                    .map(|i| {
                        if minimizer {
                            (a * be[i] - b * al[i]) / (a * a + b * b)
                        } else {
                            rng.gen_range(-5.0..5.0)
                        }
                    })
                    .collect();
                if !check_magnetic_quadratic(a, b, &al, &be, &t)? {
                    bad += 1;
                }
            }
        }
        Inequality::PowerRatio => {
            let s = rng.gen_range(1.05..8.0);
            let p = lap_exponent(s);
            let sup = power_ratio_sup(s, p)?;
            if !sup.is_finite() {
                return Ok(len);
            }
            for _ in 0..len {
                let l: f64 = match rng.gen_range(0..3) {
                    0 => 1.0 - 10f64.powf(-rng.gen_range(1.0..12.0)),
                    1 => -1.0 + 10f64.powf(-rng.gen_range(1.0..12.0)),
                    _ => rng.gen_range(-1.0..1.0),
                };
                if !(l > -1.0 && l < 1.0) {
                    continue;
                }
                let g = power_ratio_g(s, p, l);
                if !(g.is_finite() && g <= sup * (1.0 + SLACK)) {
                    bad += 1;
                }
            }
        }
        Inequality::DiamagneticClassical | Inequality::DiamagneticFractional => {
            let g = Grid::new(0.0, 1.0, 15)?;
            let samples = smooth_samples(g, SampleFamily::Complex, len, rng.gen());
            for u in &samples {
                let field = random_field(&mut rng);
                let s = rng.gen_range(1.0..6.0);
                let variant = match kind {
                    Inequality::DiamagneticClassical => DiamagneticVariant::Classical,
                    _ => DiamagneticVariant::Fractional { sigma: rng.gen_range(0.05..0.95) },
                };
                if !check_diamagnetic_tol(u, &field, variant, s, SLACK)?.pass {
                    bad += 1;
                }
            }
        }
    }
    Ok(bad)
}

/// Checks `samples` seeded random instances of one inequality.
///
/// Samples are drawn in blocks of 1000, each from its own stream of the
/// seed, so the result does not depend on `exec`.
pub fn inequality_sweep(kind: Inequality, samples: usize, seed: u64, exec: Execution) -> Result<CheckRow> {
    let blocks = samples.div_ceil(BLOCK);
    let per = exec.map_range(blocks, |i| {
        let len = BLOCK.min(samples - i * BLOCK);
        sweep_block(kind, seed, i, len)
    });
    let mut violations = 0;
    for r in per {
        violations += r?;
    }
    Ok(CheckRow {
        name: kind.name().into(),
        samples,
        violations,
        detail: String::new(),
        pass: violations == 0,
    })
}

/// Largest second-half ratio over largest first-half ratio that still counts as stable.
pub const STABILITY_LIMIT: f64 = 1.1;

/// Fixed magnetic field used for the structural battery.
pub fn battery_field() -> Field {
    Field { constant: 1.5, modes: vec![(1.0, 2.0 * std::f64::consts::PI, 0.3)] }
}

/// One representative of every operator family with a decay theorem.
pub fn battery_operators() -> Vec<Operator> {
    let field = battery_field();
    vec![
        Operator::Laplacian,
        Operator::FracLaplacian { sigma: 0.5 },
        Operator::PorousMedium { sigma: 0.25, epsilon: None, c_kernel: 1.0 },
        Operator::Kirchhoff { m0: 1.0, b: 1.0 },
        Operator::Kirchhoff { m0: 0.0, b: 1.0 },
        Operator::FracKirchhoff { sigma: 0.5, m0: 1.0, b: 1.0 },
        Operator::FracKirchhoff { sigma: 0.5, m0: 0.0, b: 1.0 },
        Operator::Magnetic { field: field.clone() },
        Operator::FracMagnetic { sigma: 0.5, field },
    ]
}

fn op_label(op: &Operator) -> String {
    if op.is_degenerate() {
        format!("{}(m0=0)", op.name())
    } else {
        op.name().to_string()
    }
}

/// Structural constants at exponent `s` from `count` smooth samples per operator.
///
/// A row passes when every dissipation is positive and the largest ratio in
/// the second half of the samples is at most [`STABILITY_LIMIT`] times the
/// largest in the first half. The Laplacian row also requires `C_est` within
/// 10% of `1/π²`, the continuum Poincaré constant on the unit interval.
pub fn structural_battery(s: f64, count: usize, seed: u64, exec: Execution) -> Vec<CheckRow> {
    let g = Grid::new(0.0, 1.0, 63).expect("battery grid");
    let half = count / 2;
    battery_operators()
        .iter()
        .map(|op| {
            let gamma = op.structural_gamma().expect("decaying operator");
            let samples = smooth_samples(g, SampleFamily::for_operator(op), count, seed);
            let name = format!("structural {} (gamma={gamma}, s={s})", op_label(op));
            match estimate_structural_constant_with(op, s, gamma, &samples, exec) {
                Err(e) => CheckRow { name, samples: count, violations: count, detail: e.to_string(), pass: false },
                Ok(est) => {
                    let m1 = est.ratios[..half].iter().copied().fold(0.0, f64::max);
                    let m2 = est.ratios[half..].iter().copied().fold(0.0, f64::max);
                    let stability = m2 / m1;
                    let violations = est.ratios.iter().filter(|r| !r.is_finite()).count();
                    let mut pass = est.pass && stability <= STABILITY_LIMIT;
                    let mut detail = format!("C_est = {:.6e}, second/first half = {stability:.4}", est.c_est);
                    if matches!(op, Operator::Laplacian) && s == 2.0 {
                        let rel = est.c_est * std::f64::consts::PI.powi(2) - 1.0;
                        let _ = write!(detail, ", C_est pi^2 - 1 = {rel:+.4}");
                        pass &= rel.abs() <= 0.1;
                    }
                    CheckRow { name, samples: count, violations, detail, pass }
                }
            }
        })
        .collect()
}

/// Residual checks for mixed power barriers with `u₀ = 1`, `ν = k = 1`.
///
/// Each `(α, γ)` pair is checked for `λ₁ ∈ {1, 1/2}` at eight times on both
/// sides of the switching time.
pub fn barrier_battery(alphas: &[f64], gammas: &[f64], exec: Execution) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    for &alpha in alphas {
        for &gamma in gammas {
            for lambda1 in [1.0, 0.5] {
                let name = format!("barrier mixed-power (alpha={alpha}, gamma={gamma}, lambda1={lambda1})");
                let res = (|| -> Result<_> {
                    let b = mixed_power_barrier(1.0, alpha, gamma, 1.0)?;
                    let spec = MixedDerivative::from_lambda1(lambda1, alpha)?;
                    let t0 = b.t0();
                    let times: Vec<f64> = [0.1, 0.3, 0.6, 0.9, 1.2, 2.0, 5.0, 20.0].iter().map(|f| f * t0).collect();
                    verify_supersolution_with(&b, &spec, 1.0, gamma, &times, exec)
                })();
                rows.push(match res {
                    Ok(c) => CheckRow {
                        name,
                        samples: c.residuals.len(),
                        violations: c.residuals.iter().filter(|r| **r < 0.0).count(),
                        detail: format!("min r/(k w^gamma) = {:+.4e} at t = {:.4e}", c.min_relative, c.worst_time),
                        pass: c.pass,
                    },
                    Err(e) => CheckRow { name, samples: 0, violations: 0, detail: e.to_string(), pass: false },
                });
            }
        }
    }
    rows
}

/// The full battery configured by `cfg`.
pub fn verify_battery(cfg: &VerifyConfig, seed: u64, exec: Execution) -> Vec<CheckRow> {
    let mut rows: Vec<CheckRow> = Inequality::ALL
        .iter()
        .map(|&k| {
            inequality_sweep(k, cfg.samples, seed, exec).unwrap_or_else(|e| CheckRow {
                name: k.name().into(),
                samples: cfg.samples,
                violations: 0,
                detail: e.to_string(),
                pass: false,
            })
        })
        .collect();
    rows.extend(structural_battery(cfg.s, cfg.structural_samples, seed, exec));
    rows.extend(barrier_battery(&cfg.barrier_alpha, &cfg.barrier_gamma, exec));
    rows
}

/// Fixed-width PASS/FAIL table.
pub fn format_table(rows: &[CheckRow]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(5).max(5);
    let mut out = format!("{:<width$}  {:>8}  {:>10}  verdict  detail\n", "check", "samples", "violations");
    for r in rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>8}  {:>10}  {:<7}  {}",
            r.name,
            r.samples,
            r.violations,
            if r.pass { "PASS" } else { "FAIL" },
            r.detail
        );
    }
    out
}
