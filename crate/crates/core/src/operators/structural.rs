//! Structural constants `C` in `‖u‖_s^{s-1+γ} ≤ C h Σ |u|^{s-2} Re(ū N[u])`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{param, Result};
use crate::grid::{lebesgue_norm, Grid, GridFunction, C64};
use crate::operators::{dissipation_with, Field, Operator};
use crate::parallel::Execution;

/// Kind of random smooth sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleFamily {
    Real,
    NonNegative,
    Complex,
}

impl SampleFamily {
    /// Family an operator's structural inequality is stated for.
    pub fn for_operator(op: &Operator) -> Self {
        match op {
            Operator::PorousMedium { .. } => SampleFamily::NonNegative,
            Operator::Kirchhoff { .. } | Operator::FracKirchhoff { .. } => SampleFamily::Real,
            Operator::Laplacian | Operator::FracLaplacian { .. } => SampleFamily::Real,
            _ => SampleFamily::Complex,
        }
    }
}

const MODES: usize = 8;

fn sine_series(g: &Grid, c: &[f64], x: f64) -> f64 {
    let w = std::f64::consts::PI * (x - g.a()) / g.width();
    c.iter()
        .enumerate()
        .map(|(k, ck)| {
            let k1 = (k + 1) as f64;
            ck / (k1 * k1) * (k1 * w).sin()
        })
        .sum()
}

/// Seeded random smooth functions vanishing at `a` and `b`.
///
/// Each sample is a sine series with `8` modes, coefficients uniform in
/// `[-1, 1]` damped by `1/k²`, times an amplitude log-uniform in `[0.1, 10]`.
/// Non-negative samples square a real series.
pub fn smooth_samples(g: Grid, family: SampleFamily, count: usize, seed: u64) -> Vec<GridFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let amp = 10f64.powf(rng.gen_range(-1.0..1.0));
            let re: Vec<f64> = (0..MODES).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let im: Vec<f64> = (0..MODES).map(|_| rng.gen_range(-1.0..1.0)).collect();
            GridFunction::from_fn(g, |x| {
                let a = sine_series(&g, &re, x);
                match family {
                    SampleFamily::Real => C64::new(amp * a, 0.0),
                    SampleFamily::NonNegative => C64::new(amp * a * a, 0.0),
                    SampleFamily::Complex => C64::new(amp * a, amp * sine_series(&g, &im, x)),
                }
            })
            .expect("finite sample")
        })
        .collect()
}

/// Random bounded field with a constant part and two cosine modes.
pub fn random_field<R: Rng>(rng: &mut R) -> Field {
    Field {
        constant: rng.gen_range(-3.0..3.0),
        modes: (0..2)
            .map(|_| {
                (
                    rng.gen_range(-3.0..3.0),
                    rng.gen_range(0.0..4.0 * std::f64::consts::PI),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect(),
    }
}

/// Result of [`estimate_structural_constant`].
#[derive(Clone, Debug, PartialEq)]
pub struct StructuralEstimate {
    /// Largest ratio over the samples with positive dissipation.
    pub c_est: f64,
    /// `‖u‖_s^{s-1+γ} / dissipation` per sample, in sample order.
    pub ratios: Vec<f64>,
    /// Every dissipation was strictly positive.
    pub pass: bool,
    /// First sample with non-positive dissipation.
    pub counterexample: Option<usize>,
}

/// Checks that `s` lies in the range where the operator's decay theorem holds.
///
/// `dim` is the space dimension the theorem is read in; the grids here are 1-D,
/// but the bound is kept explicit so the range can be audited for other `n`.
pub fn check_exponent_admissible(op: &Operator, s: f64, dim: usize) -> Result<()> {
    if !(s >= 1.0 && s.is_finite()) {
        return param(format!("s must be finite and >= 1, got {s}"));
    }
    if dim == 0 {
        return param("dimension must be positive");
    }
    let n = dim as f64;
    match op {
        Operator::PorousMedium { .. } if s <= 1.0 => {
            param("the porous estimate needs s > 1")
        }
        Operator::Kirchhoff { m0, .. } if *m0 == 0.0 && n > 4.0 && s > 2.0 * n / (n - 4.0) => {
            param(format!("degenerate Kirchhoff in dimension {dim} needs s <= {}", 2.0 * n / (n - 4.0)))
        }
        Operator::FracKirchhoff { sigma, m0, .. }
            if *m0 == 0.0 && n > 4.0 * sigma && s > 2.0 * n / (n - 4.0 * sigma) =>
        {
            param(format!(
                "degenerate fractional Kirchhoff in dimension {dim} needs s <= {}",
                2.0 * n / (n - 4.0 * sigma)
            ))
        }
        Operator::SchrodingerControl { .. } => {
            param("the Schrödinger control has no structural inequality")
        }
        _ => Ok(()),
    }
}

/// `max ‖u‖_s^{s-1+γ} / (h Σ |u|^{s-2} Re(ū N[u]))` over the samples.
pub fn estimate_structural_constant(
    op: &Operator,
    s: f64,
    gamma: f64,
    samples: &[GridFunction],
) -> Result<StructuralEstimate> {
    estimate_structural_constant_with(op, s, gamma, samples, Execution::default())
}

pub fn estimate_structural_constant_with(
    op: &Operator,
    s: f64,
    gamma: f64,
    samples: &[GridFunction],
    exec: Execution,
) -> Result<StructuralEstimate> {
    if samples.is_empty() {
        return param("no samples");
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return param(format!("gamma must be positive, got {gamma}"));
    }
    check_exponent_admissible(op, s, 1)?;
    let per: Vec<Result<(f64, f64)>> = exec.map_slice(samples, |u| {
        let norm = lebesgue_norm(u, s)?;
        if norm == 0.0 {
            return param("zero sample");
        }
        let d = dissipation_with(op, u, s, Execution::Sequential)?;
        Ok((norm.powf(s - 1.0 + gamma), d))
    });
    let mut ratios = Vec::with_capacity(samples.len());
    let mut counterexample = None;
    let mut c_est: f64 = 0.0;
    for (i, r) in per.into_iter().enumerate() {
        let (num, d) = r?;
        if d > 0.0 {
            let q = num / d;
            c_est = c_est.max(q);
            ratios.push(q);
        } else {
            counterexample.get_or_insert(i);
            ratios.push(f64::INFINITY);
        }
    }
    Ok(StructuralEstimate { c_est, ratios, pass: counterexample.is_none(), counterexample })
}
