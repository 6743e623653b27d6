//! Time stepping for `(λ₁ ∂ₜ^α + λ₂ ∂ₜ) u + N[u] = 0`.
//!
//! All schemes keep the full L1 history (memory cost `O(MN)`, work `O(M²N)`)
//! and use the `t^α` starting correction from [`crate::frac_time`] unless it is
//! switched off. Writing `a = λ₁ dt^{-α}/Γ(2-α) + λ₂/dt`, step `m` reads
//!
//! ```text
//! a (u_m - u_{m-1}) + λ₁ dt^{-α}/Γ(2-α) Σ_{k≥1} b_k (u_{m-k} - u_{m-k-1}) + N[·] = 0
//! ```
//!
//! with `N[u_{m-1}]` for [`Scheme::ExplicitL1`] and `N[u_m]` for
//! [`Scheme::SemiImplicitL1`]. Linear operators are solved with a cached LU.
//! The Kirchhoff coefficient `m(·)` is resolved at `u_m` by a scalar equation
//! in the eigenbasis of the base operator, and the porous step uses Newton's
//! method started from the solve with the mobility frozen at `u_{m-1}`. Lagging
//! either coefficient lets the memory term push the norm back up after a
//! strongly damped step.
//! [`Scheme::CrankNicolson`] is the unitary Cayley step for the Schrödinger
//! control with `λ₁ = 0`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use statrs::function::gamma::gamma;

use crate::error::{param, Error, Result};
use crate::frac_time::{l1_start_correction, l1_weights, MixedDerivative};
use crate::grid::{lebesgue_norm, GridFunction, C64};
use crate::operators::Operator;
use crate::parallel::Execution;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    ExplicitL1,
    SemiImplicitL1,
    CrankNicolson,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::ExplicitL1 => "explicit",
            Scheme::SemiImplicitL1 => "semi-implicit",
            Scheme::CrankNicolson => "crank-nicolson",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolveProblem {
    pub op: Operator,
    pub deriv: MixedDerivative,
    pub u0: GridFunction,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    /// Norm exponents recorded at every step.
    pub tracked_s: Vec<f64>,
    pub start_correction: bool,
}

impl EvolveProblem {
    pub fn new(op: Operator, deriv: MixedDerivative, u0: GridFunction, dt: f64, t_end: f64, scheme: Scheme) -> Self {
        EvolveProblem { op, deriv, u0, dt, t_end, scheme, tracked_s: vec![2.0], start_correction: true }
    }

    pub fn with_norms(mut self, s: &[f64]) -> Self {
        self.tracked_s = s.to_vec();
        self
    }
}

/// Norm history and snapshots of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub tracked_s: Vec<f64>,
    /// `norms[k][m] = ‖u(t_m)‖_{s_k}`.
    pub norms: Vec<Vec<f64>>,
    /// At most 50 states, roughly every `T/50`, first and last included.
    pub snapshots: Vec<(f64, GridFunction)>,
    /// Smallest real part seen over the run (positivity diagnostics).
    pub min_real: f64,
}

impl Trajectory {
    pub fn norm_series(&self, s: f64) -> Option<&[f64]> {
        self.tracked_s.iter().position(|&x| x == s).map(|k| self.norms[k].as_slice())
    }

    pub fn final_state(&self) -> &GridFunction {
        &self.snapshots.last().expect("at least one snapshot").1
    }

    /// Steps where a tracked norm grew by more than `slack`, as `(step, s, increase)`.
    pub fn monotonicity_violations(&self, slack: f64) -> Vec<(usize, f64, f64)> {
        let mut out = Vec::new();
        for (k, series) in self.norms.iter().enumerate() {
            for m in 1..series.len() {
                let inc = series[m] - series[m - 1];
                if inc > slack {
                    out.push((m, self.tracked_s[k], inc));
                }
            }
        }
        out
    }
}

pub fn evolve(p: &EvolveProblem) -> Result<Trajectory> {
    evolve_with(p, Execution::default())
}

/// Linear solver for the implicit part of a step.
enum Implicit {
    None,
    /// Fixed matrix; LU factors for the first-step and regular coefficients.
    Fixed { m: DMatrix<C64>, first: Option<nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>>, rest: Option<nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>> },
    /// `coef(u) · B` with `B` symmetric, solved in the eigenbasis of `B`.
    Scaled { vecs: DMatrix<f64>, vals: DVector<f64> },
    /// Porous step, solved by Newton's method.
    Porous,
}

fn validate(p: &EvolveProblem) -> Result<usize> {
    p.op.validate()?;
    if p.op.requires_real() && !p.u0.is_real() {
        return Err(Error::RealRequired(format!("{} needs a real initial state", p.op.name())));
    }
    if !(p.dt > 0.0 && p.dt.is_finite() && p.t_end >= 0.0 && p.t_end.is_finite()) {
        return param(format!("need dt > 0 and t_end >= 0, got dt={}, t_end={}", p.dt, p.t_end));
    }
    if p.tracked_s.is_empty() {
        return param("no norms to track");
    }
    if let Some(s) = p.tracked_s.iter().find(|s| !(**s >= 1.0)) {
        return param(format!("norm exponent {s} is below 1"));
    }
    let schrodinger = matches!(p.op, Operator::SchrodingerControl { .. });
    match p.scheme {
        Scheme::CrankNicolson if !schrodinger => {
            return param("Crank-Nicolson is only provided for the Schrödinger control");
        }
        Scheme::CrankNicolson if p.deriv.lambda1 != 0.0 => {
            return param("Crank-Nicolson needs lambda1 = 0");
        }
        Scheme::ExplicitL1 | Scheme::SemiImplicitL1 if schrodinger => {
            return param("the Schrödinger control is conservative; use Crank-Nicolson");
        }
        _ => {}
    }
    Ok((p.t_end / p.dt - 1e-9).ceil().max(0.0) as usize)
}

/// Solves `c = m0 + b κ h Σ λ_k |r_k|² / (a + c λ_k)²` for the implicit
/// Kirchhoff coefficient, given the right-hand side `r` in the eigenbasis.
///
/// The residual is increasing and concave in `c`: from the upper starting
/// point the first Newton step lands below the root, after which the iterates
/// increase monotonically to it.
const NEWTON_MAX: usize = 50;
const NEWTON_TOL: f64 = 1e-12;

/// Solves `a u + N[u] = r` for the porous operator by damped Newton,
/// starting from the step with the mobility frozen at `prev`.
fn porous_newton(op: &Operator, prev: &GridFunction, a: f64, r: &DVector<f64>, step: usize) -> Result<Vec<C64>> {
    let g = *prev.grid();
    let n = g.len();
    let singular = || Error::Stability(format!("singular step matrix at step {step}"));
    let to_fn = |x: &DVector<f64>| {
        GridFunction::from_real(g, x.as_slice()).map_err(|_| Error::Stability(format!("non-finite state at step {step}")))
    };
    let residual = |u: &GridFunction, x: &DVector<f64>| -> Result<DVector<f64>> {
        let nu = op.apply_with(u, Execution::Sequential)?;
        Ok(DVector::from_iterator(n, x.iter().zip(nu.values()).zip(r.iter()).map(|((xi, ni), ri)| a * xi + ni.re - ri)))
    };
    let frozen = op.porous_frozen_matrix(prev).expect("porous matrix");
    let mut x = (DMatrix::<f64>::identity(n, n) * a + frozen).lu().solve(r).ok_or_else(singular)?;
    let mut u = to_fn(&x)?;
    let mut res = residual(&u, &x)?;
    for _ in 0..NEWTON_MAX {
        let jac = DMatrix::<f64>::identity(n, n) * a + op.porous_jacobian(&u).expect("porous jacobian");
        let dx = jac.lu().solve(&res).ok_or_else(singular)?;
        let peak = x.amax();
        let mut lam = 1.0;
        loop {
            let trial = &x - &dx * lam;
            let tu = to_fn(&trial)?;
            let tres = residual(&tu, &trial)?;
            if tres.norm() <= res.norm() || lam < 1e-4 {
                (x, u, res) = (trial, tu, tres);
                break;
            }
            lam *= 0.5;
        }
        if lam * dx.amax() <= NEWTON_TOL * peak.max(1e-300) {
            return Ok(u.into_values());
        }
    }
    Err(Error::Convergence { step, detail: "porous Newton iteration".into() })
}

fn kirchhoff_coefficient(op: &Operator, h: f64, a: f64, lambdas: &[f64], weights: &[f64]) -> Option<f64> {
    let (m0, b, kappa) = op.kirchhoff_coefficients()?;
    let bk = b * kappa * h;
    let energy = |c: f64| -> (f64, f64) {
        let mut e = 0.0;
        let mut de = 0.0;
        for (l, w) in lambdas.iter().zip(weights) {
            let d = a + c * l;
            e += l * w / (d * d);
            de -= 2.0 * l * l * w / (d * d * d);
        }
        (e, de)
    };
    let mut lo = m0;
    let mut c = m0 + bk * energy(m0).0;
    for _ in 0..200 {
        let (e, de) = energy(c);
        let f = c - m0 - bk * e;
        if f.abs() <= 1e-15 * c.max(1e-300) {
            return Some(c);
        }
        if f < 0.0 {
            lo = c;
        }
        let step = f / (1.0 - bk * de);
        let next = c - step;
        c = if next.is_finite() && next >= lo { next } else { 0.5 * (lo + c) };
        if step.abs() <= 1e-15 * c.max(1e-300) {
            return Some(c);
        }
    }
    None
}

pub fn evolve_with(p: &EvolveProblem, exec: Execution) -> Result<Trajectory> {
    let steps = validate(p)?;
    let g = *p.u0.grid();
    let n = g.len();
    let d = p.deriv;
    let alpha = d.alpha;
    let c_l1 = d.lambda1 * d.l1_coefficient(p.dt);
    let a = c_l1 + d.lambda2 / p.dt;
    let memory = d.lambda1 > 0.0;
    let use_corr = memory && p.start_correction;
    let a_first = if use_corr {
        d.lambda1 * p.dt.powf(-alpha) * gamma(1.0 + alpha) + d.lambda2 / p.dt
    } else {
        a
    };
    let corr = if use_corr { l1_start_correction(alpha, steps, exec) } else { Vec::new() };
    let corr_scale = d.lambda1 * p.dt.powf(-alpha);
    let b = if memory { l1_weights(alpha, steps) } else { Vec::new() };

    if p.scheme == Scheme::ExplicitL1 && steps > 0 {
        let rho = p.op.spectral_radius_bound(&p.u0)?;
        let ratio = rho / a.min(a_first);
        if ratio > 0.9 {
            return param(format!(
                "explicit step needs spectral radius / step coefficient <= 0.9, got {ratio:.3}; reduce dt"
            ));
        }
    }

    let mut implicit = match (p.scheme, &p.op) {
        (Scheme::ExplicitL1, _) => Implicit::None,
        (_, Operator::PorousMedium { .. }) => Implicit::Porous,
        (_, Operator::Kirchhoff { .. } | Operator::FracKirchhoff { .. }) => {
            let (_, base) = p.op.kirchhoff_parts(&p.u0).expect("Kirchhoff parts");
            let eig = SymmetricEigen::new(base);
            Implicit::Scaled { vecs: eig.eigenvectors, vals: eig.eigenvalues }
        }
        _ => Implicit::Fixed { m: p.op.matrix(&g)?, first: None, rest: None },
    };
    // Crank-Nicolson: (I/dt + M/2) u_m = (I/dt - M/2) u_{m-1}
    let cn = if p.scheme == Scheme::CrankNicolson {
        let m = p.op.matrix(&g)?;
        let id = DMatrix::<C64>::identity(n, n);
        let lhs = (&id * C64::new(1.0 / p.dt, 0.0) + &m * C64::new(0.5, 0.0)).lu();
        let rhs = &id * C64::new(1.0 / p.dt, 0.0) - &m * C64::new(0.5, 0.0);
        Some((lhs, rhs))
    } else {
        None
    };

    let snap_every = steps.div_ceil(49).max(1);
    let mut min_real = p.u0.real_parts().into_iter().fold(f64::INFINITY, f64::min);
    let mut t = Vec::with_capacity(steps + 1);
    let mut norms: Vec<Vec<f64>> = vec![Vec::with_capacity(steps + 1); p.tracked_s.len()];
    let mut snapshots = vec![(0.0, p.u0.clone())];
    let record = |u: &GridFunction, norms: &mut Vec<Vec<f64>>| -> Result<()> {
        for (k, &s) in p.tracked_s.iter().enumerate() {
            norms[k].push(lebesgue_norm(u, s)?);
        }
        Ok(())
    };
    t.push(0.0);
    record(&p.u0, &mut norms)?;

    let mut diffs: Vec<Vec<C64>> = Vec::with_capacity(if memory { steps } else { 0 });
    let mut prev = p.u0.clone();
    let zero = C64::new(0.0, 0.0);
    for m in 1..=steps {
        let next_vals: Vec<C64> = if let Some((lu, rhs_m)) = &cn {
            let r = rhs_m * DVector::from_column_slice(prev.values());
            lu.solve(&r)
                .ok_or_else(|| Error::Stability(format!("singular Crank-Nicolson system at step {m}")))?
                .iter()
                .copied()
                .collect()
        } else {
            let coef = if m == 1 { a_first } else { a };
            let mut rhs: Vec<C64> = prev.values().iter().map(|v| v * coef).collect();
            if memory && m >= 2 {
                let mut hist = vec![zero; n];
                let chunk = exec.chunk_len(n);
                exec.chunks_mut(&mut hist, chunk, |off, out| {
                    let len = out.len();
                    for k in 1..m {
                        let dk = &diffs[m - k - 1];
                        let bk = b[k];
                        for (o, dv) in out.iter_mut().zip(&dk[off..off + len]) {
                            *o += dv * bk;
                        }
                    }
                });
                let ck = if use_corr { corr_scale * corr[m] } else { 0.0 };
                for i in 0..n {
                    rhs[i] -= hist[i] * c_l1 + diffs[0][i] * ck;
                }
            }
            match &mut implicit {
                Implicit::None => {
                    let nu = p.op.apply_with(&prev, exec)?;
                    rhs.iter().zip(nu.values()).map(|(r, v)| (r - v) / coef).collect()
                }
                Implicit::Fixed { m: mat, first, rest } => {
                    let slot = if m == 1 { first } else { rest };
                    if slot.is_none() {
                        let sys = DMatrix::<C64>::identity(n, n) * C64::new(coef, 0.0) + &*mat;
                        *slot = Some(sys.lu());
                    }
                    slot.as_ref()
                        .expect("factored")
                        .solve(&DVector::from_vec(rhs))
                        .ok_or_else(|| Error::Stability(format!("singular step matrix at step {m}")))?
                        .iter()
                        .copied()
                        .collect()
                }
                Implicit::Scaled { vecs, vals } => {
                    let (vecs, vals) = (&*vecs, &*vals);
                    let re = vecs.tr_mul(&DVector::from_iterator(n, rhs.iter().map(|z| z.re)));
                    let im = vecs.tr_mul(&DVector::from_iterator(n, rhs.iter().map(|z| z.im)));
                    let weights: Vec<f64> = re.iter().zip(im.iter()).map(|(a, b)| a * a + b * b).collect();
                    let c = kirchhoff_coefficient(&p.op, g.h(), coef, vals.as_slice(), &weights)
                        .ok_or_else(|| Error::Convergence { step: m, detail: "Kirchhoff coefficient iteration".into() })?;
                    let scale = |y: DVector<f64>| {
                        let mut y = y;
                        for (yi, li) in y.iter_mut().zip(vals.iter()) {
                            *yi /= coef + c * li;
                        }
                        vecs * y
                    };
                    let (xr, xi) = (scale(re), scale(im));
                    xr.iter().zip(xi.iter()).map(|(r, i)| C64::new(*r, *i)).collect()
                }
                Implicit::Porous => {
                    let r = DVector::from_iterator(n, rhs.iter().map(|z| z.re));
                    porous_newton(&p.op, &prev, coef, &r, m)?
                }
            }
        };
        let next = GridFunction::new(g, next_vals)
            .map_err(|_| Error::Stability(format!("non-finite state at step {m}")))?;
        if memory {
            diffs.push(next.values().iter().zip(prev.values()).map(|(x, y)| x - y).collect());
        }
        let tm = m as f64 * p.dt;
        t.push(tm);
        record(&next, &mut norms)?;
        min_real = next.values().iter().map(|z| z.re).fold(min_real, f64::min);
        if m % snap_every == 0 || m == steps {
            if snapshots.len() == 50 {
                snapshots.pop();
            }
            snapshots.push((tm, next.clone()));
        }
        prev = next;
    }
    Ok(Trajectory { t, tracked_s: p.tracked_s.clone(), norms, snapshots, min_real })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    fn sine(n: usize) -> GridFunction {
        let g = Grid::new(0.0, 1.0, n).unwrap();
        GridFunction::from_real_fn(g, |x| (PI * x).sin()).unwrap()
    }

    #[test]
    fn scheme_operator_pairing() {
        let d = MixedDerivative::new(0.0, 1.0, 0.5).unwrap();
        let p = EvolveProblem::new(Operator::Laplacian, d, sine(15), 1e-3, 0.1, Scheme::CrankNicolson);
        assert!(evolve(&p).is_err());
        let s = Operator::SchrodingerControl { potential: Default::default() };
        let p = EvolveProblem::new(s, d, sine(15), 1e-3, 0.1, Scheme::SemiImplicitL1);
        assert!(evolve(&p).is_err());
    }

    #[test]
    fn explicit_cfl_rejected() {
        let d = MixedDerivative::new(0.0, 1.0, 0.5).unwrap();
        let p = EvolveProblem::new(Operator::Laplacian, d, sine(63), 1e-2, 1.0, Scheme::ExplicitL1);
        assert!(matches!(evolve(&p), Err(Error::Parameter(_))));
    }

    #[test]
    fn zero_horizon_keeps_initial_state() {
        let d = MixedDerivative::new(1.0, 0.0, 0.5).unwrap();
        let p = EvolveProblem::new(Operator::Laplacian, d, sine(15), 1e-3, 0.0, Scheme::SemiImplicitL1);
        let tr = evolve(&p).unwrap();
        assert_eq!(tr.t, vec![0.0]);
        assert_eq!(tr.norms[0][0], lebesgue_norm(&p.u0, 2.0).unwrap());
    }

    #[test]
    fn snapshots_are_capped() {
        let d = MixedDerivative::new(0.5, 0.5, 0.5).unwrap();
        let p = EvolveProblem::new(Operator::Laplacian, d, sine(15), 1e-3, 0.237, Scheme::SemiImplicitL1);
        let tr = evolve(&p).unwrap();
        assert!(tr.snapshots.len() <= 50);
        assert_eq!(tr.snapshots.last().unwrap().0, *tr.t.last().unwrap());
        assert_eq!(tr.t.len(), 238);
    }
}
