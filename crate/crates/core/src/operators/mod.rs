//! Discretized spatial operators `N[u]` with zero exterior data.
//!
//! | variant | continuum operator | structural γ |
//! |---|---|---|
//! | `Laplacian` | `-Δu` | 1 |
//! | `FracLaplacian` | `PV ∫ (u(x) - u(y))/|x-y|^{1+2σ} dy` | 1 |
//! | `PorousMedium` | `-∇·(u ∇𝒦u)`, `𝒦 = c/(|y|²+ε²)^{(1-2σ)/2} *` | 2 |
//! | `Kirchhoff` | `m(‖∇u‖²)(-Δu)`, `m(ξ) = m₀ + bξ` | 1, or 3 if `m₀ = 0` |
//! | `FracKirchhoff` | `M(‖u‖_Z²) L_σ u`, `M(ξ) = m₀ + bξ` | 1, or 3 if `m₀ = 0` |
//! | `Magnetic` | `-(∇ - iA)²u` | 1 |
//! | `FracMagnetic` | `∫ (u(x) - e^{i(x-y)A((x+y)/2)}u(y))/|x-y|^{1+2σ} dy` | 1 |
//! | `SchrodingerControl` | `-i(Δ + V)u` | none |
//!
//! Nonlocal sums run over grid offsets `1 ≤ |m| ≤ n + 1` with weight
//! `h/|mh|^{1+2σ}`, exterior nodes contributing zero data, plus the exact
//! far-field tail `∫_{|y| > R} |y|^{-1-2σ} dy = R^{-2σ}/σ`, `R = (n + 3/2) h`.
//!
//! The classical magnetic operator uses link phases `e^{∓ihA(x_{j±1/2})}`, the
//! nearest-neighbour case of the nonlocal phase in `FracMagnetic`. Expanded it
//! is the centered discretization of `-Δu + |A|²u - iA·∇u - ∇·(iAu)`, and it
//! satisfies the discrete diamagnetic inequality exactly.

mod inequalities;
mod structural;

pub use inequalities::{
    check_diamagnetic, check_diamagnetic_tol, check_magnetic_quadratic, check_monotone_pairing,
    check_power_ratio_bound, lap_exponent, power_ratio_g, power_ratio_sup, DiamagneticCheck,
    DiamagneticVariant,
};
pub use structural::{
    check_exponent_admissible, estimate_structural_constant, estimate_structural_constant_with,
    random_field, smooth_samples, SampleFamily, StructuralEstimate,
};

use nalgebra::DMatrix;

use crate::error::{param, Error, Result};
use crate::grid::{dirichlet_energy, Grid, GridFunction, C64};
use crate::parallel::Execution;

/// Smooth real coefficient field `c + Σ aₖ cos(ωₖ x + φₖ)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Field {
    pub constant: f64,
    /// `(amplitude, angular frequency, phase)` triples.
    pub modes: Vec<(f64, f64, f64)>,
}

impl Field {
    pub fn constant(c: f64) -> Self {
        Field { constant: c, modes: Vec::new() }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.constant + self.modes.iter().map(|&(a, w, p)| a * (w * x + p).cos()).sum::<f64>()
    }

    fn is_finite(&self) -> bool {
        self.constant.is_finite()
            && self.modes.iter().all(|&(a, w, p)| a.is_finite() && w.is_finite() && p.is_finite())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Operator {
    Laplacian,
    FracLaplacian { sigma: f64 },
    /// `epsilon = None` uses the grid spacing `h`.
    PorousMedium { sigma: f64, epsilon: Option<f64>, c_kernel: f64 },
    Kirchhoff { m0: f64, b: f64 },
    FracKirchhoff { sigma: f64, m0: f64, b: f64 },
    Magnetic { field: Field },
    FracMagnetic { sigma: f64, field: Field },
    SchrodingerControl { potential: Field },
}

impl Operator {
    pub fn name(&self) -> &'static str {
        match self {
            Operator::Laplacian => "laplacian",
            Operator::FracLaplacian { .. } => "frac-laplacian",
            Operator::PorousMedium { .. } => "porous",
            Operator::Kirchhoff { .. } => "kirchhoff",
            Operator::FracKirchhoff { .. } => "frac-kirchhoff",
            Operator::Magnetic { .. } => "magnetic",
            Operator::FracMagnetic { .. } => "frac-magnetic",
            Operator::SchrodingerControl { .. } => "schrodinger",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sig = |s: f64| -> Result<()> {
            if !(s > 0.0 && s < 1.0) {
                return param(format!("sigma must lie in (0, 1), got {s}"));
            }
            Ok(())
        };
        let kirch = |m0: f64, b: f64| -> Result<()> {
            if !(m0 >= 0.0 && b >= 0.0 && m0.is_finite() && b.is_finite()) {
                return param(format!("Kirchhoff coefficients must be >= 0, got m0={m0}, b={b}"));
            }
            if m0 == 0.0 && b == 0.0 {
                return param("Kirchhoff coefficient vanishes identically");
            }
            Ok(())
        };
        match self {
            Operator::Laplacian => Ok(()),
            Operator::FracLaplacian { sigma } => sig(*sigma),
            Operator::PorousMedium { sigma, epsilon, c_kernel } => {
                if !(*sigma > 0.0 && *sigma < 0.5) {
                    return param(format!("porous operator needs sigma in (0, 1/2), got {sigma}"));
                }
                if let Some(e) = epsilon {
                    if !(*e > 0.0 && e.is_finite()) {
                        return param(format!("epsilon must be positive, got {e}"));
                    }
                }
                if !(*c_kernel > 0.0 && c_kernel.is_finite()) {
                    return param(format!("kernel constant must be positive, got {c_kernel}"));
                }
                Ok(())
            }
            Operator::Kirchhoff { m0, b } => kirch(*m0, *b),
            Operator::FracKirchhoff { sigma, m0, b } => {
                sig(*sigma)?;
                kirch(*m0, *b)
            }
            Operator::Magnetic { field } => {
                if field.is_finite() {
                    Ok(())
                } else {
                    param("magnetic field must be finite")
                }
            }
            Operator::FracMagnetic { sigma, field } => {
                sig(*sigma)?;
                if field.is_finite() {
                    Ok(())
                } else {
                    param("magnetic field must be finite")
                }
            }
            Operator::SchrodingerControl { potential } => {
                if potential.is_finite() {
                    Ok(())
                } else {
                    param("potential must be finite")
                }
            }
        }
    }

    /// Exponent γ of the structural inequality, `None` for the Schrödinger control.
    pub fn structural_gamma(&self) -> Option<f64> {
        match self {
            Operator::Laplacian
            | Operator::FracLaplacian { .. }
            | Operator::Magnetic { .. }
            | Operator::FracMagnetic { .. } => Some(1.0),
            Operator::PorousMedium { .. } => Some(2.0),
            Operator::Kirchhoff { m0, .. } | Operator::FracKirchhoff { m0, .. } => {
                Some(if *m0 == 0.0 { 3.0 } else { 1.0 })
            }
            Operator::SchrodingerControl { .. } => None,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, Operator::Kirchhoff { m0, .. } | Operator::FracKirchhoff { m0, .. } if *m0 == 0.0)
    }

    pub fn requires_real(&self) -> bool {
        matches!(
            self,
            Operator::PorousMedium { .. } | Operator::Kirchhoff { .. } | Operator::FracKirchhoff { .. }
        )
    }

    /// True when `N` is linear in `u`.
    pub fn is_linear(&self) -> bool {
        !matches!(
            self,
            Operator::PorousMedium { .. } | Operator::Kirchhoff { .. } | Operator::FracKirchhoff { .. }
        )
    }

    pub fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        self.apply_with(u, Execution::default())
    }

    pub fn apply_with(&self, u: &GridFunction, exec: Execution) -> Result<GridFunction> {
        self.validate()?;
        if self.requires_real() && !u.is_real() {
            return Err(Error::RealRequired(format!("{} acts on real functions only", self.name())));
        }
        let g = *u.grid();
        let out = match self {
            Operator::Laplacian => neg_laplacian(u),
            Operator::FracLaplacian { sigma } => FracKernel::new(&g, *sigma).apply(u, exec),
            Operator::PorousMedium { .. } => {
                let k = self.porous_kernel(&g);
                porous_apply(u, &k, exec)
            }
            Operator::Kirchhoff { m0, b } => {
                let c = m0 + b * dirichlet_energy(u);
                neg_laplacian(u).into_iter().map(|z| z * c).collect()
            }
            Operator::FracKirchhoff { sigma, m0, b } => {
                let lu = FracKernel::new(&g, *sigma).apply(u, exec);
                let c = m0 + b * gagliardo_from(u, &lu);
                lu.into_iter().map(|z| z * c).collect()
            }
            Operator::Magnetic { field } => magnetic_apply(u, field),
            Operator::FracMagnetic { sigma, field } => {
                FracKernel::new(&g, *sigma).apply_magnetic(u, field, exec)
            }
            Operator::SchrodingerControl { potential } => {
                let lap = neg_laplacian(u);
                lap.iter()
                    .zip(u.values())
                    .enumerate()
                    .map(|(i, (l, v))| C64::i() * (l - v * potential.eval(g.x(i))))
                    .collect()
            }
        };
        GridFunction::new(g, out)
    }

    fn porous_kernel(&self, g: &Grid) -> Vec<f64> {
        match self {
            Operator::PorousMedium { sigma, epsilon, c_kernel } => {
                let eps = epsilon.unwrap_or(g.h());
                let beta = 0.5 - sigma;
                let h = g.h();
                (0..=g.len() + 1)
                    .map(|d| {
                        let y = d as f64 * h;
                        h * c_kernel * (y * y + eps * eps).powf(-beta)
                    })
                    .collect()
            }
            _ => unreachable!("porous kernel requested for {}", self.name()),
        }
    }

    /// Matrix of a linear operator on the interior nodes.
    pub fn matrix(&self, g: &Grid) -> Result<DMatrix<C64>> {
        self.validate()?;
        let n = g.len();
        let h2 = g.h() * g.h();
        let mut m = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        match self {
            Operator::Laplacian => {
                for i in 0..n {
                    m[(i, i)] = C64::new(2.0 / h2, 0.0);
                    if i + 1 < n {
                        m[(i, i + 1)] = C64::new(-1.0 / h2, 0.0);
                        m[(i + 1, i)] = C64::new(-1.0 / h2, 0.0);
                    }
                }
            }
            Operator::FracLaplacian { sigma } => {
                let k = FracKernel::new(g, *sigma);
                for i in 0..n {
                    for j in 0..n {
                        m[(i, j)] = C64::new(k.entry(i, j), 0.0);
                    }
                }
            }
            Operator::FracMagnetic { sigma, field } => {
                let k = FracKernel::new(g, *sigma);
                for i in 0..n {
                    for j in 0..n {
                        m[(i, j)] = if i == j {
                            C64::new(k.diag, 0.0)
                        } else {
                            -k.phase(g, field, i, j) * k.weight(i, j)
                        };
                    }
                }
            }
            Operator::Magnetic { field } => {
                let th = link_phases(g, field);
                for i in 0..n {
                    m[(i, i)] = C64::new(2.0 / h2, 0.0);
                    if i + 1 < n {
                        m[(i, i + 1)] = -C64::from_polar(1.0, -th[i + 1]) / h2;
                        m[(i + 1, i)] = -C64::from_polar(1.0, th[i + 1]) / h2;
                    }
                }
            }
            Operator::SchrodingerControl { potential } => {
                // -i(Δ + V) = i(-Δ - V)
                for i in 0..n {
                    m[(i, i)] = C64::i() * (2.0 / h2 - potential.eval(g.x(i)));
                    if i + 1 < n {
                        m[(i, i + 1)] = C64::i() * (-1.0 / h2);
                        m[(i + 1, i)] = C64::i() * (-1.0 / h2);
                    }
                }
            }
            _ => return param(format!("{} is nonlinear and has no fixed matrix", self.name())),
        }
        Ok(m)
    }

    /// Linear part of a Kirchhoff-type operator: `(coefficient at u, base matrix)`.
    pub(crate) fn kirchhoff_parts(&self, u: &GridFunction) -> Option<(f64, DMatrix<f64>)> {
        let g = *u.grid();
        match self {
            Operator::Kirchhoff { m0, b } => {
                let base = Operator::Laplacian.matrix(&g).ok()?.map(|z| z.re);
                Some((m0 + b * dirichlet_energy(u), base))
            }
            Operator::FracKirchhoff { sigma, m0, b } => {
                let k = FracKernel::new(&g, *sigma);
                let lu = k.apply(u, Execution::Sequential);
                let c = m0 + b * gagliardo_from(u, &lu);
                let n = g.len();
                Some((c, DMatrix::from_fn(n, n, |i, j| k.entry(i, j))))
            }
            _ => None,
        }
    }

    /// `(m0, b, κ)` with `m = m0 + b κ h uᵀ B u` for the base matrix `B` of [`Self::kirchhoff_parts`].
    pub(crate) fn kirchhoff_coefficients(&self) -> Option<(f64, f64, f64)> {
        match *self {
            Operator::Kirchhoff { m0, b } => Some((m0, b, 1.0)),
            Operator::FracKirchhoff { m0, b, .. } => Some((m0, b, 2.0)),
            _ => None,
        }
    }

    /// Porous operator with the mobility `u` frozen at `frozen`: `v ↦ -∇·(frozen ∇𝒦v)`.
    pub(crate) fn porous_frozen_matrix(&self, frozen: &GridFunction) -> Option<DMatrix<f64>> {
        if !matches!(self, Operator::PorousMedium { .. }) {
            return None;
        }
        let g = *frozen.grid();
        let n = g.len();
        let h2 = g.h() * g.h();
        let kv = self.porous_kernel(&g);
        let kp = |p: usize, j: usize| kv[(p as isize - (j as isize + 1)).unsigned_abs()];
        let uh = half_node_means(frozen);
        Some(DMatrix::from_fn(n, n, |i, j| {
            let right = uh[i + 1] * (kp(i + 2, j) - kp(i + 1, j));
            let left = uh[i] * (kp(i + 1, j) - kp(i, j));
            -(right - left) / h2
        }))
    }

    /// Jacobian of `u ↦ N[u]` for the porous operator, `N[u] = P(u) u` with
    /// `P` the frozen matrix of [`Self::porous_frozen_matrix`].
    ///
    /// The mobility enters through half-node means, so the extra term
    /// `v ↦ P(v) u` is tridiagonal.
    pub(crate) fn porous_jacobian(&self, u: &GridFunction) -> Option<DMatrix<f64>> {
        let mut jac = self.porous_frozen_matrix(u)?;
        let g = *u.grid();
        let n = g.len();
        let h2 = g.h() * g.h();
        let kv = self.porous_kernel(&g);
        let vals = u.real_parts();
        let pot: Vec<f64> = (0..n + 2)
            .map(|p| vals.iter().enumerate().map(|(j, v)| kv[(p as isize - (j as isize + 1)).unsigned_abs()] * v).sum())
            .collect();
        // potential differences across the n + 1 half nodes
        let dpot: Vec<f64> = (0..=n).map(|q| pot[q + 1] - pot[q]).collect();
        for i in 0..n {
            jac[(i, i)] -= 0.5 * (dpot[i + 1] - dpot[i]) / h2;
            if i + 1 < n {
                jac[(i, i + 1)] -= 0.5 * dpot[i + 1] / h2;
            }
            if i > 0 {
                jac[(i, i - 1)] += 0.5 * dpot[i] / h2;
            }
        }
        Some(jac)
    }

    /// Gershgorin bound on the spectral radius of `N` (or of its linearization) at `u`.
    pub fn spectral_radius_bound(&self, u: &GridFunction) -> Result<f64> {
        let g = *u.grid();
        let h2 = g.h() * g.h();
        Ok(match self {
            Operator::Laplacian | Operator::Magnetic { .. } => 4.0 / h2,
            Operator::FracLaplacian { sigma } | Operator::FracMagnetic { sigma, .. } => {
                2.0 * FracKernel::new(&g, *sigma).diag
            }
            Operator::SchrodingerControl { potential } => {
                let vmax = g.nodes().iter().map(|&x| potential.eval(x).abs()).fold(0.0, f64::max);
                4.0 / h2 + vmax
            }
            Operator::Kirchhoff { .. } | Operator::FracKirchhoff { .. } => {
                let (c, base) = self.kirchhoff_parts(u).expect("Kirchhoff parts");
                c * row_sum_bound(&base)
            }
            Operator::PorousMedium { .. } => {
                let p = self.porous_frozen_matrix(u).expect("porous matrix");
                // the mobility also depends on u; doubling covers that term
                2.0 * row_sum_bound(&p)
            }
        })
    }
}

fn row_sum_bound(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// `(-Δ_h u)_i = (2u_i - u_{i+1} - u_{i-1})/h²`.
pub(crate) fn neg_laplacian(u: &GridFunction) -> Vec<C64> {
    let h2 = u.grid().h() * u.grid().h();
    (0..u.values().len() as isize)
        .map(|i| (u.at(i) * 2.0 - u.at(i + 1) - u.at(i - 1)) / h2)
        .collect()
}

/// Averages `(ũ_q + ũ_{q+1})/2` on the `n + 1` half nodes, zero boundary data.
fn half_node_means(u: &GridFunction) -> Vec<f64> {
    (-1..u.values().len() as isize)
        .map(|i| 0.5 * (u.at(i).re + u.at(i + 1).re))
        .collect()
}

/// Link phases `θ_q = h A(x_q + h/2)` for the `n + 1` links, `x_0 = a`.
fn link_phases(g: &Grid, field: &Field) -> Vec<f64> {
    (0..=g.len()).map(|q| g.h() * field.eval(g.a() + (q as f64 + 0.5) * g.h())).collect()
}

fn magnetic_apply(u: &GridFunction, field: &Field) -> Vec<C64> {
    let g = u.grid();
    let h2 = g.h() * g.h();
    let th = link_phases(g, field);
    (0..u.values().len())
        .map(|i| {
            let ii = i as isize;
            let right = C64::from_polar(1.0, -th[i + 1]) * u.at(ii + 1);
            let left = C64::from_polar(1.0, th[i]) * u.at(ii - 1);
            (u.at(ii) * 2.0 - right - left) / h2
        })
        .collect()
}

fn porous_apply(u: &GridFunction, kv: &[f64], exec: Execution) -> Vec<C64> {
    let g = u.grid();
    let n = g.len();
    let h = g.h();
    let vals = u.real_parts();
    // 𝒦u on nodes p = 0..=n+1
    let pot: Vec<f64> = exec.map_range(n + 2, |p| {
        (0..n).map(|j| kv[(p as isize - (j as isize + 1)).unsigned_abs()] * vals[j]).sum()
    });
    let uh = half_node_means(u);
    let flux: Vec<f64> = (0..=n).map(|q| uh[q] * (pot[q + 1] - pot[q]) / h).collect();
    (0..n).map(|i| C64::new(-(flux[i + 1] - flux[i]) / h, 0.0)).collect()
}

/// `‖u‖_Z² = 2 h Re Σ ū (L_σ u)` given `L_σ u`.
fn gagliardo_from(u: &GridFunction, lu: &[C64]) -> f64 {
    2.0 * u.grid().h() * u.values().iter().zip(lu).map(|(a, b)| (a.conj() * b).re).sum::<f64>()
}

/// Discrete Gagliardo seminorm `∬ |u(x) - u(y)|²/|x-y|^{1+2σ}` with the operator quadrature.
pub fn gagliardo_seminorm_sq(u: &GridFunction, sigma: f64) -> Result<f64> {
    Operator::FracLaplacian { sigma }.validate()?;
    let lu = FracKernel::new(u.grid(), sigma).apply(u, Execution::Sequential);
    Ok(gagliardo_from(u, &lu))
}

/// Weights of the nonlocal quadrature on a grid.
pub(crate) struct FracKernel {
    /// `w[m] = h/(mh)^{1+2σ}` for `m = 1..=n+1`; `w[0]` unused.
    w: Vec<f64>,
    /// `2 Σ w + tail`, the same for every interior node.
    diag: f64,
}

impl FracKernel {
    pub(crate) fn new(g: &Grid, sigma: f64) -> Self {
        let h = g.h();
        let reach = g.len() + 1;
        let mut w = vec![0.0; reach + 1];
        for (m, wm) in w.iter_mut().enumerate().skip(1) {
            *wm = h * (m as f64 * h).powf(-1.0 - 2.0 * sigma);
        }
        let r = (reach as f64 + 0.5) * h;
        let tail = r.powf(-2.0 * sigma) / sigma;
        let diag = 2.0 * w.iter().sum::<f64>() + tail;
        FracKernel { w, diag }
    }

    fn weight(&self, i: usize, j: usize) -> f64 {
        self.w[i.abs_diff(j)]
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag
        } else {
            -self.weight(i, j)
        }
    }

    fn phase(&self, g: &Grid, field: &Field, i: usize, j: usize) -> C64 {
        let (xi, xj) = (g.x(i), g.x(j));
        C64::from_polar(1.0, (xi - xj) * field.eval(0.5 * (xi + xj)))
    }

    pub(crate) fn apply(&self, u: &GridFunction, exec: Execution) -> Vec<C64> {
        let v = u.values();
        let n = v.len();
        exec.map_range(n, |i| {
            let mut acc = v[i] * self.diag;
            for (j, vj) in v.iter().enumerate() {
                if j != i {
                    acc -= vj * self.w[i.abs_diff(j)];
                }
            }
            acc
        })
    }

    fn apply_magnetic(&self, u: &GridFunction, field: &Field, exec: Execution) -> Vec<C64> {
        let g = *u.grid();
        let v = u.values();
        let n = v.len();
        exec.map_range(n, |i| {
            let mut acc = v[i] * self.diag;
            for (j, vj) in v.iter().enumerate() {
                if j != i {
                    acc -= self.phase(&g, field, i, j) * vj * self.w[i.abs_diff(j)];
                }
            }
            acc
        })
    }
}

/// `h Σ |u|^{s-2} Re(ū N[u])`, with zero weight at nodes where `u = 0`.
pub fn dissipation(op: &Operator, u: &GridFunction, s: f64) -> Result<f64> {
    dissipation_with(op, u, s, Execution::default())
}

pub fn dissipation_with(op: &Operator, u: &GridFunction, s: f64, exec: Execution) -> Result<f64> {
    if !(s >= 1.0 && s.is_finite()) {
        return param(format!("dissipation exponent must be finite and >= 1, got {s}"));
    }
    let nu = op.apply_with(u, exec)?;
    Ok(weighted_pairing(u.values(), nu.values(), s) * u.grid().h())
}

/// `Σ |u|^{s-2} Re(ū v)` skipping zeros of `u`.
pub(crate) fn weighted_pairing(u: &[C64], v: &[C64], s: f64) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| {
            let r = a.norm();
            if r == 0.0 {
                0.0
            } else {
                r.powf(s - 2.0) * (a.conj() * b).re
            }
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(0.0, 1.0, 63).unwrap()
    }

    proptest::proptest! {
        #[test]
        fn pairing_with_itself_is_the_norm_power(
            re in proptest::collection::vec(-2.0..2.0f64, 63),
            im in proptest::collection::vec(-2.0..2.0f64, 63),
            s in 1.0..6.0f64,
        ) {
            let u = GridFunction::new(grid(), re.iter().zip(&im).map(|(a, b)| C64::new(*a, *b)).collect()).unwrap();
            let lhs = weighted_pairing(u.values(), u.values(), s) * grid().h();
            let rhs = crate::grid::lebesgue_norm(&u, s).unwrap().powf(s);
            proptest::prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        }

        #[test]
        fn imaginary_multiple_pairs_to_zero(w in proptest::collection::vec(-2.0..2.0f64, 63), s in 1.0..6.0f64) {
            let iw: Vec<C64> = w.iter().map(|x| C64::new(0.0, *x)).collect();
            let rw: Vec<C64> = w.iter().map(|x| C64::new(*x, 0.0)).collect();
            proptest::prop_assert_eq!(weighted_pairing(&iw, &rw, s), 0.0);
        }
    }

    #[test]
    fn porous_jacobian_matches_differences() {
        let g = grid();
        let op = Operator::PorousMedium { sigma: 0.2, epsilon: None, c_kernel: 1.0 };
        let u = GridFunction::from_real_fn(g, |x| (PI * x).sin() + 0.3 * (5.0 * x).cos() * x * (1.0 - x)).unwrap();
        let jac = op.porous_jacobian(&u).unwrap();
        let v: Vec<f64> = (0..g.len()).map(|i| ((i * 7 % 11) as f64 - 5.0) / 5.0).collect();
        let eps = 1e-6;
        let shifted = |sgn: f64| {
            let w: Vec<f64> = u.real_parts().iter().zip(&v).map(|(a, b)| a + sgn * eps * b).collect();
            op.apply(&GridFunction::from_real(g, &w).unwrap()).unwrap().real_parts()
        };
        let (up, dn) = (shifted(1.0), shifted(-1.0));
        let jv = &jac * nalgebra::DVector::from_column_slice(&v);
        let scale = jv.amax();
        for i in 0..g.len() {
            let fd = (up[i] - dn[i]) / (2.0 * eps);
            assert!((fd - jv[i]).abs() < 1e-6 * scale, "row {i}: {fd} vs {}", jv[i]);
        }
    }

    #[test]
    fn matrices_match_apply() {
        let g = Grid::new(-0.5, 1.0, 11).unwrap();
        let u = GridFunction::from_fn(g, |x| C64::new((3.0 * x).sin(), x * x - 0.2)).unwrap();
        let field = Field { constant: 0.7, modes: vec![(1.3, 2.0, 0.4)] };
        let ops = [
            Operator::Laplacian,
            Operator::FracLaplacian { sigma: 0.3 },
            Operator::Magnetic { field: field.clone() },
            Operator::FracMagnetic { sigma: 0.6, field },
            Operator::SchrodingerControl { potential: Field::constant(2.0) },
        ];
        for op in ops {
            let m = op.matrix(&g).unwrap();
            let direct = op.apply(&u).unwrap();
            let via = &m * nalgebra::DVector::from_column_slice(u.values());
            for (a, b) in direct.values().iter().zip(via.iter()) {
                assert!((a - b).norm() < 1e-9 * (1.0 + a.norm()), "{}", op.name());
            }
        }
    }

    #[test]
    fn porous_frozen_matrix_matches_apply() {
        let g = grid();
        let u = GridFunction::from_real_fn(g, |x| (PI * x).sin().powi(2)).unwrap();
        let op = Operator::PorousMedium { sigma: 0.3, epsilon: None, c_kernel: 1.5 };
        let p = op.porous_frozen_matrix(&u).unwrap();
        let via = &p * nalgebra::DVector::from_vec(u.real_parts());
        let direct = op.apply(&u).unwrap();
        for (a, b) in direct.values().iter().zip(via.iter()) {
            assert!((a.re - b).abs() < 1e-9 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn real_only_operators_reject_complex() {
        let u = GridFunction::from_fn(grid(), |x| C64::new(x, 0.1)).unwrap();
        let op = Operator::Kirchhoff { m0: 1.0, b: 0.0 };
        assert!(matches!(op.apply(&u), Err(Error::RealRequired(_))));
    }

    #[test]
    fn parameter_ranges() {
        assert!(Operator::PorousMedium { sigma: 0.5, epsilon: None, c_kernel: 1.0 }.validate().is_err());
        assert!(Operator::FracLaplacian { sigma: 1.0 }.validate().is_err());
        assert!(Operator::Kirchhoff { m0: 0.0, b: 0.0 }.validate().is_err());
    }
}
