//! Uniform 1-D grids, grid functions and discrete norms.
//!
//! A [`Grid`] on `(a, b)` with `n` interior nodes has spacing `h = (b - a)/(n + 1)`
//! and nodes `x_j = a + j h` for `j = 1..=n`. The boundary nodes `x_0 = a` and
//! `x_{n+1} = b`, and everything beyond them, carry the value zero.
//!
//! # Definition
//!
//! ```text
//! ‖u‖_s = (h Σ_j |u_j|^s)^{1/s},      ‖u‖_∞ = max_j |u_j|
//! ```

use num_complex::Complex64;

use crate::error::{param, Error, Result};

pub type C64 = Complex64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    n: usize,
    h: f64,
}

impl Grid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return param(format!("grid needs finite a < b, got ({a}, {b})"));
        }
        if n < 3 {
            return param(format!("grid needs at least 3 interior nodes, got {n}"));
        }
        Ok(Grid { a, b, n, h: (b - a) / (n + 1) as f64 })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of interior nodes.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Length of the domain, `b - a`.
    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    /// Coordinate of interior node `i` (0-based, so `x(0) = a + h`).
    pub fn x(&self, i: usize) -> f64 {
        self.a + (i + 1) as f64 * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }
}

/// Complex nodal values on the interior nodes of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<C64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} values for a grid with {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return param("grid function has non-finite values");
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_real(grid: Grid, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> C64) -> Result<Self> {
        Self::new(grid, grid.nodes().into_iter().map(f).collect())
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(grid, |x| C64::new(f(x), 0.0))
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFunction { grid, values: vec![C64::new(0.0, 0.0); grid.len()] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    /// Value at signed interior index `i`, zero off the interior.
    pub fn at(&self, i: isize) -> C64 {
        if i < 0 || i as usize >= self.values.len() {
            C64::new(0.0, 0.0)
        } else {
            self.values[i as usize]
        }
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|z| z.im == 0.0)
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm()).collect()
    }

    pub fn scaled(&self, c: f64) -> Self {
        GridFunction { grid: self.grid, values: self.values.iter().map(|z| z * c).collect() }
    }
}

/// Discrete `L^s` norm; `s = f64::INFINITY` gives the max norm.
pub fn lebesgue_norm(u: &GridFunction, s: f64) -> Result<f64> {
    if s.is_nan() || s < 1.0 {
        return param(format!("norm exponent must be in [1, inf], got {s}"));
    }
    let mods = u.values.iter().map(|z| z.norm());
    if s.is_infinite() {
        return Ok(mods.fold(0.0, f64::max));
    }
    // scale first so large exponents do not overflow
    let m = u.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if m == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = mods.map(|r| (r / m).powf(s)).sum();
    Ok(m * (u.grid.h * sum).powf(1.0 / s))
}

/// Centered differences at the interior nodes, using zero boundary values.
pub fn discrete_gradient(u: &GridFunction) -> Vec<C64> {
    let h2 = 2.0 * u.grid.h;
    (0..u.values.len() as isize)
        .map(|i| (u.at(i + 1) - u.at(i - 1)) / h2)
        .collect()
}

/// Forward differences on the `n + 1` links between consecutive nodes,
/// boundary links included.
///
/// `h Σ |D⁺u|²` equals `h Σ ū (-Δ_h u)` for the 3-point Laplacian, which makes
/// it the energy that pairs with the discrete operators.
pub fn staggered_gradient(u: &GridFunction) -> Vec<C64> {
    let h = u.grid.h;
    (-1..u.values.len() as isize)
        .map(|i| (u.at(i + 1) - u.at(i)) / h)
        .collect()
}

/// `h Σ |D⁺u|²`.
pub fn dirichlet_energy(u: &GridFunction) -> f64 {
    u.grid.h * staggered_gradient(u).iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// Poincaré ratio `‖u‖₂ / ‖D⁺u‖₂`, bounded by `1/√λ₁(-Δ_h) ≈ (b - a)/π`.
pub fn poincare_ratio(u: &GridFunction) -> Result<f64> {
    let e = dirichlet_energy(u);
    if e == 0.0 {
        return Err(Error::Domain("Poincaré ratio of the zero function".into()));
    }
    Ok(lebesgue_norm(u, 2.0)? / e.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_rejects_bad_input() {
        assert!(Grid::new(1.0, 0.0, 10).is_err());
        assert!(Grid::new(0.0, 1.0, 2).is_err());
        assert!(Grid::new(0.0, f64::NAN, 10).is_err());
    }

    #[test]
    fn constant_norm_close_to_one() {
        let g = Grid::new(0.0, 1.0, 199).unwrap();
        let u = GridFunction::from_real_fn(g, |_| 1.0).unwrap();
        let n = lebesgue_norm(&u, 2.0).unwrap();
        assert!((n - (199.0f64 / 200.0).sqrt()).abs() < 1e-14);
        assert!(lebesgue_norm(&u, 0.5).is_err());
    }

    #[test]
    fn gradient_of_sine_and_constant() {
        let g = Grid::new(0.0, 1.0, 399).unwrap();
        let u = GridFunction::from_real_fn(g, |x| (PI * x).sin()).unwrap();
        let d = discrete_gradient(&u);
        for (i, z) in d.iter().enumerate() {
            assert!((z.re - PI * (PI * g.x(i)).cos()).abs() < 1e-4);
        }
        let c = GridFunction::from_real_fn(g, |_| 1.0).unwrap();
        let dc = discrete_gradient(&c);
        assert!(dc[0].re.abs() > 1.0 && dc[g.len() - 1].re.abs() > 1.0);
        assert!(dc[1..g.len() - 1].iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn poincare_on_ground_mode() {
        let g = Grid::new(0.0, 1.0, 255).unwrap();
        let u = GridFunction::from_real_fn(g, |x| (PI * x).sin()).unwrap();
        let r = poincare_ratio(&u).unwrap();
        assert!((r - 1.0 / PI).abs() < 1e-4);
        assert!(poincare_ratio(&GridFunction::zeros(g)).is_err());
    }
}
