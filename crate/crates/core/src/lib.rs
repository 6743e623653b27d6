//! Decay of solutions to evolution equations with a mixed time derivative
//!
//! The model problem on a bounded interval `Ω = (a, b)` is
//!
//! ```text
//! (λ₁ ∂ₜ^α + λ₂ ∂ₜ) u + N[u] = 0,   u = 0 outside Ω,   λ₁ + λ₂ = 1,
//! ```
//!
//! where `∂ₜ^α` is the Caputo derivative of order `α ∈ (0, 1)` and `N` is one of
//! the local or nonlocal spatial operators in [`operators`]. The crate provides
//! the discretizations, the scalar comparison barriers, the structural
//! inequality checks and the fitting tools needed to measure decay rates and
//! compare them with the predicted power-law or exponential bounds.

pub mod analysis;
pub mod barriers;
pub mod cli;
pub mod error;
pub mod evolve;
pub mod frac_time;
pub mod grid;
pub mod operators;
pub mod parallel;
pub(crate) mod quad;

pub use error::{Error, Result};
pub use grid::{Grid, GridFunction, C64};
pub use parallel::Execution;
