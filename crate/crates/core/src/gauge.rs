//! Nonlocal gauge potentials
//!
//! ```text
//! A_θ[ψ₁,ψ₂](r) = −½ ∫_0^r Re(ψ̄₁ψ₂) r' dr'
//! A_t[u](r)     = −∫_r^∞ (m + A_θ[u]) |u|² dr'/r'
//! ```
//!
//! Both are single O(n) passes over the grid using the half-diagonal prefix
//! and suffix sums of [`RadialGrid`]. `A_t` is truncated at `r_max`.

use crate::error::Result;
use crate::grid::{RadialField, RadialGrid, RealField};

#[derive(Debug, Clone, PartialEq)]
pub struct GaugePotentials {
    pub a_theta: RealField,
    pub a_t: RealField,
    /// Size of the `A_t` integrand at the last node times `r_max`: a scale for
    /// the contribution dropped by truncating `∫_r^∞` at the domain edge.
    pub a_t_tail_estimate: f64,
}

impl GaugePotentials {
    pub fn compute(u: &RadialField) -> Self {
        let a_theta = a_theta(u);
        let integrand = a_t_integrand(u, &a_theta);
        let grid = *u.grid();
        let last = grid.n() - 1;
        let a_t_tail_estimate = integrand[last].abs() * grid.r(last);
        let a_t = suffix_a_t(&grid, &integrand);
        Self {
            a_theta,
            a_t,
            a_t_tail_estimate,
        }
    }
}

fn density_pol(psi1: &RadialField, psi2: &RadialField) -> Vec<f64> {
    psi1.values()
        .iter()
        .zip(psi2.values())
        .map(|(a, b)| a.re * b.re + a.im * b.im)
        .collect()
}

/// Prefix potential `−½ ∫_0^r g r' dr'` of a real density.
pub(crate) fn a_theta_of_density(grid: &RadialGrid, density: &[f64]) -> Vec<f64> {
    let g: Vec<f64> = density
        .iter()
        .enumerate()
        .map(|(i, &d)| d * grid.r(i))
        .collect();
    grid.prefix_integral(&g)
        .into_iter()
        .map(|v| -0.5 * v)
        .collect()
}

/// Suffix integral `∫_r^{r_max} g dr'/r'`.
pub(crate) fn suffix_dr_over_r(grid: &RadialGrid, g: &[f64]) -> Vec<f64> {
    let k: Vec<f64> = g.iter().enumerate().map(|(i, &v)| v / grid.r(i)).collect();
    grid.suffix_integral(&k)
}

/// Polarized potential `A_θ[ψ₁, ψ₂]`.
pub fn a_theta_pol(psi1: &RadialField, psi2: &RadialField) -> Result<RealField> {
    psi1.grid().check_same(psi2.grid())?;
    let grid = *psi1.grid();
    Ok(RealField::from_vec(
        grid,
        a_theta_of_density(&grid, &density_pol(psi1, psi2)),
    ))
}

pub fn a_theta(u: &RadialField) -> RealField {
    let grid = *u.grid();
    RealField::from_vec(grid, a_theta_of_density(&grid, &u.abs_sq()))
}

/// `A_θ[u]` evaluated at `r_max`, equal to `−M[u]/(4π)` in the discrete sum.
pub fn a_theta_at_edge(u: &RadialField) -> f64 {
    let grid = u.grid();
    let g: Vec<f64> = u
        .abs_sq()
        .iter()
        .enumerate()
        .map(|(i, &d)| d * grid.r(i))
        .collect();
    -0.5 * grid.total_integral(&g)
}

fn a_t_integrand(u: &RadialField, a_theta: &RealField) -> Vec<f64> {
    let m = u.m() as f64;
    let grid = u.grid();
    u.values()
        .iter()
        .enumerate()
        .map(|(i, v)| (m + a_theta[i]) * v.norm_sqr() / grid.r(i))
        .collect()
}

fn suffix_a_t(grid: &RadialGrid, integrand: &[f64]) -> RealField {
    let s = grid.suffix_integral(integrand);
    RealField::from_vec(*grid, s.into_iter().map(|v| -v).collect())
}

pub fn a_t(u: &RadialField) -> RealField {
    a_t_with(u, &a_theta(u))
}

/// `A_t[u]` reusing an already computed `A_θ[u]`.
pub fn a_t_with(u: &RadialField, a_theta: &RealField) -> RealField {
    suffix_a_t(u.grid(), &a_t_integrand(u, a_theta))
}
