//! The Jackiw-Pi vortex `Q`, the scaling/phase symmetry action, the explicit
//! pseudoconformal blow-up solution `S(t)`, the covariant Cauchy-Riemann
//! operator `𝐃_u` and both forms of the energy.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge;
use crate::grid::{self, NormKind, RadialField, RadialGrid};
use crate::profiles;

/// Scale and phase `(λ, γ)` of `f_{λ,γ}(r) = (e^{iγ}/λ) f(r/λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    pub lambda: f64,
    pub gamma: f64,
}

impl SolitonParams {
    pub fn new(lambda: f64, gamma: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "scale must be positive, got {lambda}"
            )));
        }
        if !gamma.is_finite() {
            return Err(Error::InvalidArgument("phase must be finite".into()));
        }
        Ok(Self { lambda, gamma })
    }

    pub fn identity() -> Self {
        Self {
            lambda: 1.0,
            gamma: 0.0,
        }
    }
}

fn nonnegative_index(m: i32) -> Result<u32> {
    u32::try_from(m).map_err(|_| {
        Error::InvalidArgument(format!(
            "no nontrivial finite-energy vortex exists for m = {m} < 0"
        ))
    })
}

/// `Q` sampled on the grid.
pub fn q_profile(m: i32, grid: RadialGrid) -> Result<RadialField> {
    let mu = nonnegative_index(m)?;
    Ok(RadialField::from_real_fn(grid, m, |r| profiles::q(mu, r)))
}

/// `ΛQ = (r∂_r + 1)Q` sampled from the closed form.
pub fn lambda_q_profile(m: i32, grid: RadialGrid) -> Result<RadialField> {
    let mu = nonnegative_index(m)?;
    Ok(RadialField::from_real_fn(grid, m, |r| profiles::lambda_q(mu, r)))
}

/// `Q_{λ,γ}` sampled from the closed form (no interpolation).
pub fn q_modulated(m: i32, grid: RadialGrid, p: SolitonParams) -> Result<RadialField> {
    let mu = nonnegative_index(m)?;
    let phase = Complex64::from_polar(1.0 / p.lambda, p.gamma);
    Ok(RadialField::from_fn(grid, m, |r| phase * profiles::q(mu, r / p.lambda)))
}

/// `f_{λ,γ}(r) = (e^{iγ}/λ) f(r/λ)`, resampled on the same grid.
pub fn modulate(f: &RadialField, p: SolitonParams) -> RadialField {
    if p.lambda == 1.0 {
        if p.gamma == 0.0 {
            return f.clone();
        }
        return f.scale(Complex64::from_polar(1.0, p.gamma));
    }
    let c = Complex64::from_polar(1.0 / p.lambda, p.gamma);
    RadialField::from_fn(*f.grid(), f.m(), |r| c * f.sample_at(r / p.lambda))
}

/// `g^♭(y) = λ e^{−iγ} g(λy)`, the inverse of [`modulate`].
pub fn demodulate(g: &RadialField, p: SolitonParams) -> RadialField {
    if p.lambda == 1.0 {
        if p.gamma == 0.0 {
            return g.clone();
        }
        return g.scale(Complex64::from_polar(1.0, -p.gamma));
    }
    let c = Complex64::from_polar(p.lambda, -p.gamma);
    RadialField::from_fn(*g.grid(), g.m(), |y| c * g.sample_at(p.lambda * y))
}

/// The explicit blow-up solution `S(t, r) = (1/|t|) Q(r/|t|) e^{−ir²/(4|t|)}`.
///
/// `S(t)` has finite energy only for `m ≥ 1`; `allow_m0` permits `m = 0` for
/// qualitative runs (with a warning).
pub fn s_solution(m: i32, t: f64, grid: RadialGrid, allow_m0: bool) -> Result<RadialField> {
    if !(t < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "S(t) is defined for t < 0, got {t}"
        )));
    }
    let mu = nonnegative_index(m)?;
    if mu == 0 {
        if !allow_m0 {
            return Err(Error::InvalidArgument(
                "S(t) has infinite energy for m = 0 (set allow_m0 to override)".into(),
            ));
        }
        log::warn!("S(t) with m = 0 has infinite energy; energy monitors are meaningless");
    }
    Ok(RadialField::from_fn(grid, m, |r| profiles::s_solution(mu, t, r)))
}

/// `𝐃_u f = ∂_r f − ((m + A_θ[u])/r) f`.
pub fn covariant_cr(u: &RadialField, f: &RadialField) -> Result<RadialField> {
    u.check_compatible(f)?;
    let a = gauge::a_theta(u);
    Ok(covariant_cr_with(&a.into_values(), f))
}

pub(crate) fn covariant_cr_with(a_theta: &[f64], f: &RadialField) -> RadialField {
    let grid = *f.grid();
    let m = f.m() as f64;
    let df = grid::differentiate(f);
    let values = df
        .values()
        .iter()
        .zip(f.values())
        .enumerate()
        .map(|(i, (&d, &v))| d - v * ((m + a_theta[i]) / grid.r(i)))
        .collect();
    RadialField::from_vec(grid, f.m(), values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Energy {
    pub coulomb: f64,
    pub selfdual: f64,
}

impl Energy {
    /// Canonical value used downstream: the manifestly nonnegative form.
    pub fn value(&self) -> f64 {
        self.selfdual
    }
}

/// Both energy forms:
///
/// ```text
/// coulomb  = ∫ ½|∂_r u|² + ½((m + A_θ[u])/r)²|u|² − ¼|u|⁴
/// selfdual = ∫ ½|𝐃_u u|²
/// ```
///
/// The Coulomb form takes its kinetic term from staggered differences
/// ([`grid::staggered_quadratic_form`]), which makes it the discrete
/// Hamiltonian of the evolution scheme; the self-dual form uses the central
/// difference of [`covariant_cr`]. The two agree to `O(h²)`.
pub fn energy(u: &RadialField) -> Energy {
    let grid = *u.grid();
    let m = u.m() as f64;
    let a = gauge::a_theta(u).into_values();
    let dens = u.abs_sq();
    let potential_density: Vec<f64> = (0..grid.n())
        .map(|i| {
            let r = grid.r(i);
            0.5 * ((m + a[i]).powi(2) - m * m) * dens[i] / (r * r) - 0.25 * dens[i] * dens[i]
        })
        .collect();
    let cr = covariant_cr_with(&a, u);
    let selfdual_density: Vec<f64> = cr.values().iter().map(|v| 0.5 * v.norm_sqr()).collect();
    Energy {
        coulomb: grid::staggered_quadratic_form(u) + grid.integrate(&potential_density),
        selfdual: grid.integrate(&selfdual_density),
    }
}

/// `M[u] = ∫|u|²`.
pub fn mass(u: &RadialField) -> f64 {
    u.grid().integrate(&u.abs_sq())
}

/// Positive energy scale `½‖u‖²_{Ḣ¹_m} + ¼∫|u|⁴` used to normalize energy
/// differences.
pub fn energy_scale(u: &RadialField) -> f64 {
    let h1 = grid::norm(u, NormKind::Hdot1);
    let quartic: Vec<f64> = u.abs_sq().iter().map(|d| d * d).collect();
    0.5 * h1 * h1 + 0.25 * u.grid().integrate(&quartic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_3, PI};

    fn grid() -> RadialGrid {
        RadialGrid::with_extent(100.0, 0.01).unwrap()
    }

    #[test]
    fn negative_index_is_rejected() {
        assert!(q_profile(-1, grid()).is_err());
        assert!(SolitonParams::new(0.0, 0.0).is_err());
        assert!(s_solution(1, 0.0, grid(), false).is_err());
        assert!(s_solution(0, -1.0, grid(), false).is_err());
        assert!(s_solution(0, -1.0, grid(), true).is_ok());
    }

    #[test]
    fn vortex_mass() {
        for m in 0..3 {
            let q = q_profile(m, grid()).unwrap();
            let expected = 8.0 * PI * (m as f64 + 1.0);
            let rel = (mass(&q) - expected).abs() / expected;
            // m = 0 loses ~1/r_max² of its mass to truncation.
            let tol = if m == 0 { 2e-4 } else { 1e-6 };
            assert!(rel < tol, "m={m} rel={rel}");
        }
        assert_eq!(mass(&RadialField::zeros(grid(), 1)), 0.0);
    }

    #[test]
    fn vortex_is_self_dual() {
        let q = q_profile(1, grid()).unwrap();
        let e = energy(&q);
        let scale = energy_scale(&q);
        assert!(e.selfdual.abs() < 1e-6 * scale);
        // Staggered vs central differences, O(h²).
        assert!(e.coulomb.abs() < 5e-4 * scale, "{e:?}");
        let z = energy(&RadialField::zeros(grid(), 1));
        assert_eq!((z.coulomb, z.selfdual), (0.0, 0.0));
    }

    #[test]
    fn free_operator_kernel() {
        let g = RadialGrid::with_extent(2.0, 1e-3).unwrap();
        let zero = RadialField::zeros(g, 2);
        let f = RadialField::from_real_fn(g, 2, |r| r * r);
        let d = covariant_cr(&zero, &f).unwrap();
        let worst = d.values()[..g.n() - 1].iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(worst < 1e-5, "{worst}");
        let q = q_profile(2, g).unwrap();
        assert!(covariant_cr(&q, &zero).unwrap().values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn modulation_identity_and_isometry() {
        let g = RadialGrid::with_extent(60.0, 0.01).unwrap();
        let q = q_profile(1, g).unwrap();
        assert_eq!(modulate(&q, SolitonParams::identity()), q);
        let p = SolitonParams::new(2.0, FRAC_PI_3).unwrap();
        let mq = modulate(&q, p);
        let rel = (grid::norm(&mq, NormKind::L2) / grid::norm(&q, NormKind::L2) - 1.0).abs();
        assert!(rel < 1e-5, "{rel}");
        let exact = q_modulated(1, g, p).unwrap();
        let err = (0..g.n()).map(|i| (mq[i] - exact[i]).norm()).fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
        let back = demodulate(&mq, p);
        let inner = g.index_at_radius(25.0);
        let err = (0..inner).map(|i| (back[i] - q[i]).norm()).fold(0.0, f64::max);
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn blowup_solution_at_unit_time() {
        let g = RadialGrid::with_extent(50.0, 0.01).unwrap();
        let s = s_solution(1, -1.0, g, false).unwrap();
        let q = q_profile(1, g).unwrap();
        for i in (0..g.n()).step_by(97) {
            let r = g.r(i);
            let expected = q[i] * Complex64::from_polar(1.0, -r * r / 4.0);
            assert!((s[i] - expected).norm() < 1e-14);
        }
        let s_half = s_solution(1, -0.5, g, false).unwrap();
        assert!((mass(&s_half) / mass(&s) - 1.0).abs() < 1e-6);
        let ratio = grid::norm(&s_half, NormKind::Hdot1) / grid::norm(&s, NormKind::Hdot1);
        // ‖S(t)‖²_{Ḣ¹} = ‖Q‖²_{Ḣ¹}/t² + ‖yQ‖²/4 = (16/t² + 2)π² for m = 1.
        let expected = (66.0f64 / 18.0).sqrt();
        assert!((ratio / expected - 1.0).abs() < 1e-3, "{ratio} vs {expected}");
    }
}
