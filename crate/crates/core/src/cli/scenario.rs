//! Initial data for the scenario registry.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{InitialData, PerturbationProfile, ScenarioConfig};
use super::output;
use crate::error::{Error, Result};
use crate::grid::{self, NormKind, RadialField, RadialGrid};
use crate::soliton::{self, SolitonParams};

/// Number of Gaussian shells in a `random_h1` sample.
const RANDOM_SHELLS: usize = 6;

/// Smooth random field: a sum of `r^{|m|}`-weighted Gaussian shells with
/// random complex weights, centers in `[0, 4]` and widths in `[0.5, 2]`,
/// rescaled to the requested mass.
pub fn random_h1_field(grid: RadialGrid, m: i32, seed: u64, mass_target: f64) -> Result<RadialField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shells: Vec<(Complex64, f64, f64)> = (0..RANDOM_SHELLS)
        .map(|_| {
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (c, rng.gen_range(0.0..4.0), rng.gen_range(0.5..2.0))
        })
        .collect();
    let am = m.unsigned_abs() as i32;
    let u = RadialField::from_fn(grid, m, |r| {
        let env = r.powi(am);
        shells
            .iter()
            .map(|(c, r0, w)| c * (env * (-((r - r0) / w).powi(2)).exp()))
            .sum()
    });
    let mass = soliton::mass(&u);
    if !(mass > 0.0) {
        return Err(Error::InvalidArgument("random field has zero mass".into()));
    }
    Ok(u.scale_real((mass_target / mass).sqrt()))
}

/// Unit-L² perturbation direction with a seeded random complex phase.
pub fn perturbation(grid: RadialGrid, m: i32, seed: u64, profile: PerturbationProfile) -> RadialField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase = Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
    let am = m.unsigned_abs() as i32;
    let base = match profile {
        PerturbationProfile::Gaussian => RadialField::from_real_fn(grid, m, |r| r.powi(am) * (-r * r).exp()),
        // Smooth bump on [0.5, 3].
        PerturbationProfile::Bump => RadialField::from_real_fn(grid, m, |r| {
            if r <= 0.5 || r >= 3.0 {
                0.0
            } else {
                let x = (r - 0.5) / 2.5;
                (-1.0 / (x * (1.0 - x))).exp() * 64.0
            }
        }),
    };
    let n = grid::norm(&base, NormKind::L2);
    base.scale(phase / n)
}

/// Builds the initial field. Returns `None` for the identity suite.
pub fn initial_state(cfg: &ScenarioConfig) -> Result<Option<(RadialField, f64)>> {
    let grid = cfg.radial_grid()?;
    let m = cfg.m;
    let t0 = cfg.evolution.t_start;
    let u = match &cfg.initial {
        None => return Ok(None),
        Some(InitialData::Soliton { lambda, gamma }) => {
            soliton::q_modulated(m, grid, SolitonParams::new(*lambda, *gamma)?)?
        }
        Some(InitialData::PseudoconformalBlowup { t0 }) => soliton::s_solution(m, *t0, grid, true)?,
        Some(InitialData::PerturbedSoliton { seed, amplitude, profile }) => {
            let q = soliton::q_profile(m, grid)?;
            let d = perturbation(grid, m, *seed, *profile);
            &q + &(&d * *amplitude)
        }
        Some(InitialData::RandomH1 { seed, mass_target }) => random_h1_field(grid, m, *seed, *mass_target)?,
        Some(InitialData::File { path }) => {
            let (u, _) = output::read_snapshot(path)?;
            if u.grid().same_as(&grid) {
                u
            } else {
                // Refined study levels resample the stored field.
                RadialField::from_fn(grid, m, |r| u.sample_at(r))
            }
        }
    };
    Ok(Some((u, t0)))
}

/// Exact solution for scenarios that have one: `Q_{λ,γ}` for the static
/// soliton, `S(t)` for the pseudoconformal run.
pub fn reference_solution(cfg: &ScenarioConfig, t: f64) -> Result<Option<RadialField>> {
    let grid = cfg.radial_grid()?;
    Ok(match &cfg.initial {
        Some(InitialData::Soliton { lambda, gamma }) => {
            Some(soliton::q_modulated(cfg.m, grid, SolitonParams::new(*lambda, *gamma)?)?)
        }
        Some(InitialData::PseudoconformalBlowup { .. }) if t < 0.0 => {
            Some(soliton::s_solution(cfg.m, t, grid, true)?)
        }
        _ => None,
    })
}

/// Whether the scenario's data lives near the soliton family, so that
/// modulation tracking is meaningful.
pub fn is_soliton_like(cfg: &ScenarioConfig) -> bool {
    cfg.m >= 0
        && matches!(
            cfg.initial,
            Some(InitialData::Soliton { .. } | InitialData::PseudoconformalBlowup { .. } | InitialData::PerturbedSoliton { .. })
        )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_fields_are_seeded_and_normalized() {
        let g = RadialGrid::new(400, 0.05).unwrap();
        let a = random_h1_field(g, -1, 7, 2.5).unwrap();
        let b = random_h1_field(g, -1, 7, 2.5).unwrap();
        let c = random_h1_field(g, -1, 8, 2.5).unwrap();
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
        assert!((soliton::mass(&a) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn perturbations_have_unit_norm() {
        let g = RadialGrid::new(400, 0.05).unwrap();
        for p in [PerturbationProfile::Gaussian, PerturbationProfile::Bump] {
            let d = perturbation(g, 1, 3, p);
            assert!((grid::norm(&d, NormKind::L2) - 1.0).abs() < 1e-12);
        }
    }
}
