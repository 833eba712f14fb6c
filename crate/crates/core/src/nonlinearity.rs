//! Cubic and quintic pieces of the nonlinearity
//!
//! ```text
//! 𝓝(u) = (−|u|² + (2m/r²)A_θ[u] + (1/r²)A_θ[u]² + A_t[u]) u
//!      = 𝓝_{3,0} + m(𝓝_{3,1} + 𝓝_{3,2}) + 𝓝_{5,1} + 𝓝_{5,2}
//! ```
//!
//! the multilinear energy forms `𝓜_{4,0}, 𝓜_{4,1}, 𝓜_6`, the duality relations
//! between them, and the real potential `V[u]` consumed by the integrator.
//! Prefix and suffix integrals share midpoint weights, so the duality
//! relations are exact discrete summation-by-parts identities.

use num_complex::Complex64;

use crate::error::Result;
use crate::gauge::{self, a_theta_of_density, suffix_dr_over_r};
use crate::grid::{RadialField, RadialGrid, RealField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cubic {
    N30,
    N31,
    N32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quintic {
    N51,
    N52,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyForm {
    M40,
    M41,
    M6,
}

fn check_all(fields: &[&RadialField]) -> Result<RadialGrid> {
    let grid = *fields[0].grid();
    for f in &fields[1..] {
        grid.check_same(f.grid())?;
    }
    Ok(grid)
}

fn re_pair(a: &RadialField, b: &RadialField) -> Vec<f64> {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .collect()
}

fn times(coef: &[f64], f: &RadialField) -> RadialField {
    f.mul_real(coef)
}

pub fn cubic(kind: Cubic, psi1: &RadialField, psi2: &RadialField, psi3: &RadialField) -> Result<RadialField> {
    let grid = check_all(&[psi1, psi2, psi3])?;
    let re12 = re_pair(psi1, psi2);
    let coef: Vec<f64> = match kind {
        Cubic::N30 => re12.iter().map(|v| -v).collect(),
        Cubic::N31 => a_theta_of_density(&grid, &re12)
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let r = grid.r(i);
                2.0 * a / (r * r)
            })
            .collect(),
        Cubic::N32 => suffix_dr_over_r(&grid, &re12).iter().map(|v| -v).collect(),
    };
    Ok(times(&coef, psi3))
}

pub fn quintic(kind: Quintic, psi: [&RadialField; 5]) -> Result<RadialField> {
    let grid = check_all(&psi)?;
    let a12 = a_theta_of_density(&grid, &re_pair(psi[0], psi[1]));
    let coef: Vec<f64> = match kind {
        Quintic::N51 => {
            let a34 = a_theta_of_density(&grid, &re_pair(psi[2], psi[3]));
            (0..grid.n())
                .map(|i| {
                    let r = grid.r(i);
                    a12[i] * a34[i] / (r * r)
                })
                .collect()
        }
        Quintic::N52 => {
            let re34 = re_pair(psi[2], psi[3]);
            let g: Vec<f64> = a12.iter().zip(&re34).map(|(a, b)| a * b).collect();
            suffix_dr_over_r(&grid, &g).iter().map(|v| -v).collect()
        }
    };
    Ok(times(&coef, psi[4]))
}

/// `𝓜_{4,0}`, `𝓜_{4,1}` take four arguments, `𝓜_6` six.
pub fn energy_form(kind: EnergyForm, psi: &[&RadialField]) -> Result<f64> {
    let needed = match kind {
        EnergyForm::M40 | EnergyForm::M41 => 4,
        EnergyForm::M6 => 6,
    };
    if psi.len() != needed {
        return Err(crate::Error::InvalidArgument(format!(
            "{kind:?} takes {needed} arguments, got {}",
            psi.len()
        )));
    }
    let grid = check_all(psi)?;
    let density: Vec<f64> = match kind {
        EnergyForm::M40 => {
            let a = re_pair(psi[0], psi[1]);
            let b = re_pair(psi[2], psi[3]);
            a.iter().zip(&b).map(|(x, y)| -0.25 * x * y).collect()
        }
        EnergyForm::M41 => {
            let a12 = a_theta_of_density(&grid, &re_pair(psi[0], psi[1]));
            let b = re_pair(psi[2], psi[3]);
            (0..grid.n())
                .map(|i| {
                    let r = grid.r(i);
                    a12[i] * b[i] / (r * r)
                })
                .collect()
        }
        EnergyForm::M6 => {
            let a12 = a_theta_of_density(&grid, &re_pair(psi[0], psi[1]));
            let a34 = a_theta_of_density(&grid, &re_pair(psi[2], psi[3]));
            let c = re_pair(psi[4], psi[5]);
            (0..grid.n())
                .map(|i| {
                    let r = grid.r(i);
                    0.5 * a12[i] * a34[i] * c[i] / (r * r)
                })
                .collect()
        }
    };
    Ok(grid.integrate(&density))
}

/// The five parts of `𝓝(u)` and their sum.
#[derive(Debug, Clone)]
pub struct NonlinearityParts {
    pub n30: RadialField,
    pub n31: RadialField,
    pub n32: RadialField,
    pub n51: RadialField,
    pub n52: RadialField,
    pub total: RadialField,
}

impl NonlinearityParts {
    pub fn compute(u: &RadialField) -> Self {
        let n30 = cubic(Cubic::N30, u, u, u).expect("same grid");
        let n31 = cubic(Cubic::N31, u, u, u).expect("same grid");
        let n32 = cubic(Cubic::N32, u, u, u).expect("same grid");
        let n51 = quintic(Quintic::N51, [u; 5]).expect("same grid");
        let n52 = quintic(Quintic::N52, [u; 5]).expect("same grid");
        let m = u.m() as f64;
        let total = if u.m() == 0 {
            // 𝓝_{3,1} and 𝓝_{3,2} carry the factor m and drop out.
            &(&n30 + &n51) + &n52
        } else {
            let cubic_m = &(&n31 + &n32) * m;
            &(&(&n30 + &cubic_m) + &n51) + &n52
        };
        Self {
            n30,
            n31,
            n32,
            n51,
            n52,
            total,
        }
    }
}

/// Absolute residuals of the five duality relations, with matching scales
/// (the same forms evaluated on `|ψ_k|`, which bound every term).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityResiduals {
    pub absolute: [f64; 5],
    pub scale: [f64; 5],
}

impl DualityResiduals {
    pub fn relative(&self) -> [f64; 5] {
        let mut out = [0.0; 5];
        for k in 0..5 {
            out[k] = if self.scale[k] > 0.0 {
                self.absolute[k] / self.scale[k]
            } else {
                self.absolute[k]
            };
        }
        out
    }

    pub fn max_relative(&self) -> f64 {
        self.relative().into_iter().fold(0.0, f64::max)
    }
}

fn duality_raw(psi: [&RadialField; 6]) -> Result<[(f64, f64); 5]> {
    let [p1, p2, p3, p4, p5, p6] = psi;
    let m = p1.m() as f64;
    let ip = |a: &RadialField, b: &RadialField| crate::grid::inner_real(a, b);
    let r1 = (
        ip(&cubic(Cubic::N30, p1, p2, p3)?, p4)?,
        4.0 * energy_form(EnergyForm::M40, &[p1, p2, p3, p4])?,
    );
    let r2 = (
        m * ip(&cubic(Cubic::N31, p1, p2, p3)?, p4)?,
        2.0 * m * energy_form(EnergyForm::M41, &[p1, p2, p3, p4])?,
    );
    let r3 = (
        m * ip(&cubic(Cubic::N32, p1, p2, p3)?, p4)?,
        2.0 * m * energy_form(EnergyForm::M41, &[p3, p4, p1, p2])?,
    );
    let r4 = (
        ip(&quintic(Quintic::N51, [p1, p2, p3, p4, p5])?, p6)?,
        2.0 * energy_form(EnergyForm::M6, &[p1, p2, p3, p4, p5, p6])?,
    );
    let r5 = (
        ip(&quintic(Quintic::N52, [p1, p2, p3, p4, p5])?, p6)?,
        4.0 * energy_form(EnergyForm::M6, &[p1, p2, p5, p6, p3, p4])?,
    );
    Ok([r1, r2, r3, r4, r5])
}

pub fn duality_residuals(psi: [&RadialField; 6]) -> Result<DualityResiduals> {
    let raw = duality_raw(psi)?;
    let abs_fields: Vec<RadialField> = psi
        .iter()
        .map(|f| f.map(|_, v| Complex64::new(v.norm(), 0.0)))
        .collect();
    let refs: [&RadialField; 6] = std::array::from_fn(|k| &abs_fields[k]);
    let mag = duality_raw(refs)?;
    let mut absolute = [0.0; 5];
    let mut scale = [0.0; 5];
    for k in 0..5 {
        absolute[k] = (raw[k].0 - raw[k].1).abs();
        scale[k] = mag[k].0.abs().max(mag[k].1.abs());
    }
    Ok(DualityResiduals { absolute, scale })
}

/// `V[u] = A_t[u] + ((m + A_θ[u])² − m²)/r² − |u|²`, so that
/// `i∂_t u = −Δ^{(m)}u + V[u]u`.
pub fn nonlinear_potential(u: &RadialField) -> RealField {
    let grid = *u.grid();
    let m = u.m() as f64;
    let a = gauge::a_theta(u);
    let at = gauge::a_t_with(u, &a);
    let values = (0..grid.n())
        .map(|i| {
            let r = grid.r(i);
            at[i] + (2.0 * m * a[i] + a[i] * a[i]) / (r * r) - u[i].norm_sqr()
        })
        .collect();
    RealField::from_vec(grid, values)
}
