//! Closed-form radial profiles: the Jackiw-Pi vortex and its derivatives,
//! its gauge potential, the smooth cutoff χ, and the shipped pair of
//! orthogonality profiles.
//!
//! These are evaluated at arbitrary radii (not only grid nodes), which is what
//! lets the modulation code pair a lab-frame field against rescaled profiles
//! without interpolation.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;

/// Start of the transition region of [`chi`]. The cutoff is 1 on `[0, a]`,
/// 0 on `[2, ∞)` and smooth in between.
pub const CHI_PLATEAU: f64 = 1.6;

#[inline]
fn amplitude(m: u32) -> f64 {
    2.0 * SQRT_2 * (m as f64 + 1.0)
}

/// `Q(r) = √8 (m+1) r^m / (1 + r^{2m+2})`.
pub fn q(m: u32, r: f64) -> f64 {
    let k = 2 * m as i32 + 2;
    amplitude(m) * r.powi(m as i32) / (1.0 + r.powi(k))
}

/// `Q'/Q = m/r − k r^{k−1}/(1 + r^k)`, written without dividing by `Q`.
pub fn dq(m: u32, r: f64) -> f64 {
    let mi = m as i32;
    let k = 2 * mi + 2;
    let rk = r.powi(k);
    let d = 1.0 + rk;
    // d/dr [r^m / (1 + r^k)] = (m r^{m−1}(1 + r^k) − k r^{m+k−1}) / (1 + r^k)²
    let lead = if m == 0 { 0.0 } else { m as f64 * r.powi(mi - 1) * d };
    amplitude(m) * (lead - k as f64 * r.powi(mi + k - 1)) / (d * d)
}

pub fn d2q(m: u32, r: f64) -> f64 {
    let mf = m as f64;
    let kf = 2.0 * mf + 2.0;
    let k = 2 * m as i32 + 2;
    let rk = r.powi(k);
    let d = 1.0 + rk;
    // g = Q'/Q, Q'' = Q (g² + g')
    let g = mf / r - kf * r.powi(k - 1) / d;
    let dg = -mf / (r * r) - kf * (kf - 1.0) * r.powi(k - 2) / d + kf * kf * r.powi(2 * k - 2) / (d * d);
    q(m, r) * (g * g + dg)
}

/// `ΛQ = r Q' + Q`.
pub fn lambda_q(m: u32, r: f64) -> f64 {
    r * dq(m, r) + q(m, r)
}

/// `(ΛQ)' = 2Q' + r Q''`.
pub fn d_lambda_q(m: u32, r: f64) -> f64 {
    2.0 * dq(m, r) + r * d2q(m, r)
}

/// `A_θ[Q](r) = −2(m+1) r^{2m+2} / (1 + r^{2m+2})`.
pub fn a_theta_q(m: u32, r: f64) -> f64 {
    let rk = r.powi(2 * m as i32 + 2);
    -2.0 * (m as f64 + 1.0) * rk / (1.0 + rk)
}

/// `(1/|t|) Q(r/|t|) e^{−i r²/(4|t|)}`.
pub fn s_solution(m: u32, t: f64, r: f64) -> Complex64 {
    let a = t.abs();
    Complex64::from_polar(q(m, r / a) / a, -r * r / (4.0 * a))
}

#[inline]
fn bump(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

#[inline]
fn dbump(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp() / (t * t)
    }
}

/// Smooth cutoff: 1 on `|x| ≤ CHI_PLATEAU`, 0 on `|x| ≥ 2`.
pub fn chi(x: f64) -> f64 {
    let x = x.abs();
    if x <= CHI_PLATEAU {
        return 1.0;
    }
    if x >= 2.0 {
        return 0.0;
    }
    let u = (x - CHI_PLATEAU) / (2.0 - CHI_PLATEAU);
    let p = bump(1.0 - u);
    let s = bump(u);
    p / (p + s)
}

pub fn dchi(x: f64) -> f64 {
    let x = x.abs();
    if x <= CHI_PLATEAU || x >= 2.0 {
        return 0.0;
    }
    let w = 2.0 - CHI_PLATEAU;
    let u = (x - CHI_PLATEAU) / w;
    let p = bump(1.0 - u);
    let s = bump(u);
    let dp = -dbump(1.0 - u);
    let ds = dbump(u);
    (dp * s - p * ds) / ((p + s) * (p + s)) / w
}

/// `χ_R(x) = χ(x/R)`.
pub fn chi_r(radius: f64, x: f64) -> f64 {
    chi(x / radius)
}

/// Which of the two shipped orthogonality profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestProfile {
    /// `𝒵₁ = χ ΛQ`, real.
    ScalingBump,
    /// `𝒵₂ = i χ Q`, imaginary.
    PhaseBump,
}

impl TestProfile {
    pub fn value(self, m: u32, y: f64) -> Complex64 {
        match self {
            Self::ScalingBump => Complex64::new(chi(y) * lambda_q(m, y), 0.0),
            Self::PhaseBump => Complex64::new(0.0, chi(y) * q(m, y)),
        }
    }

    /// `Λ𝒵 = y 𝒵' + 𝒵`.
    pub fn lambda_value(self, m: u32, y: f64) -> Complex64 {
        if chi(y) == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        match self {
            Self::ScalingBump => {
                let z = chi(y) * lambda_q(m, y);
                let dz = dchi(y) * lambda_q(m, y) + chi(y) * d_lambda_q(m, y);
                Complex64::new(y * dz + z, 0.0)
            }
            Self::PhaseBump => {
                let z = chi(y) * q(m, y);
                let dz = dchi(y) * q(m, y) + chi(y) * dq(m, y);
                Complex64::new(0.0, y * dz + z)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central(f: impl Fn(f64) -> f64, r: f64) -> f64 {
        let e = 1e-5;
        (f(r + e) - f(r - e)) / (2.0 * e)
    }

    #[test]
    fn vortex_values() {
        assert!((q(0, 1e-9) - 2.0 * SQRT_2).abs() < 1e-12);
        assert!((q(1, 1.0) - 2.0 * SQRT_2).abs() < 1e-14);
        let ratio = q(1, 10.0) / q(1, 20.0);
        assert!((ratio / 8.0 - 1.0).abs() < 0.05);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for m in 0..3u32 {
            for &r in &[0.3, 0.9, 1.7, 4.0] {
                let scale = 1.0 + q(m, r).abs();
                assert!((dq(m, r) - central(|x| q(m, x), r)).abs() < 1e-8 * scale);
                assert!((d2q(m, r) - central(|x| dq(m, x), r)).abs() < 1e-7 * scale);
                assert!((d_lambda_q(m, r) - central(|x| lambda_q(m, x), r)).abs() < 1e-7 * scale);
            }
        }
        // m = 1 closed form quoted in the docs: Q' = √8·2(1 − 3r⁴)/(1 + r⁴)².
        let r: f64 = 0.8;
        let closed = 2.0 * SQRT_2 * 2.0 * (1.0 - 3.0 * r.powi(4)) / (1.0 + r.powi(4)).powi(2);
        assert!((dq(1, r) - closed).abs() < 1e-13);
    }

    #[test]
    fn cutoff_shape() {
        assert_eq!(chi(0.5), 1.0);
        assert_eq!(chi(CHI_PLATEAU), 1.0);
        assert_eq!(chi(2.0), 0.0);
        assert_eq!(chi(3.0), 0.0);
        let mid = chi(0.5 * (CHI_PLATEAU + 2.0));
        assert!((mid - 0.5).abs() < 1e-12);
        for &x in &[1.65, 1.8, 1.95] {
            assert!((dchi(x) - central(chi, x)).abs() < 1e-6);
        }
        for k in 0..100 {
            let x = 1.0 + k as f64 * 0.011;
            assert!(chi(x) >= chi(x + 0.011));
        }
    }

    #[test]
    fn profile_lambda_matches_finite_difference() {
        for m in 0..3u32 {
            for p in [TestProfile::ScalingBump, TestProfile::PhaseBump] {
                for &y in &[0.4, 1.2, 1.7, 1.9] {
                    let num = y * (p.value(m, y + 1e-6) - p.value(m, y - 1e-6)) / 2e-6 + p.value(m, y);
                    assert!((num - p.lambda_value(m, y)).norm() < 1e-6);
                }
                assert_eq!(p.value(m, 2.5), Complex64::new(0.0, 0.0));
            }
        }
    }
}
