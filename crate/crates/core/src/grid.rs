//! Cell-centered radial grid, quadrature against `2π r dr`, finite
//! differences and the norms used throughout the crate.
//!
//! Nodes sit at `r_i = (i + 1/2) h`, so the origin is never sampled and every
//! `1/r` weight is finite. Integrals use the midpoint rule. Prefix and suffix
//! integrals share a diagonal weight `c_i h`, which makes them exact discrete
//! duals of each other:
//!
//! ```text
//! Σ_i a_i · prefix(b)_i = Σ_j b_j · suffix(a)_j
//! ```

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Amplitudes below this are interpolated componentwise.
const PHASE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    n: usize,
    h: f64,
}

impl RadialGrid {
    pub fn new(n: usize, h: f64) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 4 nodes, got {n}"
            )));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid spacing must be positive, got {h}"
            )));
        }
        Ok(Self { n, h })
    }

    /// Grid with spacing `h` covering `(0, r_max]`, rounding the node count.
    pub fn with_extent(r_max: f64, h: f64) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "r_max must be positive, got {r_max}"
            )));
        }
        Self::new((r_max / h).round() as usize, h)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn r(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h
    }

    pub fn r_max(&self) -> f64 {
        self.n as f64 * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.r(i)).collect()
    }

    /// Quadrature weight `2π r_i h` of node `i`.
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        2.0 * PI * self.r(i) * self.h
    }

    /// Index of the first node with `r ≥ frac · r_max`.
    pub fn index_at_fraction(&self, frac: f64) -> usize {
        ((frac * self.n as f64).ceil() as usize).min(self.n)
    }

    /// Index of the first node with `r ≥ r`.
    pub fn index_at_radius(&self, r: f64) -> usize {
        if r <= self.r(0) {
            return 0;
        }
        (((r / self.h) - 0.5).ceil().max(0.0) as usize).min(self.n)
    }

    /// Midpoint rule for `∫ f dx = 2π ∫ f r dr`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.n);
        let mut sum = KahanSum::default();
        for (i, &v) in f.iter().enumerate() {
            sum.add(v * self.r(i));
        }
        2.0 * PI * self.h * sum.value()
    }

    /// Weight of the diagonal cell in prefix and suffix integrals,
    /// `c_i = (i + 1/4)/(2i + 1)`. This makes the prefix exact on integrands
    /// linear in `r`, the leading behaviour of `r|u|²` at the origin; the plain
    /// half weight leaves an `h²/8` offset there that `1/r` factors amplify.
    /// It tends to `1/2` away from the origin.
    #[inline]
    pub fn diagonal_weight(i: usize) -> f64 {
        (i as f64 + 0.25) / (2.0 * i as f64 + 1.0)
    }

    /// `∫_0^{r_i} g dr'` for every node.
    /// The caller supplies the full integrand (including any `r'` factor).
    pub fn prefix_integral(&self, g: &[f64]) -> Vec<f64> {
        debug_assert_eq!(g.len(), self.n);
        let mut out = Vec::with_capacity(self.n);
        let mut sum = KahanSum::default();
        for (i, &v) in g.iter().enumerate() {
            out.push(self.h * (sum.value() + Self::diagonal_weight(i) * v));
            sum.add(v);
        }
        out
    }

    /// `∫_{r_i}^{r_max} g dr'` for every node.
    pub fn suffix_integral(&self, g: &[f64]) -> Vec<f64> {
        debug_assert_eq!(g.len(), self.n);
        let mut out = vec![0.0; self.n];
        let mut sum = KahanSum::default();
        for i in (0..self.n).rev() {
            out[i] = self.h * (sum.value() + Self::diagonal_weight(i) * g[i]);
            sum.add(g[i]);
        }
        out
    }

    /// Full `∫_0^{r_max} g dr'`, the prefix integral evaluated at `r_max`.
    pub fn total_integral(&self, g: &[f64]) -> f64 {
        let mut sum = KahanSum::default();
        for &v in g {
            sum.add(v);
        }
        self.h * sum.value()
    }

    pub fn same_as(&self, other: &RadialGrid) -> bool {
        self.n == other.n && self.h.to_bits() == other.h.to_bits()
    }

    pub fn check_same(&self, other: &RadialGrid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "(n={}, h={}) vs (n={}, h={})",
                self.n, self.h, other.n, other.h
            )))
        }
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    #[inline]
    pub(crate) fn add(&mut self, v: f64) {
        let y = v - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.sum
    }
}

/// Real samples on a grid (gauge potentials, densities, real profiles).
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: RadialGrid,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.n()
            )));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_vec(grid: RadialGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        Self { grid, values }
    }

    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.n()).map(|i| f(grid.r(i))).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: RadialGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n()],
        }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn integrate(&self) -> f64 {
        self.grid.integrate(&self.values)
    }
}

impl std::ops::Index<usize> for RealField {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Complex radial profile `u(r)` of an m-equivariant field `u(r) e^{imθ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    grid: RadialGrid,
    m: i32,
    values: Vec<Complex64>,
}

impl RadialField {
    pub fn new(grid: RadialGrid, m: i32, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.n()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "non-finite value at node {i}"
            )));
        }
        Ok(Self { grid, m, values })
    }

    pub(crate) fn from_vec(grid: RadialGrid, m: i32, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        Self { grid, m, values }
    }

    pub fn zeros(grid: RadialGrid, m: i32) -> Self {
        Self {
            grid,
            m,
            values: vec![Complex64::new(0.0, 0.0); grid.n()],
        }
    }

    pub fn from_fn(grid: RadialGrid, m: i32, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.n()).map(|i| f(grid.r(i))).collect();
        Self { grid, m, values }
    }

    pub fn from_real_fn(grid: RadialGrid, m: i32, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, m, |r| Complex64::new(f(r), 0.0))
    }

    pub fn from_real(field: &RealField, m: i32) -> Self {
        Self {
            grid: field.grid,
            m,
            values: field.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    #[inline]
    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    #[inline]
    pub fn m(&self) -> i32 {
        self.m
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn check_compatible(&self, other: &RadialField) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        if self.m != other.m {
            return Err(Error::IndexMismatch {
                left: self.m,
                right: other.m,
            });
        }
        Ok(())
    }

    pub fn with_m(mut self, m: i32) -> Self {
        self.m = m;
        self
    }

    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| f(self.grid.r(i), v))
            .collect();
        Self {
            grid: self.grid,
            m: self.m,
            values,
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|_, v| v * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.map(|_, v| v * c)
    }

    /// Pointwise product with a real profile `w(r)`.
    pub fn times_fn(&self, w: impl Fn(f64) -> f64) -> Self {
        self.map(|r, v| v * w(r))
    }

    pub fn mul_real(&self, w: &[f64]) -> Self {
        debug_assert_eq!(w.len(), self.values.len());
        let values = self.values.iter().zip(w).map(|(&v, &s)| v * s).collect();
        Self {
            grid: self.grid,
            m: self.m,
            values,
        }
    }

    pub fn abs_sq(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn im(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.im).collect()
    }

    /// Zero the field on `r ≥ radius`.
    pub fn truncated_beyond(&self, radius: f64) -> Self {
        self.map(|r, v| if r >= radius { Complex64::new(0.0, 0.0) } else { v })
    }

    /// Zero the field on `r < radius`.
    pub fn restricted_from(&self, radius: f64) -> Self {
        self.map(|r, v| if r < radius { Complex64::new(0.0, 0.0) } else { v })
    }

    /// `(−1)^m`, the reflection sign of the profile across the origin.
    pub fn parity(&self) -> f64 {
        parity_sign(self.m)
    }

    /// Extended sample access: parity ghosts for `j < 0`, zeros past the end.
    fn ext(&self, j: isize) -> Complex64 {
        if j < 0 {
            let k = (-1 - j) as usize;
            if k < self.values.len() {
                self.values[k] * self.parity()
            } else {
                Complex64::new(0.0, 0.0)
            }
        } else if (j as usize) < self.values.len() {
            self.values[j as usize]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Interpolated value at radius `x ≥ 0`.
    ///
    /// Cubic Hermite in amplitude and unwrapped phase away from the origin,
    /// componentwise cubic next to the parity ghosts and componentwise linear
    /// when an amplitude falls below [`PHASE_FLOOR`]. Zero for `x ≥ r_max`.
    pub fn sample_at(&self, x: f64) -> Complex64 {
        let x = x.abs();
        if x >= self.grid.r_max() {
            return Complex64::new(0.0, 0.0);
        }
        let s = x / self.grid.h() - 0.5;
        let j = s.floor() as isize;
        let t = s - j as f64;
        let f0 = self.ext(j);
        let f1 = self.ext(j + 1);
        if f0.norm() < PHASE_FLOOR || f1.norm() < PHASE_FLOOR {
            return f0 * (1.0 - t) + f1 * t;
        }
        let fm = self.ext(j - 1);
        let f2 = self.ext(j + 2);
        if j < 1 || fm.norm() < PHASE_FLOOR || f2.norm() < PHASE_FLOOR {
            return Complex64::new(
                catmull_rom(fm.re, f0.re, f1.re, f2.re, t),
                catmull_rom(fm.im, f0.im, f1.im, f2.im, t),
            );
        }
        let amp = catmull_rom(fm.norm(), f0.norm(), f1.norm(), f2.norm(), t);
        let ph1 = (f1 / f0).arg();
        let phm = -(f0 / fm).arg();
        let ph2 = ph1 + (f2 / f1).arg();
        let phase = f0.arg() + catmull_rom(phm, 0.0, ph1, ph2, t);
        Complex64::from_polar(amp, phase)
    }
}

impl std::ops::Index<usize> for RadialField {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.values[i]
    }
}

fn zip_with(a: &RadialField, b: &RadialField, f: impl Fn(Complex64, Complex64) -> Complex64) -> RadialField {
    assert!(a.grid.same_as(&b.grid), "grid mismatch in field arithmetic");
    let values = a.values.iter().zip(&b.values).map(|(&x, &y)| f(x, y)).collect();
    RadialField {
        grid: a.grid,
        m: a.m,
        values,
    }
}

impl Add for &RadialField {
    type Output = RadialField;
    fn add(self, rhs: &RadialField) -> RadialField {
        zip_with(self, rhs, |x, y| x + y)
    }
}

impl Sub for &RadialField {
    type Output = RadialField;
    fn sub(self, rhs: &RadialField) -> RadialField {
        zip_with(self, rhs, |x, y| x - y)
    }
}

impl Neg for &RadialField {
    type Output = RadialField;
    fn neg(self) -> RadialField {
        self.scale_real(-1.0)
    }
}

impl Mul<f64> for &RadialField {
    type Output = RadialField;
    fn mul(self, c: f64) -> RadialField {
        self.scale_real(c)
    }
}

impl Mul<Complex64> for &RadialField {
    type Output = RadialField;
    fn mul(self, c: Complex64) -> RadialField {
        self.scale(c)
    }
}

#[inline]
pub(crate) fn parity_sign(m: i32) -> f64 {
    if m.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

#[inline]
fn catmull_rom(pm: f64, p0: f64, p1: f64, p2: f64, t: f64) -> f64 {
    let m0 = 0.5 * (p1 - pm);
    let m1 = 0.5 * (p2 - p0);
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * p0
        + (t3 - 2.0 * t2 + t) * m0
        + (-2.0 * t3 + 3.0 * t2) * p1
        + (t3 - t2) * m1
}

/// `(f, g)_r = ∫ Re(f̄ g)`.
pub fn inner_real(f: &RadialField, g: &RadialField) -> Result<f64> {
    f.grid.check_same(&g.grid)?;
    Ok(inner_unchecked(f, g))
}

pub(crate) fn inner_unchecked(f: &RadialField, g: &RadialField) -> f64 {
    let grid = &f.grid;
    let mut sum = KahanSum::default();
    for (i, (a, b)) in f.values.iter().zip(&g.values).enumerate() {
        sum.add((a.re * b.re + a.im * b.im) * grid.r(i));
    }
    2.0 * PI * grid.h() * sum.value()
}

/// Integral of the samples against `2π r dr`.
pub fn integrate(grid: &RadialGrid, f: &[f64]) -> f64 {
    grid.integrate(f)
}

/// Central differences with a parity ghost at the origin and a one-sided
/// second-order stencil at the last node.
pub(crate) fn diff_slice<T>(grid: &RadialGrid, m: i32, f: &[T]) -> Vec<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let n = f.len();
    let inv2h = 0.5 / grid.h();
    let mut out = Vec::with_capacity(n);
    let ghost = f[0] * parity_sign(m);
    out.push((f[1] - ghost) * inv2h);
    for i in 1..n - 1 {
        out.push((f[i + 1] - f[i - 1]) * inv2h);
    }
    out.push((f[n - 1] * 3.0 - f[n - 2] * 4.0 + f[n - 3]) * inv2h);
    out
}

/// `½‖f‖²_{Ḣ¹_m}` with staggered differences,
/// `π Σ r_{i+½}|f_{i+1} − f_i|²/h + π h Σ m²|f_i|²/r_i`. This is
/// `½⟨−Δ^{(m)} f, f⟩` for the integrator's flux-form Laplacian.
pub fn staggered_quadratic_form(f: &RadialField) -> f64 {
    let g = f.grid;
    let h = g.h();
    let m2 = (f.m as f64).powi(2);
    let v = &f.values;
    let mut s = KahanSum::default();
    for i in 0..g.n() {
        let r = g.r(i);
        if i + 1 < g.n() {
            s.add((r + 0.5 * h) * (v[i + 1] - v[i]).norm_sqr() / h);
        }
        s.add(h * m2 * v[i].norm_sqr() / r);
    }
    PI * s.value()
}

/// `∂_r f`.
pub fn differentiate(f: &RadialField) -> RadialField {
    RadialField {
        grid: f.grid,
        m: f.m,
        values: diff_slice(&f.grid, f.m, &f.values),
    }
}

/// `∂_r` of a real profile carrying equivariance index `m` (for the ghost).
pub fn differentiate_real(grid: &RadialGrid, m: i32, f: &[f64]) -> Vec<f64> {
    diff_slice(grid, m, f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    L2,
    Hdot1,
    Adapted,
    H11,
    Minus1,
}

impl std::str::FromStr for NormKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" => Ok(Self::L2),
            "hdot1" | "hdot1_m" => Ok(Self::Hdot1),
            "adapted" | "adaptedh1" => Ok(Self::Adapted),
            "h11" => Ok(Self::H11),
            "minus1" => Ok(Self::Minus1),
            other => Err(Error::InvalidArgument(format!("unknown norm kind {other:?}"))),
        }
    }
}

/// `⟨log₋ r⟩ = (1 + max(−log r, 0)²)^{1/2}`.
#[inline]
pub fn bracket_log_minus(r: f64) -> f64 {
    let l = (-r.ln()).max(0.0);
    (1.0 + l * l).sqrt()
}

fn l2_sq(grid: &RadialGrid, f: impl Fn(usize) -> f64) -> f64 {
    let vals: Vec<f64> = (0..grid.n()).map(f).collect();
    grid.integrate(&vals)
}

pub fn norm(f: &RadialField, kind: NormKind) -> f64 {
    let grid = f.grid;
    let m = f.m as f64;
    let l2 = || l2_sq(&grid, |i| f.values[i].norm_sqr());
    let hdot1_sq = |df: &RadialField| {
        l2_sq(&grid, |i| {
            let r = grid.r(i);
            df.values[i].norm_sqr() + m * m * f.values[i].norm_sqr() / (r * r)
        })
    };
    match kind {
        NormKind::L2 => l2().sqrt(),
        NormKind::Hdot1 => hdot1_sq(&differentiate(f)).sqrt(),
        NormKind::Adapted => {
            let df = differentiate(f);
            if f.m != 0 {
                hdot1_sq(&df).sqrt()
            } else {
                let grad = l2_sq(&grid, |i| df.values[i].norm_sqr()).sqrt();
                let hardy = l2_sq(&grid, |i| {
                    let r = grid.r(i);
                    let w = 1.0 / (bracket_log_minus(r) * r);
                    w * w * f.values[i].norm_sqr()
                })
                .sqrt();
                grad + hardy
            }
        }
        NormKind::H11 => {
            let weighted = l2_sq(&grid, |i| {
                let r = grid.r(i);
                r * r * f.values[i].norm_sqr()
            });
            (l2() + hdot1_sq(&differentiate(f)) + weighted).sqrt()
        }
        NormKind::Minus1 => {
            let df = differentiate(f);
            l2_sq(&grid, |i| {
                let a = df.values[i].norm();
                let b = f.values[i].norm() / grid.r(i);
                let v = a.max(b);
                v * v
            })
            .sqrt()
        }
    }
}

/// `‖⟨log₋ r⟩^{−1/2} f‖_{L∞}`.
pub fn weighted_log_sup(f: &RadialField) -> f64 {
    f.values
        .iter()
        .enumerate()
        .map(|(i, v)| v.norm() / bracket_log_minus(f.grid.r(i)).sqrt())
        .fold(0.0, f64::max)
}

/// Fraction of the mass of `f` carried by the outer `frac` of the domain.
pub fn outer_mass_fraction(f: &RadialField, frac: f64) -> f64 {
    let dens = f.abs_sq();
    let total = f.grid.integrate(&dens);
    if total == 0.0 {
        return 0.0;
    }
    let start = f.grid.index_at_fraction(1.0 - frac);
    let outer: Vec<f64> = dens
        .iter()
        .enumerate()
        .map(|(i, &v)| if i >= start { v } else { 0.0 })
        .collect();
    f.grid.integrate(&outer) / total
}

/// L² norm restricted to `r < radius`.
pub fn l2_norm_within(f: &RadialField, radius: f64) -> f64 {
    norm(&f.truncated_beyond(radius), NormKind::L2)
}

/// Observed convergence order from errors at successive refinement levels
/// with a constant refinement factor.
pub fn observed_orders(errors: &[f64], factor: f64) -> Vec<f64> {
    errors
        .windows(2)
        .map(|w| (w[0] / w[1]).ln() / factor.ln())
        .collect()
}
