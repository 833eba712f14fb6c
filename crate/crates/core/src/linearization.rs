//! Linearized Bogomol'nyi operator around `Q`
//!
//! ```text
//! L_Q ε  = 𝐃_Q ε − (2/r) A_θ[Q, ε] Q
//! L_Q* v = 𝐃_Q* v + Q ∫_r^∞ Re(Q̄ v) dr'
//! 𝓛_Q    = L_Q* L_Q
//! ```
//!
//! `L_Q*` is built as the exact adjoint of the discrete `L_Q` in the discrete
//! real inner product, so adjointness and the symmetry of `𝓛_Q` hold to
//! rounding. All operators are only ℝ-linear; matrices act on interleaved
//! `(Re, Im)` vectors of length `2n`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gauge;
use crate::grid::{self, bracket_log_minus, parity_sign, NormKind, RadialField, RadialGrid};
use crate::profiles;
use crate::soliton;

/// Rayleigh quotients ignore the outer part of the domain beyond this fraction.
pub const SUPPORT_FRACTION: f64 = 0.9;

/// Largest grid for which dense matrices are assembled.
pub const MAX_DENSE_NODES: usize = 4000;

/// `Q` and `A_θ[Q]` on a grid, with the operators built from them.
#[derive(Debug, Clone)]
pub struct LinearizedOperator {
    grid: RadialGrid,
    m: i32,
    q: RadialField,
    a_q: Vec<f64>,
}

impl LinearizedOperator {
    pub fn new(m: i32, grid: RadialGrid) -> Result<Self> {
        let q = soliton::q_profile(m, grid)?;
        let a_q = gauge::a_theta(&q).into_values();
        Ok(Self { grid, m, q, a_q })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    pub fn q(&self) -> &RadialField {
        &self.q
    }

    fn check(&self, f: &RadialField) -> Result<()> {
        self.q.check_compatible(f)
    }

    /// `L_Q ε`.
    pub fn l_q(&self, eps: &RadialField) -> Result<RadialField> {
        self.check(eps)?;
        Ok(self.l_q_unchecked(eps))
    }

    fn l_q_unchecked(&self, eps: &RadialField) -> RadialField {
        let grid = self.grid;
        let m = self.m as f64;
        let df = lq_derivative(&grid, self.m, eps.values());
        let pol: Vec<f64> = eps
            .values()
            .iter()
            .zip(self.q.values())
            .map(|(e, q)| q.re * e.re + q.im * e.im)
            .collect();
        let a_pol = gauge::a_theta_of_density(&grid, &pol);
        let values = (0..grid.n())
            .map(|i| {
                let r = grid.r(i);
                df[i] - eps[i] * ((m + self.a_q[i]) / r) - self.q[i] * (2.0 * a_pol[i] / r)
            })
            .collect();
        RadialField::from_vec(grid, self.m, values)
    }

    /// `L_Q* v`, the discrete adjoint of [`Self::l_q`].
    pub fn l_q_star(&self, v: &RadialField) -> Result<RadialField> {
        self.check(v)?;
        Ok(self.l_q_star_unchecked(v))
    }

    fn l_q_star_unchecked(&self, v: &RadialField) -> RadialField {
        let grid = self.grid;
        let m = self.m as f64;
        let dt = lq_derivative_adjoint(&grid, self.m, v.values());
        let pol: Vec<f64> = v
            .values()
            .iter()
            .zip(self.q.values())
            .map(|(a, q)| q.re * a.re + q.im * a.im)
            .collect();
        let tail = grid.suffix_integral(&pol);
        let values = (0..grid.n())
            .map(|i| {
                let r = grid.r(i);
                dt[i] - v[i] * ((m + self.a_q[i]) / r) + self.q[i] * tail[i]
            })
            .collect();
        RadialField::from_vec(grid, self.m, values)
    }

    /// `𝓛_Q ε = L_Q* L_Q ε`.
    pub fn cal_l_q(&self, eps: &RadialField) -> Result<RadialField> {
        self.check(eps)?;
        Ok(self.l_q_star_unchecked(&self.l_q_unchecked(eps)))
    }

    /// Dense real matrix of one of the operators on interleaved vectors.
    pub fn operator_matrix(&self, which: OperatorKind) -> Result<LinearOperatorMatrix> {
        let n = self.grid.n();
        if n > MAX_DENSE_NODES {
            return Err(Error::InvalidArgument(format!(
                "dense assembly limited to {MAX_DENSE_NODES} nodes, grid has {n}"
            )));
        }
        let dim = 2 * n;
        let mut mat = DMatrix::<f64>::zeros(dim, dim);
        let mut basis = RadialField::zeros(self.grid, self.m);
        for col in 0..dim {
            let (node, unit) = (col / 2, if col % 2 == 0 { Complex64::new(1.0, 0.0) } else { Complex64::i() });
            basis.values_mut()[node] = unit;
            let out = match which {
                OperatorKind::LQ => self.l_q_unchecked(&basis),
                OperatorKind::LQStar => self.l_q_star_unchecked(&basis),
                OperatorKind::CalLQ => self.l_q_star_unchecked(&self.l_q_unchecked(&basis)),
            };
            basis.values_mut()[node] = Complex64::new(0.0, 0.0);
            for (i, v) in out.values().iter().enumerate() {
                mat[(2 * i, col)] = v.re;
                mat[(2 * i + 1, col)] = v.im;
            }
        }
        Ok(LinearOperatorMatrix {
            which,
            grid: self.grid,
            m: self.m,
            matrix: mat,
        })
    }

    /// Residuals of the generalized kernel relations.
    pub fn kernel_relations(&self, rho: &RadialField) -> Result<Vec<KernelRelation>> {
        self.check(rho)?;
        let grid = self.grid;
        let mf = self.m as f64;
        let i = Complex64::i();
        let q = &self.q;
        let lq = soliton::lambda_q_profile(self.m, grid)?;
        let iq = q.scale(i);
        let i_r2q = q.times_fn(|r| r * r / 4.0).scale(i);
        let i_rq = q.times_fn(|r| r / 2.0).scale(i);
        let rq_scaled = q.times_fn(|r| r / (2.0 * (mf + 1.0)));
        let zero = RadialField::zeros(grid, self.m);
        let window = SUPPORT_FRACTION * grid.r_max();
        // The tail integral in L_Q* stops at r_max. On rQ/(2(m+1)) the missing
        // piece ∫_{r_max}^∞ Re(Q̄ rQ)/(2(m+1)) dr is 2/(1 + r_max^{2m+2}).
        let q_box = q.scale(Complex64::new(1.0 - 2.0 / (1.0 + grid.r_max().powf(2.0 * mf + 2.0)), 0.0));
        let iq_box = q_box.scale(i);

        let mut out = Vec::new();
        let mut push = |name: &'static str, input: &RadialField, image: RadialField, expected: &RadialField| {
            let res = &image - expected;
            let num = grid::l2_norm_within(&res, window);
            let exp_norm = grid::l2_norm_within(expected, window);
            let scale = if exp_norm > 0.0 {
                exp_norm
            } else {
                grid::norm(&input.truncated_beyond(window), NormKind::Hdot1)
            };
            out.push(KernelRelation {
                name,
                residual: num,
                scale,
            });
        };
        push("L_Q(ΛQ) = 0", &lq, self.l_q_unchecked(&lq), &zero);
        push("L_Q(iQ) = 0", &iq, self.l_q_unchecked(&iq), &zero);
        push("L_Q(i r²/4 Q) = i r/2 Q", &i_r2q, self.l_q_unchecked(&i_r2q), &i_rq);
        push("L_Q ρ = r Q/(2(m+1))", rho, self.l_q_unchecked(rho), &rq_scaled);
        push("L_Q*(i r/2 Q) = −iΛQ", &i_rq, self.l_q_star_unchecked(&i_rq), &lq.scale(-i));
        push("L_Q*(r Q/(2(m+1))) = Q", &rq_scaled, self.l_q_star_unchecked(&rq_scaled), &q_box);
        // i𝓛_Q relations.
        let il = |f: &RadialField| self.l_q_star_unchecked(&self.l_q_unchecked(f)).scale(i);
        push("i𝓛_Q(ΛQ) = 0", &lq, il(&lq), &zero);
        push("i𝓛_Q(iQ) = 0", &iq, il(&iq), &zero);
        push("i𝓛_Q(i r²/4 Q) = ΛQ", &i_r2q, il(&i_r2q), &lq);
        push("i𝓛_Q ρ = iQ", rho, il(rho), &iq_box);
        Ok(out)
    }
}

/// Coefficients on `(f_{i−1}, f_i, f_{i+1})` of the derivative used by `L_Q`
/// in row `i < n − 1`. Off `m = 0` this is the central stencil with the parity
/// ghost folded into row 0. For `m = 0`, with `ρ = r_i/h`,
///
/// ```text
/// (∂_r f)_i = [(ρ−¼)(ρ+½)(f_{i+1} − f_i) + (ρ+¼)(ρ−½)(f_i − f_{i−1})] / (2ρ²h)
/// ```
///
/// which is exact on `1` and `r²`, and whose weighted transpose is exact on
/// `r`, so `L_Q*` stays consistent at the origin on the `m + 1` sector. The
/// central stencil's transpose is off by O(1) in the first cell there.
fn lq_stencil(grid: &RadialGrid, m: i32, i: usize) -> [f64; 3] {
    let h = grid.h();
    if m == 0 {
        let rho = i as f64 + 0.5;
        let outer = (rho - 0.25) * (rho + 0.5) / (2.0 * rho * rho * h);
        let inner = (rho + 0.25) * (rho - 0.5) / (2.0 * rho * rho * h);
        [-inner, inner - outer, outer]
    } else {
        let c = 0.5 / h;
        if i == 0 {
            [0.0, -parity_sign(m) * c, c]
        } else {
            [-c, 0.0, c]
        }
    }
}

/// The `L_Q` derivative. The last row is the one-sided second-order stencil.
fn lq_derivative(grid: &RadialGrid, m: i32, f: &[Complex64]) -> Vec<Complex64> {
    let n = f.len();
    let c = 0.5 / grid.h();
    let mut out: Vec<Complex64> = (0..n - 1)
        .map(|i| {
            let [lo, di, up] = lq_stencil(grid, m, i);
            let below = if i == 0 { Complex64::new(0.0, 0.0) } else { f[i - 1] * lo };
            below + f[i] * di + f[i + 1] * up
        })
        .collect();
    out.push((f[n - 1] * 3.0 - f[n - 2] * 4.0 + f[n - 3]) * c);
    out
}

/// Transpose of [`lq_derivative`] in the weighted inner product:
/// `(D^† v)_j = (1/r_j) Σ_i D_ij r_i v_i`.
fn lq_derivative_adjoint(grid: &RadialGrid, m: i32, v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    let c = 0.5 / grid.h();
    let y: Vec<Complex64> = v.iter().enumerate().map(|(i, &x)| x * grid.r(i)).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n - 1 {
        let [lo, di, up] = lq_stencil(grid, m, i);
        if i > 0 {
            out[i - 1] += y[i] * lo;
        }
        out[i] += y[i] * di;
        out[i + 1] += y[i] * up;
    }
    out[n - 1] += y[n - 1] * (3.0 * c);
    out[n - 2] += y[n - 1] * (-4.0 * c);
    out[n - 3] += y[n - 1] * c;
    for (j, o) in out.iter_mut().enumerate() {
        *o /= grid.r(j);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    LQ,
    LQStar,
    CalLQ,
}

#[derive(Debug, Clone)]
pub struct KernelRelation {
    pub name: &'static str,
    pub residual: f64,
    pub scale: f64,
}

impl KernelRelation {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.residual / self.scale
        } else {
            self.residual
        }
    }
}

/// Dense real matrix of an ℝ-linear operator on interleaved `(Re, Im)` vectors.
#[derive(Debug, Clone)]
pub struct LinearOperatorMatrix {
    pub which: OperatorKind,
    pub grid: RadialGrid,
    pub m: i32,
    pub matrix: DMatrix<f64>,
}

impl LinearOperatorMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matvec(&self, f: &RadialField) -> RadialField {
        let out = &self.matrix * interleave(f);
        deinterleave(&out, self.grid, self.m)
    }

    /// `W M` with `W` the quadrature weights: symmetric exactly when `M` is
    /// self-adjoint in the real inner product.
    pub fn weighted_form(&self) -> DMatrix<f64> {
        let mut out = self.matrix.clone();
        for row in 0..out.nrows() {
            let w = self.grid.weight(row / 2);
            for v in out.row_mut(row).iter_mut() {
                *v *= w;
            }
        }
        out
    }
}

pub fn interleave(f: &RadialField) -> DVector<f64> {
    let mut v = DVector::zeros(2 * f.values().len());
    for (i, c) in f.values().iter().enumerate() {
        v[2 * i] = c.re;
        v[2 * i + 1] = c.im;
    }
    v
}

pub fn deinterleave(v: &DVector<f64>, grid: RadialGrid, m: i32) -> RadialField {
    let values = (0..grid.n()).map(|i| Complex64::new(v[2 * i], v[2 * i + 1])).collect();
    RadialField::from_vec(grid, m, values)
}

/// Regular solution `ρ` of `L_Q ρ = r Q/(2(m+1))`.
#[derive(Debug, Clone)]
pub struct RhoProfile {
    pub rho: RadialField,
    /// Leading series coefficient `c` of `ρ ~ c r^{m+2}` at the origin.
    pub seed_coefficient: f64,
    /// `‖L_Q ρ − rQ/(2(m+1))‖ / ‖rQ‖` on the inner window.
    pub relative_residual: f64,
}

/// Integrates the first-order system
///
/// ```text
/// ρ' = ((m + A_θ[Q])/r) ρ + (2/r) P Q + r Q/(2(m+1))
/// P' = −½ Q ρ r                                   (P = A_θ[Q, ρ])
/// ```
///
/// outward with RK4 from the regular branch `ρ ~ r^{m+2}/√2` (no `r^m`
/// component, which would add a multiple of `ΛQ`).
pub fn rho_profile(m: i32, grid: RadialGrid) -> Result<RhoProfile> {
    let mu = u32::try_from(m)
        .map_err(|_| Error::InvalidArgument(format!("ρ is defined for m ≥ 0, got {m}")))?;
    let mf = mu as f64;
    let rhs = |r: f64, y: [f64; 2]| -> [f64; 2] {
        let q = profiles::q(mu, r);
        let a = profiles::a_theta_q(mu, r);
        [
            ((mf + a) / r) * y[0] + (2.0 / r) * y[1] * q + r * q / (2.0 * (mf + 1.0)),
            -0.5 * q * y[0] * r,
        ]
    };
    let rk4 = |r: f64, y: [f64; 2], dr: f64| -> [f64; 2] {
        let k1 = rhs(r, y);
        let k2 = rhs(r + 0.5 * dr, [y[0] + 0.5 * dr * k1[0], y[1] + 0.5 * dr * k1[1]]);
        let k3 = rhs(r + 0.5 * dr, [y[0] + 0.5 * dr * k2[0], y[1] + 0.5 * dr * k2[1]]);
        let k4 = rhs(r + dr, [y[0] + dr * k3[0], y[1] + dr * k3[1]]);
        [
            y[0] + dr / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + dr / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ]
    };

    let c = std::f64::consts::FRAC_1_SQRT_2;
    let amp = 2.0 * std::f64::consts::SQRT_2 * (mf + 1.0);
    let r0 = grid.r(0);
    let mut r = 1e-3 * r0;
    let mut y = [
        c * r.powf(mf + 2.0),
        -0.5 * amp * c * r.powf(2.0 * mf + 4.0) / (2.0 * mf + 4.0),
    ];
    // Geometric steps up to the first node.
    let steps = 80;
    let ratio = (r0 / r).powf(1.0 / steps as f64);
    for _ in 0..steps {
        let next = if r * ratio > r0 { r0 } else { r * ratio };
        y = rk4(r, y, next - r);
        r = next;
    }
    let sub = 4;
    let mut values = Vec::with_capacity(grid.n());
    values.push(Complex64::new(y[0], 0.0));
    for i in 1..grid.n() {
        let start = grid.r(i - 1);
        let dr = grid.h() / sub as f64;
        for k in 0..sub {
            y = rk4(start + k as f64 * dr, y, dr);
        }
        if !(y[0].is_finite() && y[1].is_finite()) {
            return Err(Error::Shooting(format!(
                "non-finite ρ at r = {:.4} (node {i})",
                grid.r(i)
            )));
        }
        values.push(Complex64::new(y[0], 0.0));
    }
    let rho = RadialField::from_vec(grid, m, values);

    let op = LinearizedOperator::new(m, grid)?;
    let target = op.q.times_fn(|r| r / (2.0 * (mf + 1.0)));
    let window = SUPPORT_FRACTION * grid.r_max();
    let res = &op.l_q_unchecked(&rho) - &target;
    let rq = op.q.times_fn(|r| r);
    let relative_residual = grid::l2_norm_within(&res, window) / grid::l2_norm_within(&rq, window);
    if !relative_residual.is_finite() {
        return Err(Error::Shooting(format!(
            "residual is not finite ({relative_residual})"
        )));
    }
    Ok(RhoProfile {
        rho,
        seed_coefficient: c,
        relative_residual,
    })
}

/// Smallest and largest constrained Rayleigh quotients of
/// `‖L_Q f‖²_{L²} / ‖f‖²_{𝓗̇¹_m}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoercivityBounds {
    pub c_low: f64,
    pub c_high: f64,
    /// Dimension of the reduced eigenproblem.
    pub dim: usize,
}

/// Quadratic form of the adapted norm on interleaved vectors. For `m = 0` it
/// is the square-sum `‖∂_r f‖² + ‖⟨log₋ r⟩^{−1} r^{−1} f‖²`, within a factor 2
/// of the squared norm.
fn adapted_form(grid: &RadialGrid, m: i32, support: usize) -> DMatrix<f64> {
    let n = grid.n();
    let dim = 2 * support;
    // Differentiation acts on Re and Im parts independently.
    let mut d = DMatrix::<f64>::zeros(2 * n, dim);
    let c = 0.5 / grid.h();
    let s = parity_sign(m);
    let mut put = |row: usize, col: usize, v: f64| {
        if col < support {
            for k in 0..2 {
                d[(2 * row + k, 2 * col + k)] += v;
            }
        }
    };
    put(0, 1, c);
    put(0, 0, -s * c);
    for i in 1..n - 1 {
        put(i, i + 1, c);
        put(i, i - 1, -c);
    }
    put(n - 1, n - 1, 3.0 * c);
    put(n - 1, n - 2, -4.0 * c);
    put(n - 1, n - 3, c);
    let w = DVector::from_iterator(2 * n, (0..2 * n).map(|k| grid.weight(k / 2)));
    let wd = DMatrix::from_fn(2 * n, dim, |i, j| w[i] * d[(i, j)]);
    let mut b = d.transpose() * wd;
    let mf = m as f64;
    for k in 0..dim {
        let r = grid.r(k / 2);
        let pot = if m != 0 {
            mf * mf / (r * r)
        } else {
            let l = bracket_log_minus(r);
            1.0 / (l * l * r * r)
        };
        b[(k, k)] += grid.weight(k / 2) * pot;
    }
    b
}

/// Basis of the null space of a few linear constraints via elimination with
/// full pivoting: columns of `E` span `{x : C x = 0}`.
fn constraint_basis(c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let k = c.nrows();
    let d = c.ncols();
    let mut a = c.clone();
    let mut pivots = Vec::with_capacity(k);
    for row in 0..k {
        let (mut best, mut bi, mut bj) = (0.0, row, 0);
        for i in row..k {
            for j in 0..d {
                if pivots.contains(&j) {
                    continue;
                }
                if a[(i, j)].abs() > best {
                    best = a[(i, j)].abs();
                    bi = i;
                    bj = j;
                }
            }
        }
        if best == 0.0 {
            return Err(Error::InvalidArgument("linearly dependent constraints".into()));
        }
        a.swap_rows(row, bi);
        let p = a[(row, bj)];
        for j in 0..d {
            a[(row, j)] /= p;
        }
        for i in 0..k {
            if i != row {
                let f = a[(i, bj)];
                if f != 0.0 {
                    for j in 0..d {
                        a[(i, j)] -= f * a[(row, j)];
                    }
                }
            }
        }
        pivots.push(bj);
    }
    let free: Vec<usize> = (0..d).filter(|j| !pivots.contains(j)).collect();
    let mut e = DMatrix::<f64>::zeros(d, free.len());
    for (col, &j) in free.iter().enumerate() {
        e[(j, col)] = 1.0;
        for (row, &p) in pivots.iter().enumerate() {
            e[(p, col)] = -a[(row, j)];
        }
    }
    Ok(e)
}

/// Generalized eigenvalues of `(E^T A E, E^T B E)`, ascending.
fn generalized_eigenvalues(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Vec<f64>> {
    let chol = b.clone().cholesky().ok_or(Error::NonConvergence {
        what: "Cholesky factorization of the norm form",
        iterations: 0,
        residual: f64::NAN,
    })?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(a)
        .ok_or_else(|| Error::LinearSolve("triangular solve".into()))?;
    let c = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::LinearSolve("triangular solve".into()))?;
    let sym = (&c + c.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::try_new(sym, 1e-14, 10_000).ok_or(Error::NonConvergence {
        what: "symmetric eigensolver",
        iterations: 10_000,
        residual: f64::NAN,
    })?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(vals)
}

/// Transversality determinant
/// `det [[(ΛQ,𝒵₁), (iQ,𝒵₁)], [(ΛQ,𝒵₂), (iQ,𝒵₂)]]` and its scale.
pub fn transversality_determinant(m: i32, z1: &RadialField, z2: &RadialField) -> Result<(f64, f64)> {
    let grid = *z1.grid();
    let lq = soliton::lambda_q_profile(m, grid)?;
    let iq = soliton::q_profile(m, grid)?.scale(Complex64::i());
    let a = grid::inner_real(&lq, z1)?;
    let b = grid::inner_real(&iq, z1)?;
    let c = grid::inner_real(&lq, z2)?;
    let d = grid::inner_real(&iq, z2)?;
    let scale = grid::norm(&lq, NormKind::L2).max(grid::norm(&iq, NormKind::L2)).powi(2)
        * grid::norm(z1, NormKind::L2)
        * grid::norm(z2, NormKind::L2)
        / (grid::norm(&lq, NormKind::L2) * grid::norm(&iq, NormKind::L2)).max(1e-300);
    Ok((a * d - b * c, scale))
}

impl LinearizedOperator {
    fn rayleigh_bounds(&self, constraints: &[&RadialField]) -> Result<CoercivityBounds> {
        let grid = self.grid;
        let support = grid.index_at_fraction(SUPPORT_FRACTION);
        let dim = 2 * support;
        let lmat = self.operator_matrix(OperatorKind::LQ)?.matrix;
        let l_s = lmat.columns(0, dim).into_owned();
        let w = DVector::from_iterator(2 * grid.n(), (0..2 * grid.n()).map(|k| grid.weight(k / 2)));
        let wl = DMatrix::from_fn(l_s.nrows(), dim, |i, j| w[i] * l_s[(i, j)]);
        let a = l_s.transpose() * wl;
        let b = adapted_form(&grid, self.m, support);
        let (a, b) = if constraints.is_empty() {
            (a, b)
        } else {
            let mut c = DMatrix::<f64>::zeros(constraints.len(), dim);
            for (k, z) in constraints.iter().enumerate() {
                self.check(z)?;
                for j in 0..support {
                    let wj = grid.weight(j);
                    c[(k, 2 * j)] = wj * z[j].re;
                    c[(k, 2 * j + 1)] = wj * z[j].im;
                }
            }
            let e = constraint_basis(&c)?;
            let et = e.transpose();
            (&et * a * &e, &et * b * &e)
        };
        let vals = generalized_eigenvalues(&a, &b)?;
        Ok(CoercivityBounds {
            c_low: vals[0],
            c_high: vals[vals.len() - 1],
            dim: vals.len(),
        })
    }

    /// Constrained coercivity bounds under `(f, 𝒵₁)_r = (f, 𝒵₂)_r = 0`, for
    /// fields supported in the inner [`SUPPORT_FRACTION`] of the domain.
    pub fn coercivity_constant(&self, z1: &RadialField, z2: &RadialField) -> Result<CoercivityBounds> {
        let (det, scale) = transversality_determinant(self.m, z1, z2)?;
        let threshold = 1e-6 * scale;
        if !(det.abs() > threshold) {
            return Err(Error::Transversality {
                det: det.abs(),
                threshold,
            });
        }
        self.rayleigh_bounds(&[z1, z2])
    }

    /// Same Rayleigh quotients with no constraints; the minimum sees the
    /// kernel `{ΛQ, iQ}`.
    pub fn unconstrained_bounds(&self) -> Result<CoercivityBounds> {
        self.rayleigh_bounds(&[])
    }

    /// `E[Q+ε] / ‖ε‖²_{𝓗̇¹_m}`.
    pub fn nonlinear_coercivity_ratio(&self, eps: &RadialField) -> Result<f64> {
        self.check(eps)?;
        let denom = grid::norm(eps, NormKind::Adapted);
        if denom == 0.0 {
            return Err(Error::InvalidArgument("ε = 0 has no coercivity ratio".into()));
        }
        let e = soliton::energy(&(&self.q + eps)).value();
        Ok(e / (denom * denom))
    }

    /// `‖1_{[R,∞)} (𝐃_Q − A_θ[ε]/r) f‖² / ‖1_{[R,∞)} |f|_{−1}‖²` after windowing
    /// `f ↦ (1 − χ_R) f`.
    pub fn nonlinear_hardy_ratio(&self, f: &RadialField, eps: &RadialField, radius: f64) -> Result<f64> {
        self.check(f)?;
        self.check(eps)?;
        let grid = self.grid;
        let fw = f.times_fn(|r| 1.0 - profiles::chi_r(radius, r));
        let a_eps = gauge::a_theta(eps);
        let combined: Vec<f64> = (0..grid.n()).map(|i| self.a_q[i] + a_eps[i]).collect();
        let op = soliton::covariant_cr_with(&combined, &fw);
        let dfw = grid::differentiate(&fw);
        let start = grid.index_at_radius(radius);
        let mut num = vec![0.0; grid.n()];
        let mut den = vec![0.0; grid.n()];
        for i in start..grid.n() {
            num[i] = op[i].norm_sqr();
            let v = dfw[i].norm().max(fw[i].norm() / grid.r(i));
            den[i] = v * v;
        }
        let den = grid.integrate(&den);
        if den == 0.0 {
            return Err(Error::InvalidArgument("f vanishes on [R, ∞)".into()));
        }
        Ok(grid.integrate(&num) / den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::inner_real;

    fn small_grid() -> RadialGrid {
        RadialGrid::with_extent(20.0, 0.1).unwrap()
    }

    fn bump(grid: RadialGrid, m: i32, center: f64, width: f64, phase: f64) -> RadialField {
        RadialField::from_fn(grid, m, move |r| {
            let x = (r - center) / width;
            let env = if x.abs() < 1.0 { (1.0 - x * x).powi(4) } else { 0.0 };
            Complex64::from_polar(env * r.powi(m.abs()), phase * r)
        })
    }

    #[test]
    fn adjoint_identity() {
        let g = RadialGrid::with_extent(30.0, 0.02).unwrap();
        for m in 0..3 {
            let op = LinearizedOperator::new(m, g).unwrap();
            let f = bump(g, m, 3.0, 2.5, 0.7);
            let v = bump(g, m, 4.0, 3.0, -0.4);
            let lhs = inner_real(&op.l_q(&f).unwrap(), &v).unwrap();
            let rhs = inner_real(&f, &op.l_q_star(&v).unwrap()).unwrap();
            let scale = grid::norm(&f, NormKind::Hdot1) * grid::norm(&v, NormKind::L2);
            assert!((lhs - rhs).abs() < 1e-12 * scale, "m={m}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn m0_stencil_is_exact_on_low_powers() {
        let g = RadialGrid::new(60, 0.1).unwrap();
        let field = |p: i32| -> Vec<Complex64> { (0..60).map(|i| Complex64::new(g.r(i).powi(p), 0.0)).collect() };
        for (p, want) in [(0, 0.0), (2, 2.0)] {
            let d = lq_derivative(&g, 0, &field(p));
            for i in 0..59 {
                let exact = want * g.r(i);
                assert!((d[i].re - exact).abs() < 1e-12, "r^{p} row {i}: {}", d[i].re);
            }
        }
        // −(1/r)∂_r(r · r) = −2 in every column untouched by the last row.
        let out = lq_derivative_adjoint(&g, 0, &field(1));
        for (j, o) in out.iter().enumerate().take(56) {
            assert!((o.re + 2.0).abs() < 1e-12, "column {j}: {}", o.re);
        }
    }

    #[test]
    fn ghost_stencil_off_m0() {
        let g = RadialGrid::new(50, 0.1).unwrap();
        let v: Vec<Complex64> = (0..50).map(|i| Complex64::new((i as f64 * 0.3).cos(), 0.1 * i as f64)).collect();
        for m in [1, 2, -1] {
            let d = lq_derivative(&g, m, &v);
            let reference = grid::differentiate(&RadialField::from_vec(g, m, v.clone()));
            for i in 0..50 {
                assert!((d[i] - reference[i]).norm() < 1e-12);
            }
            let out = lq_derivative_adjoint(&g, m, &v);
            let i = 10;
            let expected = -(v[i + 1] * g.r(i + 1) - v[i - 1] * g.r(i - 1)) / (2.0 * g.h() * g.r(i));
            assert!((out[i] - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn matrix_agrees_with_function_form() {
        let g = RadialGrid::with_extent(8.0, 0.1).unwrap();
        let op = LinearizedOperator::new(1, g).unwrap();
        let f = bump(g, 1, 2.0, 1.5, 0.3);
        for which in [OperatorKind::LQ, OperatorKind::LQStar, OperatorKind::CalLQ] {
            let mat = op.operator_matrix(which).unwrap();
            let direct = match which {
                OperatorKind::LQ => op.l_q(&f).unwrap(),
                OperatorKind::LQStar => op.l_q_star(&f).unwrap(),
                OperatorKind::CalLQ => op.cal_l_q(&f).unwrap(),
            };
            let scale = direct.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
            let mv = mat.matvec(&f);
            for i in 0..g.n() {
                assert!((mv[i] - direct[i]).norm() <= 1e-12 * scale);
            }
        }
        let cal = op.operator_matrix(OperatorKind::CalLQ).unwrap().weighted_form();
        let asym = (&cal - cal.transpose()).amax();
        assert!(asym <= 1e-10 * cal.amax(), "{asym}");
        let lq = soliton::lambda_q_profile(1, g).unwrap();
        let out = op.operator_matrix(OperatorKind::LQ).unwrap().matvec(&lq);
        assert!(grid::norm(&out.truncated_beyond(7.0), NormKind::L2) < 0.05 * grid::norm(&lq, NormKind::Hdot1));
    }

    #[test]
    fn rho_is_real_with_stable_seed() {
        let g = RadialGrid::with_extent(100.0, 0.01).unwrap();
        let rho = rho_profile(1, g).unwrap();
        assert!(rho.rho.values().iter().all(|v| v.im == 0.0));
        assert!(rho.relative_residual < 1e-4, "{}", rho.relative_residual);
        let r0 = g.r(0);
        let lead = rho.rho[0].re / r0.powi(3);
        let coarse = RadialGrid::with_extent(100.0, 0.02).unwrap();
        let rc = rho_profile(1, coarse).unwrap();
        let lead_c = rc.rho[0].re / coarse.r(0).powi(3);
        assert!((lead - lead_c).abs() < 1e-3 * lead.abs());
        assert!((lead - rho.seed_coefficient).abs() < 1e-3);
        assert!(rho_profile(-1, g).is_err());
    }

    #[test]
    fn constraint_basis_spans_the_null_space() {
        let c = DMatrix::from_row_slice(2, 5, &[1.0, 2.0, 0.0, 1.0, 3.0, 0.0, 1.0, 1.0, 4.0, -1.0]);
        let e = constraint_basis(&c).unwrap();
        assert_eq!(e.ncols(), 3);
        assert!((&c * &e).amax() < 1e-14);
        assert!(e.rank(1e-10) == 3);
    }

    #[test]
    fn coercivity_gap_small_grid() {
        let g = small_grid();
        let op = LinearizedOperator::new(1, g).unwrap();
        let z1 = RadialField::from_fn(g, 1, |y| profiles::TestProfile::ScalingBump.value(1, y));
        let z2 = RadialField::from_fn(g, 1, |y| profiles::TestProfile::PhaseBump.value(1, y));
        let cons = op.coercivity_constant(&z1, &z2).unwrap();
        let free = op.unconstrained_bounds().unwrap();
        assert!(cons.c_low > 0.0);
        assert!(free.c_low < 0.01 * cons.c_low, "{free:?} {cons:?}");
        let zero = RadialField::zeros(g, 1);
        assert!(matches!(op.coercivity_constant(&z1, &zero), Err(Error::Transversality { .. })));
    }

    #[test]
    fn ratios_reject_degenerate_inputs() {
        let g = small_grid();
        let op = LinearizedOperator::new(0, g).unwrap();
        let zero = RadialField::zeros(g, 0);
        assert!(op.nonlinear_coercivity_ratio(&zero).is_err());
        assert!(op.nonlinear_hardy_ratio(&zero, &zero, 2.0).is_err());
    }
}
