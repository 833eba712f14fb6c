//! Soliton decomposition `u = [Q + ε]_{λ,γ}` under the orthogonality
//! conditions `(ε, 𝒵₁)_r = (ε, 𝒵₂)_r = 0`, parameter tracking along
//! trajectories, blow-up rate fits, and radiation extraction.
//!
//! The orthogonality conditions are solved in the lab frame: by the
//! isometry of the symmetry action, `(ε, 𝒵)_r = (u − Q^♯, 𝒵^♯)_r` with
//! `f^♯ = f_{λ,γ}`. `Q^♯`, `𝒵^♯` and their scaling derivatives are evaluated
//! from closed forms at the lab nodes, so the Newton residual carries no
//! interpolation error; only the stored `ε` (rescaled frame) is resampled.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::grid::{self, NormKind, RadialField, RadialGrid};
use crate::linearization;
use crate::profiles::{self, TestProfile};
use crate::soliton::{self, SolitonParams};

const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAX_ITER: usize = 50;

/// The orthogonality profiles `𝒵₁ = χΛQ`, `𝒵₂ = iχQ` on a grid.
#[derive(Debug, Clone)]
pub struct TestProfiles {
    pub m: i32,
    pub z1: RadialField,
    pub z2: RadialField,
    pub det_transversality: f64,
    det_scale: f64,
    q_hdot1: f64,
}

impl TestProfiles {
    pub fn grid(&self) -> &RadialGrid {
        self.z1.grid()
    }

    /// Scale against which the transversality determinant is judged.
    pub fn det_scale(&self) -> f64 {
        self.det_scale
    }

    /// `‖Q‖_{Ḣ¹_m}` on this grid.
    pub fn q_hdot1(&self) -> f64 {
        self.q_hdot1
    }

    /// Short, stable description of the profile pair for provenance records.
    pub fn fingerprint(&self) -> String {
        let g = self.grid();
        let (a, b) = (grid::norm(&self.z1, NormKind::L2), grid::norm(&self.z2, NormKind::L2));
        format!(
            "z1=chi*LambdaQ,z2=i*chi*Q,chi_plateau={},support=2,m={},n={},h={:e},det={:.12e},|z1|={:.12e},|z2|={:.12e}",
            profiles::CHI_PLATEAU,
            self.m,
            g.n(),
            g.h(),
            self.det_transversality,
            a,
            b
        )
    }
}

pub fn default_test_profiles(m: i32, grid: RadialGrid) -> Result<TestProfiles> {
    let mu = u32::try_from(m)
        .map_err(|_| Error::InvalidArgument(format!("decomposition needs m ≥ 0, got {m}")))?;
    let z1 = RadialField::from_fn(grid, m, |y| TestProfile::ScalingBump.value(mu, y));
    let z2 = RadialField::from_fn(grid, m, |y| TestProfile::PhaseBump.value(mu, y));
    let (det, scale) = linearization::transversality_determinant(m, &z1, &z2)?;
    if !(det.abs() > 1e-6 * scale) {
        return Err(Error::Transversality {
            det: det.abs(),
            threshold: 1e-6 * scale,
        });
    }
    let q_hdot1 = grid::norm(&soliton::q_profile(m, grid)?, NormKind::Hdot1);
    Ok(TestProfiles {
        m,
        z1,
        z2,
        det_transversality: det,
        det_scale: scale,
        q_hdot1,
    })
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub lambda: f64,
    /// In `(−π, π]`.
    pub gamma: f64,
    /// Remainder in the rescaled variable `y = r/λ`.
    pub eps: RadialField,
    /// Achieved `(ε, 𝒵₁)_r, (ε, 𝒵₂)_r`.
    pub residuals: [f64; 2],
    pub iterations: usize,
}

impl Decomposition {
    pub fn params(&self) -> SolitonParams {
        SolitonParams {
            lambda: self.lambda,
            gamma: self.gamma,
        }
    }
}

fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Closed-form lab-frame quantities at `(λ, γ)` on the nodes where the
/// profiles are supported (`r < 2λ`).
struct LabFrame {
    end: usize,
    q: Vec<Complex64>,
    lq: Vec<Complex64>,
    z: [Vec<Complex64>; 2],
    lz: [Vec<Complex64>; 2],
}

impl LabFrame {
    fn new(grid: &RadialGrid, m: u32, p: SolitonParams) -> Self {
        let end = grid.index_at_radius(2.0 * p.lambda).min(grid.n());
        let c = Complex64::from_polar(1.0 / p.lambda, p.gamma);
        let mut out = LabFrame {
            end,
            q: Vec::with_capacity(end),
            lq: Vec::with_capacity(end),
            z: [Vec::with_capacity(end), Vec::with_capacity(end)],
            lz: [Vec::with_capacity(end), Vec::with_capacity(end)],
        };
        for i in 0..end {
            let y = grid.r(i) / p.lambda;
            out.q.push(c * profiles::q(m, y));
            out.lq.push(c * profiles::lambda_q(m, y));
            for (k, prof) in [TestProfile::ScalingBump, TestProfile::PhaseBump].into_iter().enumerate() {
                out.z[k].push(c * prof.value(m, y));
                out.lz[k].push(c * prof.lambda_value(m, y));
            }
        }
        out
    }
}

fn dot(grid: &RadialGrid, a: &[Complex64], b: &[Complex64]) -> f64 {
    let g: Vec<f64> = a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).collect();
    let mut full = g;
    full.resize(grid.n(), 0.0);
    grid.integrate(&full)
}

/// `G(λ,γ)` and its Jacobian.
fn residual_and_jacobian(u: &RadialField, m: u32, p: SolitonParams) -> ([f64; 2], [[f64; 2]; 2]) {
    let grid = u.grid();
    let f = LabFrame::new(grid, m, p);
    let uv = &u.values()[..f.end];
    let i = Complex64::i();
    let mut g = [0.0; 2];
    let mut jac = [[0.0; 2]; 2];
    for k in 0..2 {
        let diff: Vec<Complex64> = uv.iter().zip(&f.q).map(|(a, b)| a - b).collect();
        g[k] = dot(grid, &diff, &f.z[k]);
        let u_lz = dot(grid, uv, &f.lz[k]);
        let lq_z = dot(grid, &f.lq, &f.z[k]);
        let q_lz = dot(grid, &f.q, &f.lz[k]);
        jac[k][0] = (-u_lz + lq_z + q_lz) / p.lambda;
        let iz: Vec<Complex64> = f.z[k].iter().map(|z| i * z).collect();
        jac[k][1] = dot(grid, uv, &iz);
    }
    (g, jac)
}

/// Initial guess `λ₀ = ‖Q‖_{Ḣ¹}/‖u‖_{Ḣ¹}`, `γ₀ = arg ⟨Q_{λ₀}, u⟩`.
pub fn initial_guess(u: &RadialField, profiles: &TestProfiles) -> Result<SolitonParams> {
    let un = grid::norm(u, NormKind::Hdot1);
    if !(un > 0.0) {
        return Err(Error::InvalidArgument("cannot decompose the zero field".into()));
    }
    let lambda = profiles.q_hdot1 / un;
    let q = soliton::q_modulated(profiles.m, *u.grid(), SolitonParams { lambda, gamma: 0.0 })?;
    let grid = u.grid();
    let mut re = vec![0.0; grid.n()];
    let mut im = vec![0.0; grid.n()];
    for i in 0..grid.n() {
        let z = q[i].conj() * u[i];
        re[i] = z.re;
        im[i] = z.im;
    }
    let gamma = grid.integrate(&im).atan2(grid.integrate(&re));
    SolitonParams::new(lambda, gamma)
}

/// Newton iteration on `G(λ,γ) = ((ε,𝒵₁)_r, (ε,𝒵₂)_r)`.
pub fn decompose(u: &RadialField, profiles: &TestProfiles, guess: Option<SolitonParams>) -> Result<Decomposition> {
    profiles.z1.check_compatible(u)?;
    let m = profiles.m as u32;
    let mut p = match guess {
        Some(g) => g,
        None => initial_guess(u, profiles)?,
    };
    let scale = grid::norm(u, NormKind::L2)
        * grid::norm(&profiles.z1, NormKind::L2).max(grid::norm(&profiles.z2, NormKind::L2));
    let tol = NEWTON_TOL * scale;
    let (mut g, mut jac) = residual_and_jacobian(u, m, p);
    let mut iterations = 0;
    while g[0].abs().max(g[1].abs()) > tol {
        if iterations == NEWTON_MAX_ITER {
            return Err(Error::NonConvergence {
                what: "modulation Newton iteration",
                iterations,
                residual: g[0].abs().max(g[1].abs()) / scale,
            });
        }
        iterations += 1;
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::NonConvergence {
                what: "modulation Newton iteration (singular Jacobian)",
                iterations,
                residual: g[0].abs().max(g[1].abs()) / scale,
            });
        }
        let dl = -(jac[1][1] * g[0] - jac[0][1] * g[1]) / det;
        let dg = -(-jac[1][0] * g[0] + jac[0][0] * g[1]) / det;
        let mut step = 1.0;
        let mut next = p.lambda + dl;
        while !(next > 0.0) {
            step *= 0.5;
            if step < 1e-6 {
                return Err(Error::InvalidArgument(format!(
                    "scale iterate left (0, ∞) from λ = {}",
                    p.lambda
                )));
            }
            next = p.lambda + step * dl;
        }
        p = SolitonParams {
            lambda: next,
            gamma: p.gamma + step * dg,
        };
        (g, jac) = residual_and_jacobian(u, m, p);
        if !(g[0].is_finite() && g[1].is_finite()) {
            return Err(Error::NonConvergence {
                what: "modulation Newton iteration (non-finite residual)",
                iterations,
                residual: f64::NAN,
            });
        }
    }
    p.gamma = wrap_angle(p.gamma);
    let q = soliton::q_profile(profiles.m, *u.grid())?;
    let eps = &soliton::demodulate(u, p) - &q;
    Ok(Decomposition {
        lambda: p.lambda,
        gamma: p.gamma,
        eps,
        residuals: g,
        iterations,
    })
}

/// `|(‖u‖_{Ḣ¹}/‖Q‖_{Ḣ¹})·λ − 1|` and `‖ε‖_{Ḣ¹}`, the two sides of the scale
/// estimate.
pub fn lambda_estimate(u: &RadialField, dec: &Decomposition, profiles: &TestProfiles) -> (f64, f64) {
    let defect = (grid::norm(u, NormKind::Hdot1) / profiles.q_hdot1 * dec.lambda - 1.0).abs();
    (defect, grid::norm(&dec.eps, NormKind::Hdot1))
}

/// `ε♯ = u − Q_{λ,γ}` on the lab grid, `Q_{λ,γ}` from the closed form.
pub fn lab_remainder(u: &RadialField, p: SolitonParams) -> Result<RadialField> {
    let q = soliton::q_modulated(u.m(), *u.grid(), p)?;
    Ok(u - &q)
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ModulationSeries {
    pub times: Vec<f64>,
    /// Index into the trajectory's snapshot list for each entry.
    pub frames: Vec<usize>,
    pub lambda: Vec<f64>,
    pub gamma: Vec<f64>,
    pub eps_adapted: Vec<f64>,
    pub eps_l2: Vec<f64>,
    pub energy: Vec<f64>,
    /// `(|λ_s/λ| + |γ_s|)/‖ε‖_{𝓗̇¹}` with `ds = dt/λ²`.
    pub modulation_ratio: Vec<f64>,
}

impl ModulationSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push_frame(&mut self, t: f64, frame: usize, dec: &Decomposition, energy: f64) {
        let gamma = match self.gamma.last() {
            Some(&prev) => prev + wrap_angle(dec.gamma - prev),
            None => dec.gamma,
        };
        self.times.push(t);
        self.frames.push(frame);
        self.lambda.push(dec.lambda);
        self.gamma.push(gamma);
        self.eps_adapted.push(grid::norm(&dec.eps, NormKind::Adapted));
        self.eps_l2.push(grid::norm(&dec.eps, NormKind::L2));
        self.energy.push(energy);
    }

    /// Fills [`Self::modulation_ratio`] from the recorded parameters.
    pub fn finish(&mut self) {
        let n = self.len();
        self.modulation_ratio = vec![f64::NAN; n];
        if n < 2 {
            return;
        }
        let deriv = |v: &[f64], k: usize| -> f64 {
            let t = &self.times;
            if k == 0 {
                (v[1] - v[0]) / (t[1] - t[0])
            } else if k == n - 1 {
                (v[n - 1] - v[n - 2]) / (t[n - 1] - t[n - 2])
            } else {
                let (h1, h2) = (t[k] - t[k - 1], t[k + 1] - t[k]);
                (-h2 / (h1 * (h1 + h2))) * v[k - 1] + ((h2 - h1) / (h1 * h2)) * v[k] + (h1 / (h2 * (h1 + h2))) * v[k + 1]
            }
        };
        for k in 0..n {
            let l = self.lambda[k];
            let ls_over_l = l * deriv(&self.lambda, k);
            let gs = l * l * deriv(&self.gamma, k);
            let e = self.eps_adapted[k];
            self.modulation_ratio[k] = if e > 0.0 { (ls_over_l.abs() + gs.abs()) / e } else { f64::NAN };
        }
    }
}

/// Decomposes every stored snapshot of a trajectory, warm-starting each frame
/// from the previous one.
pub fn track(traj: &Trajectory, profiles: &TestProfiles) -> Result<ModulationSeries> {
    let mut series = ModulationSeries::default();
    let mut guess = None;
    for (frame, (sample, u)) in traj.snapshots.iter().enumerate() {
        let dec = decompose(u, profiles, guess).map_err(|e| Error::Frame {
            frame,
            source: Box::new(e),
        })?;
        guess = Some(dec.params());
        series.push_frame(traj.times[*sample], frame, &dec, traj.monitors[*sample].energy_selfdual);
    }
    series.finish();
    Ok(series)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DyadicWindow {
    pub t_lo: f64,
    pub t_hi: f64,
    pub samples: usize,
    pub c_linear: f64,
    pub c_log: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateFit {
    /// `sup λ/(√E (T − t))`.
    pub c_linear: f64,
    /// `sup λ |log(T − t)|^{1/2}/(√E (T − t))`, for `m = 0`.
    pub c_log: Option<f64>,
    /// `λ/(√E (T − t))` per sample used.
    pub residuals: Vec<f64>,
    pub windows: Vec<DyadicWindow>,
    /// Relative spread of `c_linear` over the last two dyadic windows.
    pub stability: Option<f64>,
}

pub fn blowup_rate_fit(series: &ModulationSeries, m: i32, blowup_time: f64) -> Result<RateFit> {
    let idx: Vec<usize> = (0..series.len())
        .filter(|&k| series.times[k] < blowup_time && series.energy[k] > 0.0 && series.lambda[k] > 0.0)
        .collect();
    if idx.is_empty() {
        return Err(Error::InvalidArgument("rate fit window is empty".into()));
    }
    let lin = |k: usize| series.lambda[k] / (series.energy[k].sqrt() * (blowup_time - series.times[k]));
    let logf = |k: usize| lin(k) * (blowup_time - series.times[k]).ln().abs().sqrt();
    let residuals: Vec<f64> = idx.iter().map(|&k| lin(k)).collect();
    let c_linear = residuals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let c_log = (m == 0).then(|| idx.iter().map(|&k| logf(k)).fold(f64::NEG_INFINITY, f64::max));

    let span = blowup_time - series.times[idx[0]];
    let mut windows = Vec::new();
    let mut j = 0;
    loop {
        let t_lo = blowup_time - span / 2f64.powi(j);
        let t_hi = blowup_time - span / 2f64.powi(j + 1);
        let inside: Vec<usize> = idx
            .iter()
            .copied()
            .filter(|&k| series.times[k] >= t_lo && series.times[k] < t_hi)
            .collect();
        if inside.is_empty() {
            break;
        }
        windows.push(DyadicWindow {
            t_lo,
            t_hi,
            samples: inside.len(),
            c_linear: inside.iter().map(|&k| lin(k)).fold(f64::NEG_INFINITY, f64::max),
            c_log: (m == 0).then(|| inside.iter().map(|&k| logf(k)).fold(f64::NEG_INFINITY, f64::max)),
        });
        j += 1;
        if j > 60 {
            break;
        }
    }
    let stability = if windows.len() >= 2 {
        let a = windows[windows.len() - 2].c_linear;
        let b = windows[windows.len() - 1].c_linear;
        Some((a - b).abs() / a.abs().max(b.abs()))
    } else {
        None
    };
    Ok(RateFit {
        c_linear,
        c_log,
        residuals,
        windows,
        stability,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupTime {
    pub t: f64,
    pub uncertainty: f64,
}

fn linear_root(ts: &[f64], ys: &[f64]) -> Option<f64> {
    let n = ts.len() as f64;
    if ts.len() < 2 {
        return None;
    }
    let mt = ts.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = ts.iter().zip(ys).map(|(t, y)| (t - mt) * (y - my)).sum();
    let sxx: f64 = ts.iter().map(|t| (t - mt).powi(2)).sum();
    if sxx == 0.0 || sxy == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some(mt - my / slope)
}

/// Extrapolates `1/‖u(t)‖_{Ḣ¹}` to zero over the last half of the stored
/// snapshots, and the scale series the same way when given.
pub fn estimate_blowup_time(traj: &Trajectory, series: Option<&ModulationSeries>) -> Result<BlowupTime> {
    let k = traj.snapshots.len();
    if k < 4 {
        return Err(Error::InvalidArgument(format!(
            "need at least 4 snapshots to estimate T, got {k}"
        )));
    }
    let tail = &traj.snapshots[k / 2..];
    let ts: Vec<f64> = tail.iter().map(|(i, _)| traj.times[*i]).collect();
    let ys: Vec<f64> = tail.iter().map(|(_, u)| 1.0 / grid::norm(u, NormKind::Hdot1)).collect();
    let t_h1 = linear_root(&ts, &ys)
        .ok_or_else(|| Error::InvalidArgument("Ḣ¹ norm is not growing".into()))?;
    if let Some(s) = series {
        let n = s.len();
        if n >= 4 {
            let lt = linear_root(&s.times[n / 2..], &s.lambda[n / 2..]);
            if let Some(t_l) = lt {
                return Ok(BlowupTime {
                    t: t_l,
                    uncertainty: (t_l - t_h1).abs(),
                });
            }
        }
    }
    // Half-window disagreement as the uncertainty.
    let q = ts.len() / 2;
    let alt = linear_root(&ts[q..], &ys[q..]).unwrap_or(t_h1);
    Ok(BlowupTime {
        t: t_h1,
        uncertainty: (alt - t_h1).abs(),
    })
}

/// Projections of the `m = 0` logarithmic argument at one cutoff radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLedger {
    pub radius: f64,
    /// `(ΛQ, y²Qχ_R)_r`
    pub lambda_q_projection: f64,
    /// `(ΛQ, y²Qχ_R)_r / (16π log R)`
    pub lambda_q_ratio: f64,
    /// `‖yQχ_R‖²_{L²}`
    pub yq_norm_sq: f64,
    /// `‖yQχ_R‖²_{L²} / log R`
    pub yq_ratio: f64,
}

pub fn log_ledger(grid: RadialGrid, m: i32, radius: f64) -> Result<LogLedger> {
    let mu = u32::try_from(m).map_err(|_| Error::InvalidArgument(format!("need m ≥ 0, got {m}")))?;
    let lq = soliton::lambda_q_profile(m, grid)?;
    let psi = RadialField::from_real_fn(grid, m, |y| y * y * profiles::q(mu, y) * profiles::chi_r(radius, y));
    let yq = RadialField::from_real_fn(grid, m, |y| y * profiles::q(mu, y) * profiles::chi_r(radius, y));
    let proj = grid::inner_real(&lq, &psi)?;
    let nsq = grid::norm(&yq, NormKind::L2).powi(2);
    let log_r = radius.ln();
    Ok(LogLedger {
        radius,
        lambda_q_projection: proj,
        lambda_q_ratio: proj / (16.0 * PI * log_r),
        yq_norm_sq: nsq,
        yq_ratio: nsq / log_r,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogProjection {
    pub time: f64,
    pub radius: f64,
    /// `(ε, y²Qχ_R)_r`
    pub eps_projection: f64,
    pub ledger: LogLedger,
}

/// For `m = 0` runs: `R(t) = (T − t)^{−δ}` and the projections on
/// `ψ = y²Qχ_R` per tracked frame.
pub fn log_projection_diagnostic(
    series: &ModulationSeries,
    traj: &Trajectory,
    blowup_time: f64,
    delta: f64,
) -> Result<Vec<LogProjection>> {
    if traj.m != 0 {
        return Err(Error::InvalidArgument(format!(
            "logarithmic diagnostic is for m = 0, got m = {}",
            traj.m
        )));
    }
    let grid = traj.grid;
    let q = soliton::q_profile(0, grid)?;
    let mut out = Vec::new();
    for k in 0..series.len() {
        let t = series.times[k];
        if t >= blowup_time {
            continue;
        }
        let radius = (blowup_time - t).powf(-delta);
        let p = SolitonParams {
            lambda: series.lambda[k],
            gamma: series.gamma[k],
        };
        let u = &traj.snapshots[series.frames[k]].1;
        let eps = &soliton::demodulate(u, p) - &q;
        let psi = RadialField::from_real_fn(grid, 0, |y| y * y * profiles::q(0, y) * profiles::chi_r(radius, y));
        out.push(LogProjection {
            time: t,
            radius,
            eps_projection: grid::inner_real(&eps, &psi)?,
            ledger: log_ledger(grid, 0, radius)?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiationNorms {
    pub l2: f64,
    pub minus1: f64,
    /// `‖∂_r z*‖_{L²}`
    pub dr: f64,
    /// `‖z*/r‖_{L²}`
    pub inv_r: f64,
}

#[derive(Debug, Clone)]
pub struct Radiation {
    /// `ε♯` at the last tracked frame, smoothly cut off to `r ≳ R`.
    pub z_star: RadialField,
    /// Times of the dyadic frames used.
    pub times: Vec<f64>,
    /// `‖1_{r≥R}(ε♯(t_k) − ε♯(t_{k+1}))‖_{L²}` over successive dyadic frames.
    pub cauchy_log: Vec<f64>,
    pub norms: RadiationNorms,
}

impl Radiation {
    pub fn cauchy_decreasing(&self) -> bool {
        self.cauchy_log.windows(2).all(|w| w[1] < w[0])
    }
}

pub fn radiation_profile(traj: &Trajectory, series: &ModulationSeries, radius: f64, blowup_time: f64) -> Result<Radiation> {
    if series.len() < 2 {
        return Err(Error::InvalidArgument("radiation window too short".into()));
    }
    let t0 = series.times[0];
    let t_last = series.times[series.len() - 1];
    let span = blowup_time - t0;
    if !(span > 0.0) {
        return Err(Error::InvalidArgument("blow-up time precedes the series".into()));
    }
    // Frames nearest to the dyadic times T − span/2^k.
    let mut picks: Vec<usize> = Vec::new();
    let mut k = 0;
    loop {
        let target = blowup_time - span / 2f64.powi(k);
        if target > t_last + 1e-12 * span {
            break;
        }
        let best = (0..series.len())
            .min_by(|&a, &b| {
                (series.times[a] - target)
                    .abs()
                    .partial_cmp(&(series.times[b] - target).abs())
                    .unwrap()
            })
            .unwrap();
        if picks.last() != Some(&best) {
            picks.push(best);
        }
        k += 1;
        if k > 60 {
            break;
        }
    }
    if picks.len() < 2 {
        return Err(Error::InvalidArgument("radiation window too short".into()));
    }
    let sharp: Vec<RadialField> = picks
        .iter()
        .map(|&j| {
            let p = SolitonParams {
                lambda: series.lambda[j],
                gamma: series.gamma[j],
            };
            lab_remainder(&traj.snapshots[series.frames[j]].1, p).map(|e| e.restricted_from(radius))
        })
        .collect::<Result<_>>()?;
    let cauchy_log = sharp
        .windows(2)
        .map(|w| grid::norm(&(&w[0] - &w[1]), NormKind::L2))
        .collect();
    let last = series.len() - 1;
    let p = SolitonParams {
        lambda: series.lambda[last],
        gamma: series.gamma[last],
    };
    let eps_last = lab_remainder(&traj.snapshots[series.frames[last]].1, p)?;
    // 0 below 0.8R, 1 above R.
    let z_star = eps_last.times_fn(|r| 1.0 - profiles::chi(2.0 * r / radius));
    let dz = grid::differentiate(&z_star);
    let inv: RadialField = z_star.times_fn(|r| 1.0 / r);
    let norms = RadiationNorms {
        l2: grid::norm(&z_star, NormKind::L2),
        minus1: grid::norm(&z_star, NormKind::Minus1),
        dr: grid::norm(&dz, NormKind::L2),
        inv_r: grid::norm(&inv, NormKind::L2),
    };
    Ok(Radiation {
        z_star,
        times: picks.iter().map(|&j| series.times[j]).collect(),
        cauchy_log,
        norms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> RadialGrid {
        RadialGrid::with_extent(60.0, 0.01).unwrap()
    }

    #[test]
    fn profiles_are_transversal_and_compact() {
        for m in 0..3 {
            let p = default_test_profiles(m, grid()).unwrap();
            assert!(p.det_transversality.abs() > 1e-6 * p.det_scale());
            let g = grid();
            let beyond = g.index_at_radius(2.0);
            assert!(p.z1.values()[beyond..].iter().all(|v| v.norm() == 0.0));
            assert!(p.z2.values()[beyond..].iter().all(|v| v.norm() == 0.0));
            let iq = soliton::q_profile(m, g).unwrap().scale(Complex64::i());
            assert_eq!(grid::inner_real(&iq, &p.z1).unwrap(), 0.0);
        }
        assert!(default_test_profiles(-1, grid()).is_err());
    }

    #[test]
    fn exact_soliton_round_trip() {
        let g = grid();
        let profiles = default_test_profiles(1, g).unwrap();
        for &(l, gam) in &[(1.0, 0.0), (0.7, 1.2), (1.9, -2.5), (0.2, 3.0)] {
            let p = SolitonParams::new(l, gam).unwrap();
            let u = soliton::q_modulated(1, g, p).unwrap();
            let dec = decompose(&u, &profiles, None).unwrap();
            assert!((dec.lambda / l - 1.0).abs() < 1e-8, "{} vs {l}", dec.lambda);
            assert!(wrap_angle(dec.gamma - gam).abs() < 1e-8);
        }
    }

    #[test]
    fn phase_rotation_shifts_gamma() {
        let g = grid();
        let profiles = default_test_profiles(2, g).unwrap();
        let u = soliton::q_modulated(2, g, SolitonParams::new(1.3, 0.4).unwrap()).unwrap();
        let a = decompose(&u, &profiles, None).unwrap();
        let b = decompose(&u.scale(Complex64::from_polar(1.0, 0.5)), &profiles, None).unwrap();
        assert!((a.lambda - b.lambda).abs() < 1e-10);
        assert!(wrap_angle(b.gamma - a.gamma - 0.5).abs() < 1e-10);
    }

    #[test]
    fn rate_fit_on_synthetic_series() {
        let mut s = ModulationSeries::default();
        for k in 0..200 {
            let t = -1.0 + k as f64 * 0.00495;
            s.times.push(t);
            s.lambda.push(t * t);
            s.energy.push(4.0);
        }
        let fit = blowup_rate_fit(&s, 1, 0.0).unwrap();
        let last = fit.windows.last().unwrap().c_linear;
        assert!(last < 0.05 * fit.windows[0].c_linear);
        assert!(fit.c_log.is_none());
        let empty = ModulationSeries::default();
        assert!(blowup_rate_fit(&empty, 1, 0.0).is_err());
    }

    #[test]
    fn log_ledger_requires_nonnegative_m() {
        assert!(log_ledger(grid(), -1, 10.0).is_err());
        let l = log_ledger(grid(), 0, 10.0).unwrap();
        assert!(l.lambda_q_projection < 0.0);
    }
}
