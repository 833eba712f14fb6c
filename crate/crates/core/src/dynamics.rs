//! Time evolution by Strang splitting
//!
//! ```text
//! u ← e^{−iV[u]dt/2} u          (exact: |u|, hence V[u], frozen)
//! u ← CN step of i∂_t u = −Δ^{(m)} u
//! u ← e^{−iV[u]dt/2} u
//! ```
//!
//! `Δ^{(m)}` is discretized in flux form,
//! `(Δf)_i = [r_{i+½}(f_{i+1} − f_i) − r_{i−½}(f_i − f_{i−1})]/(r_i h²) − m² f_i/r_i²`,
//! with `r_{−½} = 0` and no flux through `r_max`. It is self-adjoint in the quadrature inner
//! product, so the Crank-Nicolson step is exactly unitary and both substeps
//! preserve the discrete mass.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, RadialField, RadialGrid};
use crate::modulation;
use crate::nonlinearity::nonlinear_potential;
use crate::soliton::{self, SolitonParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    /// Steps between monitor samples.
    pub monitor_stride: usize,
    /// Monitor samples between stored snapshots; 0 keeps only the first and last.
    pub snapshot_stride: usize,
    pub stop_on_resolution_floor: bool,
    /// Halt once the tracked scale drops below `floor_cells · h`.
    pub floor_cells: usize,
}

impl EvolutionConfig {
    /// Defaults for a grid: `dt = min(h, 1e−3)`, one sample every 100 steps.
    pub fn for_grid(grid: &RadialGrid, t_start: f64, t_end: f64) -> Self {
        Self {
            dt: grid.h().min(1e-3),
            t_start,
            t_end,
            monitor_stride: 100,
            snapshot_stride: 1,
            stop_on_resolution_floor: false,
            floor_cells: 20,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_end >= self.t_start) {
            return Err(Error::InvalidArgument(format!(
                "need t_end ≥ t_start, got [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        if self.monitor_stride == 0 {
            return Err(Error::InvalidArgument("monitor_stride must be ≥ 1".into()));
        }
        if self.floor_cells < 4 {
            return Err(Error::InvalidArgument(format!(
                "floor_cells must be ≥ 4, got {}",
                self.floor_cells
            )));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        ((self.t_end - self.t_start) / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monitors {
    pub mass: f64,
    pub energy_selfdual: f64,
    pub energy_coulomb: f64,
    /// `∫ r²|u|²`
    pub variance: f64,
    /// `∫ Im(ū r∂_r u)`
    pub virial_flux: f64,
}

impl Monitors {
    pub fn compute(u: &RadialField) -> Self {
        let grid = *u.grid();
        let e = soliton::energy(u);
        let dens = u.abs_sq();
        let var: Vec<f64> = dens.iter().enumerate().map(|(i, d)| grid.r(i).powi(2) * d).collect();
        let du = grid::differentiate(u);
        let flux: Vec<f64> = (0..grid.n())
            .map(|i| (u[i].conj() * du[i]).im * grid.r(i))
            .collect();
        Self {
            mass: grid.integrate(&dens),
            energy_selfdual: e.selfdual,
            energy_coulomb: e.coulomb,
            variance: grid.integrate(&var),
            virial_flux: grid.integrate(&flux),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopReason {
    Completed,
    ResolutionFloor { lambda: f64, time: f64 },
    NonFinite { step: usize, time: f64 },
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: RadialGrid,
    pub m: i32,
    pub times: Vec<f64>,
    pub monitors: Vec<Monitors>,
    /// Modulation parameters per sample, when tracking was enabled.
    pub params: Vec<Option<SolitonParams>>,
    /// `(sample index, field)` pairs.
    pub snapshots: Vec<(usize, RadialField)>,
    pub stop_reason: StopReason,
    /// Last finite state.
    pub final_state: RadialField,
}

impl Trajectory {
    /// Turns a non-finite abort into an error.
    pub fn into_result(self) -> Result<Self> {
        match self.stop_reason {
            StopReason::NonFinite { step, time } => Err(Error::NonFinite { step, time }),
            _ => Ok(self),
        }
    }

    pub fn snapshot_at(&self, sample: usize) -> Option<&RadialField> {
        self.snapshots.iter().find(|(i, _)| *i == sample).map(|(_, f)| f)
    }

    pub fn max_mass_drift(&self) -> f64 {
        let m0 = self.monitors[0].mass;
        self.monitors
            .iter()
            .map(|s| (s.mass - m0).abs() / m0.max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }

    /// Largest `|E(t) − E(0)|` over the run, divided by `scale`. Uses the
    /// Coulomb form, which is the quantity the scheme conserves.
    pub fn max_energy_drift(&self, scale: f64) -> f64 {
        let e0 = self.monitors[0].energy_coulomb;
        self.monitors
            .iter()
            .map(|s| (s.energy_coulomb - e0).abs() / scale)
            .fold(0.0, f64::max)
    }
}

/// Flux-form `Δ^{(m)}` as tridiagonal coefficients `(lower, diag, upper)`.
fn laplacian_coefficients(grid: &RadialGrid, m: i32) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = grid.n();
    let h = grid.h();
    let m2 = (m as f64).powi(2);
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for i in 0..n {
        let r = grid.r(i);
        let a = i as f64 * h / (r * h * h);
        // Zero flux through r_max.
        let b = if i + 1 < n { (i + 1) as f64 * h / (r * h * h) } else { 0.0 };
        lower[i] = a;
        upper[i] = b;
        diag[i] = -(a + b) - m2 / (r * r);
    }
    (lower, diag, upper)
}

/// `Δ^{(m)} f` with the integrator's stencil.
pub fn laplacian(f: &RadialField) -> RadialField {
    let (lo, di, up) = laplacian_coefficients(f.grid(), f.m());
    let v = f.values();
    let n = v.len();
    let out = (0..n)
        .map(|i| {
            let mut s = v[i] * di[i];
            if i > 0 {
                s += v[i - 1] * lo[i];
            }
            if i + 1 < n {
                s += v[i + 1] * up[i];
            }
            s
        })
        .collect();
    RadialField::from_vec(*f.grid(), f.m(), out)
}

/// `∂_t u = −i(−Δ^{(m)}u + V[u]u)`.
pub fn rhs(u: &RadialField) -> RadialField {
    let lap = laplacian(u);
    let v = nonlinear_potential(u);
    let i = Complex64::i();
    let out = (0..u.values().len())
        .map(|k| -i * (u[k] * v[k] - lap[k]))
        .collect();
    RadialField::from_vec(*u.grid(), u.m(), out)
}

/// Crank-Nicolson propagator for `i∂_t u = −Δ^{(m)}u` with a prefactored
/// tridiagonal system.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: RadialGrid,
    m: i32,
    dt: f64,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    c_prime: Vec<Complex64>,
    denom: Vec<Complex64>,
}

impl Stepper {
    pub fn new(grid: RadialGrid, m: i32, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        let (lower, diag, upper) = laplacian_coefficients(&grid, m);
        let n = grid.n();
        let s = Complex64::new(0.0, -0.5 * dt);
        // Left matrix I − i(dt/2)Δ.
        let mut c_prime = vec![Complex64::new(0.0, 0.0); n];
        let mut denom = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let a = s * lower[i];
            let b = Complex64::new(1.0, 0.0) + s * diag[i];
            let c = s * upper[i];
            let d = if i == 0 { b } else { b - a * c_prime[i - 1] };
            if d.norm() < 1e-300 {
                return Err(Error::LinearSolve(format!("zero pivot at row {i}")));
            }
            denom[i] = d;
            c_prime[i] = c / d;
        }
        Ok(Self {
            grid,
            m,
            dt,
            lower,
            diag,
            upper,
            c_prime,
            denom,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn linear_step(&self, u: &mut [Complex64]) {
        let n = u.len();
        let s = Complex64::new(0.0, 0.5 * self.dt);
        // Right side (I + i(dt/2)Δ)u, then forward sweep.
        let mut d = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut lap = u[i] * self.diag[i];
            if i > 0 {
                lap += u[i - 1] * self.lower[i];
            }
            if i + 1 < n {
                lap += u[i + 1] * self.upper[i];
            }
            d[i] = u[i] + s * lap;
        }
        let sl = Complex64::new(0.0, -0.5 * self.dt);
        for i in 0..n {
            let prev = if i == 0 { Complex64::new(0.0, 0.0) } else { d[i - 1] * (sl * self.lower[i]) };
            d[i] = (d[i] - prev) / self.denom[i];
        }
        u[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            u[i] = d[i] - self.c_prime[i] * u[i + 1];
        }
    }

    fn phase_step(u: &mut RadialField, tau: f64) {
        let v = nonlinear_potential(u);
        for (x, &p) in u.values_mut().iter_mut().zip(v.values()) {
            *x *= Complex64::from_polar(1.0, -p * tau);
        }
    }

    /// One Strang step.
    pub fn step(&self, u: &mut RadialField) -> Result<()> {
        if !u.grid().same_as(&self.grid) || u.m() != self.m {
            return Err(Error::GridMismatch("stepper built for a different grid or m".into()));
        }
        Self::phase_step(u, 0.5 * self.dt);
        self.linear_step(u.values_mut());
        Self::phase_step(u, 0.5 * self.dt);
        Ok(())
    }
}

pub fn strang_step(u: &RadialField, dt: f64) -> Result<RadialField> {
    let stepper = Stepper::new(*u.grid(), u.m(), dt)?;
    let mut out = u.clone();
    stepper.step(&mut out)?;
    Ok(out)
}

/// Integrates from `cfg.t_start` to `cfg.t_end`. A non-finite state stops the
/// run with [`StopReason::NonFinite`] and keeps the last finite sample.
pub fn evolve(u0: &RadialField, cfg: &EvolutionConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if !u0.is_finite() {
        return Err(Error::InvalidArgument("initial data is not finite".into()));
    }
    let grid = *u0.grid();
    let m = u0.m();
    let stepper = Stepper::new(grid, m, cfg.dt)?;
    let tracker = if cfg.stop_on_resolution_floor {
        Some(modulation::default_test_profiles(m, grid)?)
    } else {
        None
    };
    let floor = cfg.floor_cells as f64 * grid.h();
    let steps = cfg.steps();

    let mut traj = Trajectory {
        grid,
        m,
        times: Vec::new(),
        monitors: Vec::new(),
        params: Vec::new(),
        snapshots: Vec::new(),
        stop_reason: StopReason::Completed,
        final_state: u0.clone(),
    };
    let mut guess: Option<SolitonParams> = None;
    let mut u = u0.clone();

    // Returns false when the run must stop.
    let mut sample = |traj: &mut Trajectory, u: &RadialField, t: f64, force_snapshot: bool| -> Result<bool> {
        let idx = traj.times.len();
        traj.times.push(t);
        traj.monitors.push(Monitors::compute(u));
        let mut keep_going = true;
        if let Some(profiles) = &tracker {
            match modulation::decompose(u, profiles, guess) {
                Ok(dec) => {
                    let p = SolitonParams { lambda: dec.lambda, gamma: dec.gamma };
                    guess = Some(p);
                    traj.params.push(Some(p));
                    if dec.lambda < floor {
                        traj.stop_reason = StopReason::ResolutionFloor { lambda: dec.lambda, time: t };
                        keep_going = false;
                    }
                }
                Err(e) => {
                    log::warn!("decomposition failed at t = {t}: {e}");
                    traj.params.push(None);
                }
            }
        } else {
            traj.params.push(None);
        }
        let stride = cfg.snapshot_stride;
        if force_snapshot || !keep_going || (stride > 0 && idx.is_multiple_of(stride)) || idx == 0 {
            traj.snapshots.push((idx, u.clone()));
        }
        Ok(keep_going)
    };

    if !sample(&mut traj, &u, cfg.t_start, true)? {
        traj.final_state = u;
        return Ok(traj);
    }
    for k in 1..=steps {
        stepper.step(&mut u)?;
        let t = cfg.t_start + k as f64 * cfg.dt;
        if k % cfg.monitor_stride == 0 || k == steps {
            if !u.is_finite() {
                traj.stop_reason = StopReason::NonFinite { step: k, time: t };
                if let Some((_, f)) = traj.snapshots.last() {
                    traj.final_state = f.clone();
                }
                return Ok(traj);
            }
            let last = k == steps;
            if !sample(&mut traj, &u, t, last)? {
                break;
            }
        }
    }
    // The last sample always carries a snapshot.
    let n_samples = traj.times.len();
    if traj.snapshots.last().map(|(i, _)| *i) != Some(n_samples - 1) {
        traj.snapshots.push((n_samples - 1, u.clone()));
    }
    traj.final_state = u;
    Ok(traj)
}

/// Residuals of the virial identities along a trajectory:
/// `∂_t∫r²|u|² − 4∫Im(ū r∂_r u)` and `∂_t∫Im(ū r∂_r u) − 4E[u]`, by central
/// differences at interior samples.
#[derive(Debug, Clone, PartialEq)]
pub struct VirialResiduals {
    pub times: Vec<f64>,
    pub variance: Vec<f64>,
    pub flux: Vec<f64>,
}

impl VirialResiduals {
    pub fn max_abs(&self) -> (f64, f64) {
        let mx = |v: &[f64]| v.iter().map(|x| x.abs()).fold(0.0, f64::max);
        (mx(&self.variance), mx(&self.flux))
    }
}

pub fn virial_residuals(traj: &Trajectory) -> Result<VirialResiduals> {
    let n = traj.times.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "virial residuals need at least 3 samples, got {n}"
        )));
    }
    let mut out = VirialResiduals {
        times: Vec::with_capacity(n - 2),
        variance: Vec::with_capacity(n - 2),
        flux: Vec::with_capacity(n - 2),
    };
    for k in 1..n - 1 {
        let (t0, t1, t2) = (traj.times[k - 1], traj.times[k], traj.times[k + 1]);
        let (a, b, c) = (&traj.monitors[k - 1], &traj.monitors[k], &traj.monitors[k + 1]);
        // Three-point derivative, valid for uneven spacing.
        let d = |f0: f64, f1: f64, f2: f64| {
            let h1 = t1 - t0;
            let h2 = t2 - t1;
            (-h2 / (h1 * (h1 + h2))) * f0 + ((h2 - h1) / (h1 * h2)) * f1 + (h1 / (h2 * (h1 + h2))) * f2
        };
        out.times.push(t1);
        out.variance.push(d(a.variance, b.variance, c.variance) - 4.0 * b.virial_flux);
        out.flux.push(d(a.virial_flux, b.virial_flux, c.virial_flux) - 4.0 * b.energy_selfdual);
    }
    Ok(out)
}

/// `[𝒞u](t, r) = (1/|t|) u(−1/t, r/|t|) e^{ir²/(4t)}`; `u` is the field at
/// time `−1/t`.
pub fn pseudoconformal(u: &RadialField, t: f64) -> Result<RadialField> {
    if t == 0.0 || !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "pseudoconformal transform needs finite t ≠ 0, got {t}"
        )));
    }
    let scaled = soliton::modulate(u, SolitonParams { lambda: t.abs(), gamma: 0.0 });
    Ok(scaled.map(|r, v| v * Complex64::from_polar(1.0, r * r / (4.0 * t))))
}
