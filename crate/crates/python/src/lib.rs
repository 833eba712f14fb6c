//! Python bindings for `css_core`.
//!
//! Fields cross the boundary as lists of Python complex numbers; everything
//! else is plain floats, tuples and dicts.

use std::collections::BTreeMap;

use css_core::cli::{suite, RawConfig, ScenarioConfig};
use css_core::dynamics::{self, EvolutionConfig, StopReason};
use css_core::modulation;
use css_core::soliton::{self, SolitonParams};
use css_core::{Complex64, Error, NormKind, RadialField, RadialGrid};
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_) | Error::Config(_) | Error::GridMismatch(_) | Error::IndexMismatch { .. } => {
            PyValueError::new_err(e.to_string())
        }
        Error::NonFinite { .. } => PyArithmeticError::new_err(e.to_string()),
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Cell-centered radial grid `r_i = (i + 1/2) h`.
#[pyclass(name = "Grid", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyGrid(RadialGrid);

#[pymethods]
impl PyGrid {
    #[new]
    fn new(n: usize, h: f64) -> PyResult<Self> {
        RadialGrid::new(n, h).map(Self).map_err(to_py)
    }

    /// Grid of spacing `h` covering `[0, r_max]`.
    #[staticmethod]
    fn with_extent(r_max: f64, h: f64) -> PyResult<Self> {
        RadialGrid::with_extent(r_max, h).map(Self).map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn h(&self) -> f64 {
        self.0.h()
    }

    #[getter]
    fn r_max(&self) -> f64 {
        self.0.r_max()
    }

    fn nodes(&self) -> Vec<f64> {
        self.0.nodes()
    }

    fn __repr__(&self) -> String {
        format!("Grid(n={}, h={})", self.0.n(), self.0.h())
    }
}

/// Complex radial profile with equivariance index `m`.
#[pyclass(name = "Field", frozen, from_py_object)]
#[derive(Clone)]
struct PyField(RadialField);

#[pymethods]
impl PyField {
    #[new]
    fn new(grid: PyGrid, m: i32, values: Vec<Complex64>) -> PyResult<Self> {
        RadialField::new(grid.0, m, values).map(Self).map_err(to_py)
    }

    #[getter]
    fn m(&self) -> i32 {
        self.0.m()
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid(*self.0.grid())
    }

    fn values(&self) -> Vec<Complex64> {
        self.0.values().to_vec()
    }

    fn mass(&self) -> f64 {
        soliton::mass(&self.0)
    }

    /// `(coulomb, selfdual)` energies.
    fn energy(&self) -> (f64, f64) {
        let e = soliton::energy(&self.0);
        (e.coulomb, e.selfdual)
    }

    /// One of `"l2"`, `"hdot1"`, `"adapted"`, `"h11"`, `"minus1"`.
    #[pyo3(signature = (kind = "l2"))]
    fn norm(&self, kind: &str) -> PyResult<f64> {
        let kind: NormKind = kind.parse().map_err(to_py)?;
        Ok(css_core::grid::norm(&self.0, kind))
    }

    /// Value at an arbitrary radius, interpolated.
    fn sample(&self, r: f64) -> Complex64 {
        self.0.sample_at(r)
    }

    fn __len__(&self) -> usize {
        self.0.grid().n()
    }

    fn __repr__(&self) -> String {
        format!("Field(m={}, n={}, h={})", self.0.m(), self.0.grid().n(), self.0.grid().h())
    }
}

/// Sampled trajectory returned by [`evolve`].
#[pyclass(name = "Trajectory", frozen)]
struct PyTrajectory {
    #[pyo3(get)]
    times: Vec<f64>,
    #[pyo3(get)]
    stop_reason: String,
    monitors: BTreeMap<String, Vec<f64>>,
    snapshots: Vec<(f64, RadialField)>,
    final_state: RadialField,
}

#[pymethods]
impl PyTrajectory {
    /// Monitor name -> one value per sample.
    fn monitors(&self) -> BTreeMap<String, Vec<f64>> {
        self.monitors.clone()
    }

    /// `(time, field)` pairs.
    fn snapshots(&self) -> Vec<(f64, PyField)> {
        self.snapshots.iter().map(|(t, f)| (*t, PyField(f.clone()))).collect()
    }

    #[getter]
    fn final_state(&self) -> PyField {
        PyField(self.final_state.clone())
    }
}

#[pyfunction]
fn q_profile(m: i32, grid: PyGrid) -> PyResult<PyField> {
    soliton::q_profile(m, grid.0).map(PyField).map_err(to_py)
}

/// `λ^{-1} e^{iγ} Q(r/λ)` sampled on `grid`.
#[pyfunction]
fn q_modulated(m: i32, grid: PyGrid, lambda_: f64, gamma: f64) -> PyResult<PyField> {
    let p = SolitonParams::new(lambda_, gamma).map_err(to_py)?;
    soliton::q_modulated(m, grid.0, p).map(PyField).map_err(to_py)
}

/// One Strang step of size `dt`.
#[pyfunction]
fn step(u: &PyField, dt: f64) -> PyResult<PyField> {
    dynamics::strang_step(&u.0, dt).map(PyField).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (u, t_end, dt = None, t_start = 0.0, monitor_stride = 100, snapshot_stride = 1))]
fn evolve(
    u: &PyField,
    t_end: f64,
    dt: Option<f64>,
    t_start: f64,
    monitor_stride: usize,
    snapshot_stride: usize,
) -> PyResult<PyTrajectory> {
    let mut cfg = EvolutionConfig::for_grid(u.0.grid(), t_start, t_end);
    if let Some(dt) = dt {
        cfg.dt = dt;
    }
    cfg.monitor_stride = monitor_stride;
    cfg.snapshot_stride = snapshot_stride;
    let traj = dynamics::evolve(&u.0, &cfg).map_err(to_py)?;

    let mut monitors: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for mon in &traj.monitors {
        for (k, v) in [
            ("mass", mon.mass),
            ("energy_selfdual", mon.energy_selfdual),
            ("energy_coulomb", mon.energy_coulomb),
            ("variance", mon.variance),
            ("virial_flux", mon.virial_flux),
        ] {
            monitors.entry(k.to_string()).or_default().push(v);
        }
    }
    let stop_reason = match traj.stop_reason {
        StopReason::Completed => "completed".to_string(),
        StopReason::ResolutionFloor { lambda, time } => format!("resolution_floor(lambda={lambda:e}, t={time})"),
        StopReason::NonFinite { step, time } => format!("non_finite(step={step}, t={time})"),
    };
    let snapshots = traj.snapshots.iter().map(|(k, f)| (traj.times[*k], f.clone())).collect();
    Ok(PyTrajectory {
        times: traj.times,
        stop_reason,
        monitors,
        snapshots,
        final_state: traj.final_state,
    })
}

/// Decompose `u = [Q + ε]_{λ,γ}`; returns `(lambda, gamma, eps)`.
#[pyfunction]
#[pyo3(signature = (u, guess = None))]
fn decompose(u: &PyField, guess: Option<(f64, f64)>) -> PyResult<(f64, f64, PyField)> {
    let profiles = modulation::default_test_profiles(u.0.m(), *u.0.grid()).map_err(to_py)?;
    let guess = guess.map(|(l, g)| SolitonParams::new(l, g)).transpose().map_err(to_py)?;
    let dec = modulation::decompose(&u.0, &profiles, guess).map_err(to_py)?;
    Ok((dec.lambda, dec.gamma, PyField(dec.eps)))
}

/// Run the identity suite for a TOML scenario; returns
/// `(name, value, tolerance, passed)` rows.
#[pyfunction]
fn identity_suite(config_toml: &str) -> PyResult<Vec<(String, f64, f64, bool)>> {
    let cfg = ScenarioConfig::resolve(RawConfig::parse(config_toml).map_err(to_py)?).map_err(to_py)?;
    let report = suite::identity_suite(&cfg).map_err(to_py)?;
    Ok(report.rows.into_iter().map(|r| (r.name, r.value, r.tolerance, r.pass)).collect())
}

#[pymodule]
pub fn css_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(q_profile, m)?)?;
    m.add_function(wrap_pyfunction!(q_modulated, m)?)?;
    m.add_function(wrap_pyfunction!(step, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(identity_suite, m)?)?;
    Ok(())
}
