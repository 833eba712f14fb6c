//! Single-scenario execution and the run summary.

use std::path::Path;

use serde::Serialize;

use super::config::{InitialData, OutputFormat, ScenarioConfig};
use super::{output, scenario};
use crate::dynamics::{self, EvolutionConfig, StopReason, Trajectory};
use crate::error::{Error, Result};
use crate::grid::{self, NormKind, RadialField};
use crate::modulation::{self, BlowupTime, DyadicWindow, ModulationSeries, TestProfiles};
use crate::soliton;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FinalNorms {
    pub mass: f64,
    pub l2: f64,
    pub hdot1: f64,
    pub adapted: f64,
    pub energy_selfdual: f64,
    pub energy_coulomb: f64,
}

impl FinalNorms {
    fn of(u: &RadialField) -> Self {
        let e = soliton::energy(u);
        Self {
            mass: soliton::mass(u),
            l2: grid::norm(u, NormKind::L2),
            hdot1: grid::norm(u, NormKind::Hdot1),
            adapted: grid::norm(u, NormKind::Adapted),
            energy_selfdual: e.selfdual,
            energy_coulomb: e.coulomb,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Drift {
    /// `max |M(t) − M(0)|/M(0)`
    pub mass: f64,
    /// `max |E(t) − E(0)|` over the energy scale of the initial data.
    pub energy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowupSummary {
    pub time: BlowupTime,
    pub c_linear: f64,
    pub c_log: Option<f64>,
    pub stability: Option<f64>,
    pub windows: Vec<DyadicWindow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub version: &'static str,
    pub config: ScenarioConfig,
    /// Orthogonality profile fingerprint, when the run was tracked.
    pub fingerprint: Option<String>,
    pub steps: usize,
    pub samples: usize,
    pub final_time: f64,
    pub stop_reason: StopReason,
    pub final_norms: FinalNorms,
    pub drift: Drift,
    /// Relative L² distance to the exact solution at the final time.
    pub reference_error: Option<f64>,
    pub tracked_frames: usize,
    pub blowup: Option<BlowupSummary>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub trajectory: Trajectory,
    pub series: Option<ModulationSeries>,
}

pub fn evolution_config(cfg: &ScenarioConfig) -> EvolutionConfig {
    let e = &cfg.evolution;
    EvolutionConfig {
        dt: e.dt,
        t_start: e.t_start,
        t_end: e.t_end,
        monitor_stride: e.monitor_stride,
        snapshot_stride: e.snapshot_stride,
        stop_on_resolution_floor: e.stop_on_resolution_floor,
        floor_cells: e.floor_cells,
    }
}

/// Runs the scenario in memory.
pub fn execute(cfg: &ScenarioConfig) -> Result<RunOutcome> {
    let (u0, _) = scenario::initial_state(cfg)?
        .ok_or_else(|| Error::Config(format!("scenario `{}` has no evolution", cfg.scenario)))?;
    let ev = evolution_config(cfg);
    let traj = dynamics::evolve(&u0, &ev)?;

    let mut fingerprint = None;
    let mut series = None;
    let finite = !matches!(traj.stop_reason, StopReason::NonFinite { .. });
    if scenario::is_soliton_like(cfg) && finite {
        let profiles: TestProfiles = modulation::default_test_profiles(cfg.m, traj.grid)?;
        fingerprint = Some(profiles.fingerprint());
        match modulation::track(&traj, &profiles) {
            Ok(s) => series = Some(s),
            Err(e) => log::warn!("modulation tracking skipped: {e}"),
        }
    }

    let blowup_like = matches!(cfg.initial, Some(InitialData::PseudoconformalBlowup { .. }))
        || matches!(traj.stop_reason, StopReason::ResolutionFloor { .. });
    let blowup = match (&series, blowup_like) {
        (Some(s), true) => blowup_summary(&traj, s, cfg.m),
        _ => None,
    };

    let last = traj.times.len() - 1;
    let final_time = traj.times[last];
    let reference_error = match scenario::reference_solution(cfg, final_time)? {
        Some(exact) if finite => {
            let u = traj.snapshot_at(last).unwrap_or(&traj.final_state);
            Some(grid::norm(&(u - &exact), NormKind::L2) / grid::norm(&exact, NormKind::L2))
        }
        _ => None,
    };
    let final_state = traj.snapshot_at(last).unwrap_or(&traj.final_state);
    let summary = RunSummary {
        version: env!("CARGO_PKG_VERSION"),
        config: cfg.clone(),
        fingerprint,
        steps: ev.steps(),
        samples: traj.times.len(),
        final_time,
        stop_reason: traj.stop_reason,
        final_norms: FinalNorms::of(final_state),
        drift: Drift {
            mass: traj.max_mass_drift(),
            energy: traj.max_energy_drift(soliton::energy_scale(&u0)),
        },
        reference_error,
        tracked_frames: series.as_ref().map_or(0, |s| s.len()),
        blowup,
    };
    Ok(RunOutcome {
        summary,
        trajectory: traj,
        series,
    })
}

fn blowup_summary(traj: &Trajectory, series: &ModulationSeries, m: i32) -> Option<BlowupSummary> {
    let time = match modulation::estimate_blowup_time(traj, Some(series)) {
        Ok(t) => t,
        Err(e) => {
            log::warn!("blow-up time estimate skipped: {e}");
            return None;
        }
    };
    match modulation::blowup_rate_fit(series, m, time.t) {
        Ok(fit) => Some(BlowupSummary {
            time,
            c_linear: fit.c_linear,
            c_log: fit.c_log,
            stability: fit.stability,
            windows: fit.windows,
        }),
        Err(e) => {
            log::warn!("rate fit skipped: {e}");
            None
        }
    }
}

/// Writes the artifacts selected by `cfg.outputs.formats` into `dir`.
pub fn write_outputs(outcome: &RunOutcome, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let cfg = &outcome.summary.config;
    if cfg.wants(OutputFormat::Csv) {
        output::write_monitors(&dir.join("monitors.csv"), &outcome.trajectory, outcome.series.as_ref())?;
        if let Some(s) = &outcome.series {
            output::write_modulation(&dir.join("modulation.csv"), s)?;
        }
    }
    if cfg.wants(OutputFormat::Json) {
        output::write_json(&dir.join("summary.json"), &outcome.summary)?;
    }
    if cfg.wants(OutputFormat::Snapshots) {
        let traj = &outcome.trajectory;
        for (sample, u) in &traj.snapshots {
            output::write_snapshot(&dir.join(format!("snapshot_{sample:04}.txt")), u, traj.times[*sample])?;
        }
    }
    Ok(())
}

/// Executes and persists; a non-finite abort is reported after the partial
/// outputs are written.
pub fn run(cfg: &ScenarioConfig, dir: &Path) -> Result<RunSummary> {
    let outcome = execute(cfg)?;
    write_outputs(&outcome, dir)?;
    if let StopReason::NonFinite { step, time } = outcome.summary.stop_reason {
        return Err(Error::NonFinite { step, time });
    }
    Ok(outcome.summary)
}
