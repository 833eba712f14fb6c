//! Convergence studies: the scenario rerun with `(h, dt)` halved per level.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::config::ScenarioConfig;
use super::{output, run, scenario};
use crate::dynamics::{self, StopReason};
use crate::error::{Error, Result};
use crate::grid::{self, NormKind, RadialField};
use crate::nonlinearity;
use crate::soliton;

/// Residuals below this (relative) are treated as rounding.
const ROUNDING_LEVEL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct ResidualClass {
    pub name: String,
    /// One entry per level, coarse to fine.
    pub errors: Vec<f64>,
    /// `log2(e_k/e_{k+1})`; empty when the class is exact.
    pub orders: Vec<f64>,
    /// `"measured"` or `"exact"` (flat at rounding level, order test skipped).
    pub status: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyReport {
    pub version: &'static str,
    pub config: ScenarioConfig,
    pub h: Vec<f64>,
    pub dt: Vec<f64>,
    pub classes: Vec<ResidualClass>,
}

impl StudyReport {
    pub fn class(&self, name: &str) -> Option<&ResidualClass> {
        self.classes.iter().find(|c| c.name == name)
    }
}

type LevelResiduals = Vec<(&'static str, f64)>;

fn duality_sextuple(cfg: &ScenarioConfig, grid: crate::RadialGrid) -> Result<f64> {
    let fields: Vec<RadialField> = (0..6)
        .map(|k| scenario::random_h1_field(grid, cfg.m, cfg.seed.wrapping_mul(6).wrapping_add(k), 1.0))
        .collect::<Result<_>>()?;
    let refs: [&RadialField; 6] = std::array::from_fn(|k| &fields[k]);
    Ok(nonlinearity::duality_residuals(refs)?.max_relative())
}

fn level_residuals(cfg: &ScenarioConfig, dir: Option<&Path>) -> Result<LevelResiduals> {
    let grid = cfg.radial_grid()?;
    let mut out = Vec::new();
    if cfg.m >= 0 {
        let q = soliton::q_profile(cfg.m, grid)?;
        let dq = soliton::covariant_cr(&q, &q)?;
        out.push((
            "bogomolnyi",
            grid::norm(&dq, NormKind::L2) / grid::norm(&q, NormKind::Hdot1),
        ));
    }
    out.push(("duality", duality_sextuple(cfg, grid)?));
    if cfg.initial.is_none() {
        return Ok(out);
    }
    let outcome = run::execute(cfg)?;
    if let Some(d) = dir {
        run::write_outputs(&outcome, d)?;
    }
    if let StopReason::NonFinite { step, time } = outcome.summary.stop_reason {
        return Err(Error::NonFinite { step, time });
    }
    if let Some(e) = outcome.summary.reference_error {
        out.push(("tracking", e));
    }
    out.push(("mass_drift", outcome.summary.drift.mass));
    out.push(("energy_drift", outcome.summary.drift.energy));
    if let Ok(v) = dynamics::virial_residuals(&outcome.trajectory) {
        let scale = soliton::energy_scale(&outcome.trajectory.final_state).max(f64::MIN_POSITIVE);
        let (a, b) = v.max_abs();
        out.push(("virial_variance", a / scale));
        out.push(("virial_flux", b / scale));
    }
    Ok(out)
}

/// Runs levels `0..levels` in parallel. Per-level artifacts go to
/// `dir/level_<k>` when `dir` is given.
pub fn convergence_study(cfg: &ScenarioConfig, levels: u32, dir: Option<&Path>) -> Result<StudyReport> {
    if levels < 2 {
        return Err(Error::Config(format!("a convergence study needs at least 2 levels, got {levels}")));
    }
    let configs: Vec<ScenarioConfig> = (0..levels).map(|k| cfg.at_level(k)).collect();
    let per_level: Vec<LevelResiduals> = configs
        .par_iter()
        .enumerate()
        .map(|(k, c)| {
            let sub = dir.map(|d| d.join(format!("level_{k}")));
            level_residuals(c, sub.as_deref())
        })
        .collect::<Result<_>>()?;

    let mut classes = Vec::new();
    for (name, _) in &per_level[0] {
        let errors: Vec<f64> = per_level
            .iter()
            .map(|lv| lv.iter().find(|(n, _)| n == name).map_or(f64::NAN, |(_, e)| *e))
            .collect();
        let exact = *name == "duality" || errors.iter().all(|e| e.abs() < ROUNDING_LEVEL);
        classes.push(ResidualClass {
            name: name.to_string(),
            orders: if exact { Vec::new() } else { grid::observed_orders(&errors, 2.0) },
            errors,
            status: if exact { "exact" } else { "measured" },
        });
    }
    let report = StudyReport {
        version: env!("CARGO_PKG_VERSION"),
        config: cfg.clone(),
        h: configs.iter().map(|c| c.grid.h).collect(),
        dt: configs.iter().map(|c| c.evolution.dt).collect(),
        classes,
    };
    if let Some(d) = dir {
        std::fs::create_dir_all(d)?;
        output::write_json(&d.join("study.json"), &report)?;
    }
    Ok(report)
}

pub fn print_report(report: &StudyReport) {
    println!("{:<16} {:>12} orders", "class", "finest");
    for c in &report.classes {
        let finest = c.errors.last().copied().unwrap_or(f64::NAN);
        let orders = if c.status == "exact" {
            "exact".to_string()
        } else {
            c.orders.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>().join(" ")
        };
        println!("{:<16} {:>12.3e} {}", c.name, finest, orders);
    }
}
