//! Scenario configuration files (TOML).
//!
//! ```toml
//! scenario = "pseudoconformal_blowup"
//! m = 1
//!
//! [grid]
//! n = 10000
//! h = 0.005
//!
//! [evolution]
//! dt = 1e-4
//! t_end = -0.05
//! monitor_stride = 125
//!
//! [initial]
//! kind = "pseudoconformal_blowup"
//! t0 = -1.0
//!
//! [outputs]
//! directory = "out"
//! formats = ["csv", "json", "snapshots"]
//! ```
//!
//! Every omitted field is filled with its default by [`ScenarioConfig::resolve`],
//! and the resolved form is what gets echoed into the run summary.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::output;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;

pub const SCENARIOS: [&str; 6] = [
    "soliton_static",
    "pseudoconformal_blowup",
    "perturbed_soliton",
    "random_h1",
    "file",
    "identity_suite",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub h: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 10_000, h: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub monitor_stride: Option<usize>,
    pub snapshot_stride: Option<usize>,
    pub stop_on_resolution_floor: Option<bool>,
    pub floor_cells: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationProfile {
    /// `r^{|m|} e^{−r²}` envelope.
    Gaussian,
    /// Compactly supported bump on `[0.5, 3]`.
    Bump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    Soliton {
        #[serde(default = "one")]
        lambda: f64,
        #[serde(default)]
        gamma: f64,
    },
    PseudoconformalBlowup {
        #[serde(default = "minus_one")]
        t0: f64,
    },
    PerturbedSoliton {
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default = "default_profile")]
        profile: PerturbationProfile,
    },
    RandomH1 {
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_mass")]
        mass_target: f64,
    },
    File {
        path: PathBuf,
    },
}

fn one() -> f64 {
    1.0
}
fn minus_one() -> f64 {
    -1.0
}
fn default_amplitude() -> f64 {
    1e-2
}
fn default_profile() -> PerturbationProfile {
    PerturbationProfile::Gaussian
}
fn default_mass() -> f64 {
    1.0
}

impl InitialData {
    fn default_for(scenario: &str) -> Option<Self> {
        Some(match scenario {
            "soliton_static" => Self::Soliton { lambda: 1.0, gamma: 0.0 },
            "pseudoconformal_blowup" => Self::PseudoconformalBlowup { t0: -1.0 },
            "perturbed_soliton" => Self::PerturbedSoliton {
                seed: 0,
                amplitude: default_amplitude(),
                profile: default_profile(),
            },
            "random_h1" => Self::RandomH1 {
                seed: 0,
                mass_target: default_mass(),
            },
            _ => return None,
        })
    }

    pub fn set_seed(&mut self, new_seed: u64) {
        match self {
            Self::PerturbedSoliton { seed, .. } | Self::RandomH1 { seed, .. } => *seed = new_seed,
            _ => {}
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    Snapshots,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    #[serde(default = "default_dir")]
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<OutputFormat>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_formats() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::Json]
}

impl Default for OutputsConfig {
    fn default() -> Self {
        Self {
            directory: default_dir(),
            formats: default_formats(),
        }
    }
}

/// Config file as written by the user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub scenario: String,
    /// Defaults to 1, or to the snapshot's index for `file` data.
    #[serde(default)]
    pub m: Option<i32>,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub evolution: EvolutionSection,
    #[serde(default)]
    pub initial: Option<InitialData>,
    #[serde(default)]
    pub outputs: OutputsConfig,
    /// Seed for randomized checks in the identity suite.
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Fully materialized evolution parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedEvolution {
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub monitor_stride: usize,
    pub snapshot_stride: usize,
    pub stop_on_resolution_floor: bool,
    pub floor_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub m: i32,
    pub grid: GridConfig,
    pub evolution: ResolvedEvolution,
    pub initial: Option<InitialData>,
    pub outputs: OutputsConfig,
    pub seed: u64,
    /// Grid refinement level: `h ← h/2^level`, `n ← n·2^level`, `dt ← dt/2^level`.
    pub level: u32,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

impl ScenarioConfig {
    /// Fills defaults and validates.
    pub fn resolve(raw: RawConfig) -> Result<Self> {
        if !SCENARIOS.contains(&raw.scenario.as_str()) {
            return Err(Error::Config(format!(
                "unknown scenario `{}` (expected one of {})",
                raw.scenario,
                SCENARIOS.join(", ")
            )));
        }
        let header = match &raw.initial {
            Some(InitialData::File { path }) => Some(output::read_snapshot_header(path)?),
            _ => None,
        };
        let m = match (raw.m, header) {
            (Some(m), Some(hdr)) if m != hdr.m => {
                return Err(Error::Config(format!("m = {m} but the snapshot has m = {}", hdr.m)))
            }
            (Some(m), _) => m,
            (None, Some(hdr)) => hdr.m,
            (None, None) => 1,
        };
        let grid = match (raw.grid, header) {
            (Some(g), Some(hdr)) if g.n != hdr.n || g.h != hdr.h => {
                return Err(Error::Config(format!(
                    "[grid] n = {}, h = {} disagrees with the snapshot (n = {}, h = {})",
                    g.n, g.h, hdr.n, hdr.h
                )))
            }
            (Some(g), _) => g,
            (None, Some(hdr)) => GridConfig { n: hdr.n, h: hdr.h },
            (None, None) => match raw.scenario.as_str() {
                "pseudoconformal_blowup" => GridConfig { n: 10_000, h: 0.005 },
                _ => GridConfig::default(),
            },
        };
        if grid.n < 4 {
            return Err(Error::Config(format!("grid.n must be ≥ 4, got {}", grid.n)));
        }
        positive("grid.h", grid.h)?;

        let initial = match (raw.initial, raw.scenario.as_str()) {
            (Some(_), "identity_suite") => {
                return Err(Error::Config("identity_suite takes no [initial] section".into()))
            }
            (Some(i), "file") if !matches!(i, InitialData::File { .. }) => {
                return Err(Error::Config("scenario `file` needs [initial] kind = \"file\"".into()))
            }
            (Some(i), _) => Some(i),
            (None, "file") => {
                return Err(Error::Config("scenario `file` needs [initial] kind = \"file\" with a path".into()))
            }
            (None, s) => InitialData::default_for(s),
        };
        match &initial {
            Some(InitialData::Soliton { lambda, .. }) => positive("initial.lambda", *lambda)?,
            Some(InitialData::PseudoconformalBlowup { t0 }) => {
                if !(t0.is_finite() && *t0 < 0.0) {
                    return Err(Error::Config(format!("initial.t0 must be negative, got {t0}")));
                }
            }
            Some(InitialData::PerturbedSoliton { amplitude, .. }) => {
                if !amplitude.is_finite() || *amplitude < 0.0 {
                    return Err(Error::Config(format!("initial.amplitude must be ≥ 0, got {amplitude}")));
                }
            }
            Some(InitialData::RandomH1 { mass_target, .. }) => positive("initial.mass_target", *mass_target)?,
            _ => {}
        }
        let needs_soliton = matches!(
            initial,
            Some(InitialData::Soliton { .. } | InitialData::PseudoconformalBlowup { .. } | InitialData::PerturbedSoliton { .. })
        );
        if needs_soliton && m < 0 {
            return Err(Error::Config(format!("soliton data needs m ≥ 0, got m = {m}")));
        }

        let t_start = match (&initial, header) {
            (Some(InitialData::PseudoconformalBlowup { t0 }), _) => *t0,
            (_, Some(hdr)) => hdr.t,
            _ => 0.0,
        };
        let ev = raw.evolution;
        let dt = ev.dt.unwrap_or(match raw.scenario.as_str() {
            "pseudoconformal_blowup" => 1e-4,
            _ => grid.h.min(1e-3),
        });
        positive("evolution.dt", dt)?;
        let t_end = ev.t_end.unwrap_or(match raw.scenario.as_str() {
            "pseudoconformal_blowup" => t_start / 20.0,
            _ => t_start + 1.0,
        });
        if !(t_end.is_finite() && t_end >= t_start) {
            return Err(Error::Config(format!(
                "evolution.t_end = {t_end} precedes the start time {t_start}"
            )));
        }
        if raw.scenario == "pseudoconformal_blowup" && t_end >= 0.0 {
            return Err(Error::Config("pseudoconformal_blowup needs t_end < 0".into()));
        }
        let monitor_stride = ev.monitor_stride.unwrap_or(100);
        if monitor_stride == 0 {
            return Err(Error::Config("evolution.monitor_stride must be ≥ 1".into()));
        }
        let floor_cells = ev.floor_cells.unwrap_or(20);
        if floor_cells < 4 {
            return Err(Error::Config(format!("evolution.floor_cells must be ≥ 4, got {floor_cells}")));
        }
        let evolution = ResolvedEvolution {
            dt,
            t_start,
            t_end,
            monitor_stride,
            snapshot_stride: ev.snapshot_stride.unwrap_or(1),
            stop_on_resolution_floor: ev
                .stop_on_resolution_floor
                .unwrap_or(raw.scenario == "pseudoconformal_blowup"),
            floor_cells,
        };
        Ok(Self {
            scenario: raw.scenario,
            m,
            grid,
            evolution,
            initial,
            outputs: raw.outputs,
            seed: raw.seed.unwrap_or(0),
            level: 0,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::resolve(RawConfig::from_path(path)?)
    }

    /// Copy refined by `level` halvings of `h` and `dt` (monitor stride in
    /// steps doubled, so samples keep their times).
    pub fn at_level(&self, level: u32) -> Self {
        let mut out = self.clone();
        let f = 1usize << level;
        out.level = self.level + level;
        out.grid.n = self.grid.n * f;
        out.grid.h = self.grid.h / f as f64;
        out.evolution.dt = self.evolution.dt / f as f64;
        out.evolution.monitor_stride = self.evolution.monitor_stride * f;
        out
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        if let Some(init) = self.initial.as_mut() {
            init.set_seed(seed);
        }
        self
    }

    pub fn radial_grid(&self) -> Result<RadialGrid> {
        RadialGrid::new(self.grid.n, self.grid.h).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn wants(&self, f: OutputFormat) -> bool {
        self.outputs.formats.contains(&f)
    }
}
