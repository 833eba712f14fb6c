//! Command-line front end: `run`, `study` and `suite` over a TOML scenario
//! file. This is the only module that touches the filesystem.
//!
//! Exit codes: 0 success, 2 config error, 3 numerical abort (or a failing
//! identity check), 4 I/O error.

pub mod config;
pub mod output;
pub mod run;
pub mod scenario;
pub mod study;
pub mod suite;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{RawConfig, ScenarioConfig};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "css", version, about = "Equivariant self-dual Chern-Simons-Schrödinger simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Scenario file (TOML).
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory; overrides `outputs.directory`.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// `run`/`suite`: refinement level. `study`: number of levels (≥ 2).
    #[arg(long, value_name = "N")]
    pub level: Option<u32>,
    /// Seed for random initial data and randomized checks.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Suppress the stdout report.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write its artifacts.
    Run(CommonArgs),
    /// Convergence study over refinement levels.
    Study(CommonArgs),
    /// Identity and residual checks.
    Suite(CommonArgs),
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidArgument(_) => EXIT_CONFIG,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_NUMERICAL,
    }
}

fn load(args: &CommonArgs, apply_level: bool) -> crate::Result<(ScenarioConfig, PathBuf)> {
    let mut cfg = ScenarioConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg = cfg.with_seed(seed);
    }
    if apply_level {
        if let Some(l) = args.level {
            cfg = cfg.at_level(l);
        }
    }
    let out = args.out.clone().unwrap_or_else(|| cfg.outputs.directory.clone());
    cfg.outputs.directory = out.clone();
    Ok((cfg, out))
}

fn dispatch(cli: &Cli) -> crate::Result<i32> {
    match &cli.command {
        Command::Run(a) => {
            let (cfg, out) = load(a, true)?;
            if cfg.scenario == "identity_suite" {
                return run_suite(&cfg, &out, a.quiet);
            }
            let s = run::run(&cfg, &out)?;
            if !a.quiet {
                println!(
                    "{}: {} samples to t = {}, stop = {:?}, mass drift {:.3e}, energy drift {:.3e}",
                    cfg.scenario, s.samples, s.final_time, s.stop_reason, s.drift.mass, s.drift.energy
                );
                if let Some(b) = &s.blowup {
                    println!("blow-up time {:.6} ± {:.1e}, C_linear {:.6}", b.time.t, b.time.uncertainty, b.c_linear);
                }
            }
            Ok(EXIT_OK)
        }
        Command::Study(a) => {
            let (cfg, out) = load(a, false)?;
            let levels = a.level.unwrap_or(3);
            let report = study::convergence_study(&cfg, levels, Some(&out))?;
            if !a.quiet {
                study::print_report(&report);
            }
            Ok(EXIT_OK)
        }
        Command::Suite(a) => {
            let (cfg, out) = load(a, true)?;
            run_suite(&cfg, &out, a.quiet)
        }
    }
}

fn run_suite(cfg: &ScenarioConfig, out: &std::path::Path, quiet: bool) -> crate::Result<i32> {
    let report = suite::identity_suite(cfg)?;
    suite::write_report(&report, out)?;
    if !quiet {
        suite::print_report(&report);
    }
    Ok(if report.all_pass() { EXIT_OK } else { EXIT_NUMERICAL })
}

/// Parses `args`, executes, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
