//! Run artifacts: monitor and modulation CSV, summary JSON, field snapshots.
//!
//! `monitors.csv` has one row per monitor sample with the columns
//!
//! ```text
//! time, mass, energy_selfdual, energy_coulomb, variance, virial_flux,
//! lambda, gamma_unwrapped, eps_adapted_norm, eps_l2_norm
//! ```
//!
//! The last four are `NaN` at samples without a soliton decomposition.
//! Snapshot files start with a header line `# n=<n> h=<h> m=<m> t=<t>`
//! followed by `r Re(u) Im(u)` rows.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::grid::{RadialField, RadialGrid};
use crate::modulation::ModulationSeries;

pub const MONITOR_COLUMNS: [&str; 10] = [
    "time",
    "mass",
    "energy_selfdual",
    "energy_coulomb",
    "variance",
    "virial_flux",
    "lambda",
    "gamma_unwrapped",
    "eps_adapted_norm",
    "eps_l2_norm",
];

pub const MODULATION_COLUMNS: [&str; 8] = [
    "time",
    "frame",
    "lambda",
    "gamma_unwrapped",
    "eps_adapted_norm",
    "eps_l2_norm",
    "energy",
    "modulation_ratio",
];

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

fn fmt(x: f64) -> String {
    // Shortest round-trip representation; stable across runs.
    format!("{x:e}")
}

pub fn write_monitors(path: &Path, traj: &Trajectory, series: Option<&ModulationSeries>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(MONITOR_COLUMNS).map_err(csv_err)?;
    // Sample index → series entry.
    let mut tracked = vec![None; traj.times.len()];
    if let Some(s) = series {
        for k in 0..s.len() {
            let sample = traj.snapshots[s.frames[k]].0;
            tracked[sample] = Some(k);
        }
    }
    for (i, (t, mon)) in traj.times.iter().zip(&traj.monitors).enumerate() {
        let (lambda, gamma, adapted, l2) = match (series, tracked[i]) {
            (Some(s), Some(k)) => (s.lambda[k], s.gamma[k], s.eps_adapted[k], s.eps_l2[k]),
            _ => (f64::NAN, f64::NAN, f64::NAN, f64::NAN),
        };
        let row = [
            *t,
            mon.mass,
            mon.energy_selfdual,
            mon.energy_coulomb,
            mon.variance,
            mon.virial_flux,
            lambda,
            gamma,
            adapted,
            l2,
        ];
        w.write_record(row.iter().map(|x| fmt(*x))).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_modulation(path: &Path, series: &ModulationSeries) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(MODULATION_COLUMNS).map_err(csv_err)?;
    for k in 0..series.len() {
        w.write_record([
            fmt(series.times[k]),
            series.frames[k].to_string(),
            fmt(series.lambda[k]),
            fmt(series.gamma[k]),
            fmt(series.eps_adapted[k]),
            fmt(series.eps_l2[k]),
            fmt(series.energy[k]),
            fmt(series.modulation_ratio.get(k).copied().unwrap_or(f64::NAN)),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io(e.into()))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn write_snapshot(path: &Path, u: &RadialField, t: f64) -> Result<()> {
    let g = u.grid();
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# n={} h={} m={} t={}", g.n(), fmt(g.h()), u.m(), fmt(t))?;
    for (i, v) in u.values().iter().enumerate() {
        writeln!(w, "{} {} {}", fmt(g.r(i)), fmt(v.re), fmt(v.im))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotHeader {
    pub n: usize,
    pub h: f64,
    pub m: i32,
    pub t: f64,
}

fn parse_header(line: &str, path: &Path) -> Result<SnapshotHeader> {
    let bad = |what: &str| Error::Config(format!("{}: line 1: {what}", path.display()));
    let body = line.trim().strip_prefix('#').ok_or_else(|| bad("expected `# n=.. h=.. m=.. t=..`"))?;
    let (mut n, mut h, mut m, mut t) = (None, None, None, None);
    for tok in body.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| bad(&format!("malformed field `{tok}`")))?;
        let parse_f = |v: &str| v.parse::<f64>().map_err(|_| bad(&format!("bad value for {k}: `{v}`")));
        match k {
            "n" => n = Some(v.parse::<usize>().map_err(|_| bad(&format!("bad value for n: `{v}`")))?),
            "h" => h = Some(parse_f(v)?),
            "m" => m = Some(v.parse::<i32>().map_err(|_| bad(&format!("bad value for m: `{v}`")))?),
            "t" => t = Some(parse_f(v)?),
            other => return Err(bad(&format!("unknown header field `{other}`"))),
        }
    }
    match (n, h, m, t) {
        (Some(n), Some(h), Some(m), Some(t)) => Ok(SnapshotHeader { n, h, m, t }),
        _ => Err(bad("header needs n, h, m and t")),
    }
}

pub fn read_snapshot_header(path: &Path) -> Result<SnapshotHeader> {
    let mut line = String::new();
    BufReader::new(File::open(path)?).read_line(&mut line)?;
    parse_header(&line, path)
}

/// Reads a snapshot written by [`write_snapshot`]; returns the field and its time.
pub fn read_snapshot(path: &Path) -> Result<(RadialField, f64)> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Config(format!("{}: empty snapshot", path.display())))??;
    let hdr = parse_header(&first, path)?;
    let grid = RadialGrid::new(hdr.n, hdr.h).map_err(|e| Error::Config(e.to_string()))?;
    let mut values = Vec::with_capacity(hdr.n);
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = k + 2;
        let cols: Vec<f64> = line
            .split_whitespace()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Config(format!("{}: line {lineno}: {e}", path.display())))?;
        if cols.len() != 3 {
            return Err(Error::Config(format!(
                "{}: line {lineno}: expected 3 columns, got {}",
                path.display(),
                cols.len()
            )));
        }
        let i = values.len();
        if i < hdr.n && (cols[0] - grid.r(i)).abs() > 1e-9 * grid.r(i).max(1.0) {
            return Err(Error::Config(format!(
                "{}: line {lineno}: r = {} does not match node {i} at {}",
                path.display(),
                cols[0],
                grid.r(i)
            )));
        }
        values.push(Complex64::new(cols[1], cols[2]));
    }
    if values.len() != hdr.n {
        return Err(Error::Config(format!(
            "{}: header says n = {} but found {} rows",
            path.display(),
            hdr.n,
            values.len()
        )));
    }
    let u = RadialField::new(grid, hdr.m, values).map_err(|e| Error::Config(e.to_string()))?;
    Ok((u, hdr.t))
}
