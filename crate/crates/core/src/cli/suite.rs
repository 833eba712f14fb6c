//! The identity suite: residual checks that need no time evolution.

use std::f64::consts::PI;
use std::path::Path;

use serde::Serialize;

use super::config::ScenarioConfig;
use super::{output, scenario};
use crate::error::Result;
use crate::gauge;
use crate::grid::{self, NormKind, RadialField};
use crate::linearization::{self, LinearizedOperator};
use crate::nonlinearity;
use crate::soliton;

const DUALITY_SAMPLES: u64 = 10;

#[derive(Debug, Clone, Serialize)]
pub struct SuiteRow {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub version: &'static str,
    pub config: ScenarioConfig,
    pub rows: Vec<SuiteRow>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

fn row(name: impl Into<String>, value: f64, tolerance: f64) -> SuiteRow {
    SuiteRow {
        name: name.into(),
        value,
        tolerance,
        pass: value.is_finite() && value <= tolerance,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn identity_suite(cfg: &ScenarioConfig) -> Result<SuiteReport> {
    let grid = cfg.radial_grid()?;
    let m = cfg.m;
    let mut rows = Vec::new();

    // Duality on random sextuples.
    let mut worst = 0.0f64;
    for k in 0..DUALITY_SAMPLES {
        let fields: Vec<RadialField> = (0..6)
            .map(|j| scenario::random_h1_field(grid, m, cfg.seed.wrapping_mul(1000) + 6 * k + j, 1.0 + j as f64))
            .collect::<Result<_>>()?;
        let refs: [&RadialField; 6] = std::array::from_fn(|j| &fields[j]);
        worst = worst.max(nonlinearity::duality_residuals(refs)?.max_relative());
    }
    rows.push(row("duality (max over 5 relations)", worst, 1e-8));

    // Energy forms on a random field; they differ by a discrete integration by parts.
    let u = scenario::random_h1_field(grid, m, cfg.seed, 1.0)?;
    let e = soliton::energy(&u);
    rows.push(row(
        "energy forms agree (random field)",
        (e.coulomb - e.selfdual).abs() / soliton::energy_scale(&u),
        1e-3,
    ));

    if m >= 0 {
        let q = soliton::q_profile(m, grid)?;
        let mf = m as f64;
        let dq = soliton::covariant_cr(&q, &q)?;
        rows.push(row(
            "Bogomol'nyi residual |D_Q Q|/|Q|_H1",
            grid::norm(&dq, NormKind::L2) / grid::norm(&q, NormKind::Hdot1),
            1e-4,
        ));
        let eq = soliton::energy(&q);
        rows.push(row(
            "self-dual energy of Q",
            eq.selfdual.abs() / soliton::energy_scale(&q),
            1e-6,
        ));
        // Mass and edge potential against the closed form inside the box.
        let rp = grid.r_max().powf(2.0 * mf + 2.0);
        let inside = rp / (1.0 + rp);
        rows.push(row("mass of Q", rel(soliton::mass(&q), 8.0 * PI * (mf + 1.0) * inside), 1e-4));
        rows.push(row(
            "A_theta[Q] at r_max",
            (gauge::a_theta_at_edge(&q) + 2.0 * (mf + 1.0) * inside).abs(),
            1e-3,
        ));

        let op = LinearizedOperator::new(m, grid)?;
        let f = scenario::random_h1_field(grid, m, cfg.seed + 1, 1.0)?;
        let g = scenario::random_h1_field(grid, m, cfg.seed + 2, 1.0)?;
        let lhs = grid::inner_real(&op.l_q(&f)?, &g)?;
        let rhs = grid::inner_real(&f, &op.l_q_star(&g)?)?;
        let scale = grid::norm(&op.l_q(&f)?, NormKind::L2) * grid::norm(&g, NormKind::L2);
        rows.push(row("adjointness (L_Q f, g) = (f, L_Q* g)", (lhs - rhs).abs() / scale, 1e-10));

        let rho = linearization::rho_profile(m, grid)?;
        rows.push(row("rho residual", rho.relative_residual, 1e-4));
        // 𝓛_Q is second order while the relations are normalized in Ḣ¹, so
        // its O(h²) constant is larger (about 4e−3 for m = 2 at h = 0.01).
        for (j, k) in op.kernel_relations(&rho.rho)?.into_iter().enumerate() {
            let tol = if j < 6 { 1e-3 } else { 1e-2 };
            rows.push(row(k.name, k.relative(), tol));
        }
    }
    Ok(SuiteReport {
        version: env!("CARGO_PKG_VERSION"),
        config: cfg.clone(),
        rows,
    })
}

pub fn write_report(report: &SuiteReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("suite.csv")).map_err(|e| std::io::Error::other(e.to_string()))?;
    let io = |e: csv::Error| std::io::Error::other(e.to_string());
    w.write_record(["check", "value", "tolerance", "result"]).map_err(io)?;
    for r in &report.rows {
        w.write_record([
            r.name.clone(),
            format!("{:e}", r.value),
            format!("{:e}", r.tolerance),
            if r.pass { "PASS" } else { "FAIL" }.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    output::write_json(&dir.join("suite.json"), report)
}

pub fn print_report(report: &SuiteReport) {
    for r in &report.rows {
        println!(
            "{:<4} {:<42} {:>12.3e} (tol {:.1e})",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.value,
            r.tolerance
        );
    }
}
