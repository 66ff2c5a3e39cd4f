#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

//! Runner behind the `betaplane` binary: configuration, the five
//! subcommands, and the manifest that records what each run wrote.

pub mod config;
pub mod output;
pub mod scenarios;

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use betaplane::atlas::{closed_form_eigenpair, gamma_point, scan_atlas, Curve};
use betaplane::evolution::{integrate, SimSetup};
use betaplane::rayleighkuo::{limiting_absorption, solve_bvp, AbsorptionConfig, BvpProblem, Side};
use betaplane::spectra::{discrete_spectrum, remove_discrete_projection, unstable_modes};
use betaplane::{chebyshev_grid, make_profile, ComplexField, Grid, ShearProfile};
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use config::{InitialData, RunConfig, Subcommand};
use output::{csv_row, GridInfo, OutputDir, RunManifest};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] betaplane::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Outcome of a run that did not error: `Failed` is a verify scenario
/// whose checks did not all pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Success,
    Failed,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Success => 0,
            RunStatus::Failed => 2,
        }
    }
}

struct Product {
    status: RunStatus,
    grid: Option<GridInfo>,
    dt: Option<f64>,
    summary: Map<String, Value>,
}

impl Product {
    fn new(grid: Option<&Grid>) -> Self {
        Product {
            status: RunStatus::Success,
            grid: grid.map(|g| GridInfo { n: g.n, y1: g.y1, y2: g.y2 }),
            dt: None,
            summary: Map::new(),
        }
    }
}

/// Runs one subcommand into `cfg.out_dir`. On error every file written so
/// far is removed and no manifest is left behind.
pub fn run(cfg: &RunConfig) -> Result<(RunStatus, RunManifest), CliError> {
    let start = Instant::now();
    let mut out = OutputDir::create(&cfg.out_dir)?;
    let product = match cfg.subcommand {
        Subcommand::Evolve => evolve(cfg, &mut out),
        Subcommand::Spectrum => spectrum(cfg, &mut out),
        Subcommand::Bvp => bvp(cfg, &mut out),
        Subcommand::Atlas => atlas(cfg, &mut out),
        Subcommand::Verify => verify(cfg, &mut out),
    };
    let product = match product {
        Ok(p) => p,
        Err(e) => {
            out.cleanup();
            return Err(e);
        }
    };
    let manifest = RunManifest {
        tool: "betaplane",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: cfg.subcommand.name(),
        config: serde_json::to_value(&cfg.file)?,
        grid: product.grid,
        dt: product.dt,
        outputs: Vec::new(),
        content_hash: String::new(),
        summary: product.summary,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok((product.status, out.finish(manifest)?))
}

fn profile_of(cfg: &RunConfig) -> Result<ShearProfile, CliError> {
    let p = cfg
        .file
        .profile
        .as_ref()
        .ok_or_else(|| CliError::Config("missing `profile` section".into()))?;
    Ok(make_profile(&p.name, &p.params)?)
}

fn physics_of(cfg: &RunConfig) -> Result<(f64, f64), CliError> {
    let p = cfg
        .file
        .physics
        .as_ref()
        .ok_or_else(|| CliError::Config("missing `physics` section".into()))?;
    Ok((p.alpha, p.beta))
}

fn parse_curve(name: &str) -> Result<Curve, CliError> {
    Curve::ALL
        .into_iter()
        .find(|c| c.name() == name)
        .ok_or_else(|| CliError::Config(format!("unknown curve `{name}` (expected gamma1, gamma2, gamma3 or gamma4)")))
}

/// Discretized initial data on `grid`.
pub fn initial_field(data: &InitialData, grid: &Arc<Grid>, alpha: f64) -> Result<ComplexField, CliError> {
    let (y1, l) = (grid.y1, grid.length());
    match data {
        InitialData::SineMode { k } => {
            if *k == 0 {
                return Err(CliError::Config("sine_mode needs k >= 1".into()));
            }
            let kk = *k as f64 * PI / l;
            Ok(ComplexField::from_real_fn(grid.clone(), |y| (kk * (y - y1)).sin()))
        }
        InitialData::SineSeries { coefficients } => Ok(ComplexField::from_real_fn(grid.clone(), |y| {
            coefficients
                .iter()
                .enumerate()
                .map(|(k, a)| a * ((k + 1) as f64 * PI * (y - y1) / l).sin())
                .sum()
        })),
        InitialData::GammaMode { curve, parameter } => {
            let curve = parse_curve(curve)?;
            let pt = gamma_point(curve, *parameter)?;
            if (pt.alpha - alpha).abs() > 1e-9 * alpha.max(1.0) {
                log::warn!(
                    "physics.alpha = {alpha} differs from the curve point alpha = {}; the mode is not an eigenmode at this alpha",
                    pt.alpha
                );
            }
            let cf = closed_form_eigenpair(curve, *parameter, grid)?;
            let (a, b) = cf.validity;
            let m = cf.monomial;
            let a2 = pt.alpha * pt.alpha;
            Ok(ComplexField::from_real_fn(grid.clone(), |y| {
                if y > a && y < b {
                    let (phi, d2) = m.eval(y);
                    -(d2 - a2 * phi)
                } else {
                    0.0
                }
            }))
        }
        InitialData::File { path } => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read initial data `{}`: {e}", path.display())))?;
            Ok(ComplexField::from_csv(grid.clone(), &text)?)
        }
    }
}

fn field_csv(cols: &[(&str, &ComplexField)]) -> String {
    let mut s = String::from("y");
    for (name, _) in cols {
        s.push_str(&format!(",{name}_re,{name}_im"));
    }
    s.push('\n');
    let grid = &cols[0].1.grid;
    for i in 0..grid.len() {
        let mut row = vec![grid.nodes[i]];
        for (_, f) in cols {
            row.push(f.values[i].re);
            row.push(f.values[i].im);
        }
        s.push_str(&csv_row(&row));
        s.push('\n');
    }
    s
}

fn evolve(cfg: &RunConfig, out: &mut OutputDir) -> Result<Product, CliError> {
    let profile = profile_of(cfg)?;
    let (alpha, beta) = physics_of(cfg)?;
    let num = &cfg.file.numerics;
    let (y1, y2) = profile.domain();
    let grid = chebyshev_grid(num.n, y1, y2)?;
    let data = cfg.file.initial_data.as_ref().expect("validated");
    let mut omega0 = initial_field(data, &grid, alpha)?;
    if cfg.file.project_out_discrete {
        let spec = discrete_spectrum(&profile, alpha, beta, &grid)?;
        omega0 = remove_discrete_projection(&omega0, &spec, alpha)?;
    }
    let mut setup = SimSetup::new(profile, alpha, beta, grid.clone(), num.dt, num.t_final, num.sample_stride)?;
    setup.filter = num.filter;
    log::info!("evolve: N = {}, dt = {:.4e}, {} steps", grid.n, setup.dt, setup.steps);
    let traj = integrate(&omega0, &setup)?;

    let crit: Vec<f64> = traj.records.first().map_or(Vec::new(), |r| r.critical_values.iter().map(|c| c.0).collect());
    let mut csv = String::from("t,enstrophy,v_norm,v2_norm,dpsi_y1_re,dpsi_y1_im,dpsi_y2_re,dpsi_y2_im");
    for y0 in &crit {
        csv.push_str(&format!(",crit_{y0}"));
    }
    csv.push_str(",omega1_norm\n");
    for r in &traj.records {
        let mut row = vec![
            r.t,
            r.enstrophy,
            r.v_norm,
            r.v2_norm,
            r.boundary_traces[0].0,
            r.boundary_traces[0].1,
            r.boundary_traces[1].0,
            r.boundary_traces[1].1,
        ];
        row.extend(r.critical_values.iter().map(|c| c.1));
        row.push(r.omega1_norm.unwrap_or(f64::NAN));
        csv.push_str(&csv_row(&row));
        csv.push('\n');
    }
    out.write("series.csv", csv.as_bytes())?;
    out.write("final_field.csv", field_csv(&[("omega", &traj.final_field)]).as_bytes())?;

    let mut p = Product::new(Some(&grid));
    p.dt = Some(setup.dt);
    let last = traj.records.last().expect("at least one sample");
    p.summary.insert("steps".into(), json!(setup.steps));
    p.summary.insert("t_final".into(), json!(last.t));
    p.summary.insert("enstrophy_final".into(), json!(last.enstrophy));
    p.summary.insert("v_norm_final".into(), json!(last.v_norm));
    p.summary.insert("v2_norm_final".into(), json!(last.v2_norm));
    Ok(p)
}

fn spectrum(cfg: &RunConfig, out: &mut OutputDir) -> Result<Product, CliError> {
    let profile = profile_of(cfg)?;
    let (alpha, beta) = physics_of(cfg)?;
    let (y1, y2) = profile.domain();
    let grid = chebyshev_grid(cfg.file.numerics.n, y1, y2)?;
    let spec = discrete_spectrum(&profile, alpha, beta, &grid)?;
    let accepted: Vec<usize> = (0..spec.eigenvalues.len()).filter(|&k| spec.accepted[k]).collect();
    let unstable = unstable_modes(&spec, 0.0);
    let modes: Vec<Value> = accepted
        .iter()
        .map(|&k| {
            json!({
                "c": [spec.eigenvalues[k].re, spec.eigenvalues[k].im],
                "refinement_gap": spec.refinement_gap[k],
            })
        })
        .collect();
    let doc = json!({
        "alpha": alpha,
        "beta": beta,
        "n": grid.n,
        "accepted": modes,
        "unstable": unstable.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
        "growth_rate": unstable.iter().map(|c| alpha * c.im).fold(0.0, f64::max),
        "candidates": spec.eigenvalues.len(),
    });
    out.write("spectrum.json", serde_json::to_string_pretty(&doc)?.as_bytes())?;
    let names: Vec<String> = (0..accepted.len()).map(|j| format!("psi{j}")).collect();
    let cols: Vec<(&str, &ComplexField)> = accepted
        .iter()
        .enumerate()
        .map(|(j, &k)| (names[j].as_str(), &spec.right_modes[k]))
        .collect();
    let modes_csv = if cols.is_empty() {
        String::from("y\n")
    } else {
        field_csv(&cols)
    };
    out.write("modes.csv", modes_csv.as_bytes())?;
    let mut p = Product::new(Some(&grid));
    p.summary.insert("accepted_modes".into(), json!(accepted.len()));
    p.summary.insert("unstable_modes".into(), json!(unstable.len()));
    Ok(p)
}

fn bvp(cfg: &RunConfig, out: &mut OutputDir) -> Result<Product, CliError> {
    let profile = profile_of(cfg)?;
    let (alpha, beta) = physics_of(cfg)?;
    let (y1, y2) = profile.domain();
    let grid = chebyshev_grid(cfg.file.numerics.n, y1, y2)?;
    let forcing = initial_field(cfg.file.initial_data.as_ref().expect("validated"), &grid, alpha)?;
    let spec = cfg.file.bvp.as_ref().expect("validated");
    let c = Complex64::new(spec.c[0], spec.c[1]);
    let (lo, hi) = profile.range();
    let mut p = Product::new(Some(&grid));
    let phi = if c.im == 0.0 && c.re >= lo && c.re <= hi {
        let side = match spec.side.as_deref() {
            Some("minus") => Side::Minus,
            _ => Side::Plus,
        };
        let mut acfg = AbsorptionConfig::default();
        if let Some(s) = &spec.eps_schedule {
            acfg.eps_schedule = s.clone();
        }
        let sol = limiting_absorption(&profile, alpha, beta, c.re, &forcing, side, &acfg, &grid)?;
        p.summary.insert("method".into(), json!("limiting_absorption"));
        p.summary.insert("side".into(), json!(if side == Side::Plus { "plus" } else { "minus" }));
        p.summary.insert("last_change".into(), json!(sol.last_change));
        p.summary.insert("levels_used".into(), json!(sol.levels_used));
        sol.phi
    } else {
        let sol = solve_bvp(&BvpProblem { profile, alpha, beta, c, forcing }, &grid)?;
        p.summary.insert("method".into(), json!("direct"));
        p.summary.insert("residual_sup".into(), json!(sol.residual_sup));
        p.summary.insert("h1_ratio".into(), json!(sol.h1_ratio));
        p.summary.insert("condition_estimate".into(), json!(sol.condition_estimate));
        sol.phi
    };
    out.write("phi.csv", field_csv(&[("phi", &phi)]).as_bytes())?;
    Ok(p)
}

fn atlas(cfg: &RunConfig, out: &mut OutputDir) -> Result<Product, CliError> {
    let a = cfg.file.atlas.as_ref().expect("validated");
    let cells = scan_atlas(
        (a.alpha_range[0], a.alpha_range[1]),
        (a.beta_range[0], a.beta_range[1]),
        a.n_alpha,
        a.n_beta,
        a.n_grid,
    )?;
    let mut csv = String::from("alpha,beta,tag,growth_rate\n");
    let mut failed = 0usize;
    for c in &cells {
        if let Some(e) = &c.error {
            failed += 1;
            log::warn!("atlas cell ({}, {}): {e}", c.alpha, c.beta);
        }
        csv.push_str(&format!("{:e},{:e},{},{:e}\n", c.alpha, c.beta, c.tag.name(), c.growth_rate));
    }
    out.write("atlas.csv", csv.as_bytes())?;
    let mut counts = Map::new();
    for c in &cells {
        let e = counts.entry(c.tag.name().to_string()).or_insert(json!(0));
        *e = json!(e.as_u64().unwrap_or(0) + 1);
    }
    let doc = json!({ "cells": cells.len(), "failed_cells": failed, "tags": counts });
    out.write("atlas_summary.json", serde_json::to_string_pretty(&doc)?.as_bytes())?;
    let mut p = Product::new(None);
    p.summary.insert("cells".into(), json!(cells.len()));
    p.summary.insert("failed_cells".into(), json!(failed));
    Ok(p)
}

fn verify(cfg: &RunConfig, out: &mut OutputDir) -> Result<Product, CliError> {
    let name = cfg.scenario.as_deref().expect("validated");
    let list: Vec<&scenarios::Scenario> = if name == "all" {
        scenarios::SCENARIOS.iter().collect()
    } else {
        vec![scenarios::find(name).expect("validated")]
    };
    let mut p = Product::new(None);
    for s in list {
        let report = scenarios::run_scenario(s);
        println!("{}", report.line());
        out.write(&format!("verify_{}.json", s.name), serde_json::to_string_pretty(&report)?.as_bytes())?;
        p.summary.insert(s.name.into(), json!(report.pass));
        if !report.pass {
            p.status = RunStatus::Failed;
        }
    }
    Ok(p)
}
