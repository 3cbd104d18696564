//! Implementations behind the command-line subcommands.
//!
//! Every command reads one configuration document, writes its artifacts into
//! the resolved output directory, prints a short summary to stdout, and
//! returns a typed error whose exit code the binary forwards: 2 for
//! configuration violations, 3 for numerical failures, 4 for I/O. A
//! `manifest.json` closes each artifact directory with the configuration
//! fingerprint, the file list, and the wall-clock time (the one entry that
//! varies between identical runs; the tables themselves are byte-stable).

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{RunConfig, SnapshotFormat};
use crate::entropy::{TestFunction, WeakPairs};
use crate::error::{Error, Result};
use crate::galerkin::{RunOutcome, Solver};
use crate::invariants::{energy_drift, monitor_trajectory, MonitorRecord};
use crate::io;
use crate::sweep::{build_reference, run_sweep};

/// One artifact directory in the making: the parsed configuration, the
/// resolved target directory, and the list of files written so far.
struct Workspace {
    cfg: RunConfig,
    dir: PathBuf,
    config_text: String,
    started: Instant,
    outputs: Vec<String>,
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn open_workspace(config_path: &Path) -> Result<Workspace> {
    let config_text = fs::read_to_string(config_path).map_err(|e| io_err(config_path, e))?;
    let cfg = RunConfig::from_toml(&config_text)?;
    let dir = io::resolve_output_dir(&cfg.output_dir);
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    Ok(Workspace { cfg, dir, config_text, started: Instant::now(), outputs: Vec::new() })
}

impl Workspace {
    /// Register an output file and hand back its full path.
    fn file(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        self.dir.join(name)
    }

    /// Write the manifest and close the directory.
    fn finish(mut self, command: &str, details: serde_json::Value) -> Result<()> {
        self.outputs.push("manifest.json".to_string());
        let manifest = io::Manifest {
            command: command.to_string(),
            config_sha256: io::sha256_hex(self.config_text.as_bytes()),
            package_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: self.outputs,
            wall_seconds: self.started.elapsed().as_secs_f64(),
            details,
        };
        io::write_manifest(&self.dir.join("manifest.json"), &manifest)
    }
}

fn uniform_grid(points: usize) -> Vec<f64> {
    (0..points).map(|i| i as f64 / (points - 1) as f64).collect()
}

fn integrate(ws: &Workspace) -> Result<(Solver, RunOutcome)> {
    let solver = Solver::new(ws.cfg.solver.clone())?;
    let state0 = solver.initial_state()?;
    let run = solver.run(state0);
    Ok((solver, run))
}

/// `simulate <config>`: integrate the viscous system, write one snapshot per
/// monitor record plus the monitor table. A run that stops early keeps its
/// prefix on disk and exits with the numerical failure.
pub fn simulate(config_path: &Path) -> Result<()> {
    let mut ws = open_workspace(config_path)?;
    let (solver, run) = integrate(&ws)?;
    let grid = uniform_grid(ws.cfg.snapshot_points);
    let ext = match ws.cfg.snapshot_format {
        SnapshotFormat::Binary => "bin",
        SnapshotFormat::Csv => "csv",
    };
    for (i, state) in run.snapshots.iter().enumerate() {
        let snap = solver.reconstruct(state, &grid)?;
        let path = ws.file(&format!("snapshot_{i:05}.{ext}"));
        match ws.cfg.snapshot_format {
            SnapshotFormat::Binary => io::write_snapshot_binary(&path, &snap)?,
            SnapshotFormat::Csv => io::write_snapshot_csv(&path, &snap)?,
        }
    }
    let records = monitor_trajectory(&solver, &run.snapshots)?;
    io::write_monitors(&ws.file("monitors.csv"), &records)?;
    let status = match &run.error {
        None => "ok".to_string(),
        Some(e) => e.to_string(),
    };
    let final_t = run.snapshots.last().map_or(0.0, |s| s.t);
    println!(
        "integrated {} steps to t = {final_t:.6}; wrote {} snapshots and {} monitor rows to {}",
        run.steps_taken,
        run.snapshots.len(),
        records.len(),
        ws.dir.display()
    );
    let details = json!({
        "status": status,
        "steps_taken": run.steps_taken,
        "final_time": final_t,
        "snapshots": run.snapshots.len(),
    });
    ws.finish("simulate", details)?;
    match run.error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// `sweep <config>`: run the vanishing-viscosity ladder and write the
/// distance table. Per-rung failures are rows in the table, not process
/// failures; the command fails only if the plan or the shared limit
/// reference cannot be built.
pub fn sweep(config_path: &Path) -> Result<()> {
    let mut ws = open_workspace(config_path)?;
    let table = run_sweep(&ws.cfg.sweep)?;
    io::write_sweep(&ws.file("sweep.csv"), &table)?;
    for row in &table.rows {
        println!(
            "eps = {:<9} l1_fluid = {:.6e}  psi_l4 = {:.6e}  status: {}",
            row.eps, row.l1_fluid, row.psi_l4, row.status
        );
    }
    println!("wrote {} rungs to {}", table.rows.len(), ws.dir.display());
    let details = json!({
        "rungs": table.rows.len(),
        "comparison_times": table.comparison_times,
        "reference_euler_steps": table.reference_euler_steps,
        "reference_nls_steps": table.reference_nls_steps,
        "statuses": table.rows.iter().map(|r| r.status.clone()).collect::<Vec<_>>(),
        "rung_wall_seconds": table.rows.iter().map(|r| r.wall_seconds).collect::<Vec<_>>(),
        "workers": ws.cfg.sweep.workers,
        "mollify": ws.cfg.sweep.mollify,
    });
    ws.finish("sweep", details)
}

struct CheckReport {
    failures: Vec<String>,
}

impl CheckReport {
    fn new() -> Self {
        CheckReport { failures: Vec::new() }
    }

    fn record(&mut self, name: &str, ok: bool, detail: String) {
        println!("{} {name}: {detail}", if ok { "ok  " } else { "FAIL" });
        if !ok {
            self.failures.push(format!("{name}: {detail}"));
        }
    }
}

fn check_trajectory(records: &[MonitorRecord], ws: &Workspace, report: &mut CheckReport) {
    let tol = ws.cfg.check;
    let first = &records[0];

    let denom = first.mass.abs().max(f64::MIN_POSITIVE);
    let mass_drift = records
        .iter()
        .map(|r| (r.mass - first.mass).abs())
        .fold(0.0, f64::max)
        / denom;
    report.record(
        "volume conservation",
        mass_drift <= tol.mass_tol,
        format!("relative drift {mass_drift:.3e} (allowed {:.1e})", tol.mass_tol),
    );

    let psi_denom = if first.psi_l2 > 1e-12 { first.psi_l2 } else { 1.0 };
    let psi_drift = records
        .iter()
        .map(|r| (r.psi_l2 - first.psi_l2).abs())
        .fold(0.0, f64::max)
        / psi_denom;
    report.record(
        "envelope mass conservation",
        psi_drift <= tol.mass_tol,
        format!("relative drift {psi_drift:.3e} (allowed {:.1e})", tol.mass_tol),
    );

    let drift = energy_drift(records);
    report.record(
        "energy conservation",
        drift <= tol.energy_tol,
        format!("relative drift {drift:.3e} (allowed {:.1e})", tol.energy_tol),
    );

    let scale = first.total_energy.abs().max(f64::MIN_POSITIVE);
    let worst_jump = records
        .windows(2)
        .map(|w| w[1].entropy_integral - w[0].entropy_integral)
        .fold(f64::INFINITY, f64::min)
        .min(0.0);
    report.record(
        "entropy production",
        worst_jump >= -tol.entropy_tol * scale,
        format!(
            "most negative jump {worst_jump:.3e} (allowed {:.3e})",
            -tol.entropy_tol * scale
        ),
    );

    let min_v = records.iter().map(|r| r.min_v).fold(f64::INFINITY, f64::min);
    let min_theta = records.iter().map(|r| r.min_theta).fold(f64::INFINITY, f64::min);
    report.record(
        "positivity",
        min_v > 0.0 && min_theta > 0.0,
        format!("min volume {min_v:.3e}, min temperature {min_theta:.3e}"),
    );
}

fn check_constitutive(ws: &Workspace, report: &mut CheckReport) -> Result<()> {
    let tol = ws.cfg.check;
    let gp = ws.cfg.solver.params;
    let mut rng = ChaCha8Rng::seed_from_u64(ws.cfg.seed);
    let mut worst_maxwell = 0.0f64;
    let mut growth_violation: Option<String> = None;
    // relative slack for the sampled growth inequalities; the implemented
    // laws sit exactly on their lower constants
    let slack = 1e-9;
    for _ in 0..tol.samples {
        let rho = 10f64.powf(rng.gen_range(-1.0..1.0));
        let theta = 10f64.powf(rng.gen_range(-2.0..1.0));
        worst_maxwell = worst_maxwell.max(gp.maxwell_residual(rho, theta, 1e-5)?);
        let cap = gp.heat_capacity(theta);
        let cap_band = 1.0 + theta.powf(gp.r);
        if cap < gp.e1 * cap_band * (1.0 - slack) || cap > gp.e2 * cap_band * (1.0 + slack) {
            growth_violation.get_or_insert(format!(
                "heat capacity {cap:.6e} outside [{:.6e}, {:.6e}] at theta = {theta:.6e}",
                gp.e1 * cap_band,
                gp.e2 * cap_band
            ));
        }
        let cond = gp.heat_conductivity(theta);
        let cond_band = 1.0 + theta.powf(gp.q);
        if cond < gp.k1 * cond_band * (1.0 - slack) || cond > gp.k2 * cond_band * (1.0 + slack) {
            growth_violation.get_or_insert(format!(
                "conductivity {cond:.6e} outside [{:.6e}, {:.6e}] at theta = {theta:.6e}",
                gp.k1 * cond_band,
                gp.k2 * cond_band
            ));
        }
        if !(gp.p_theta(rho) > 0.0) {
            growth_violation
                .get_or_insert(format!("thermal pressure not positive at rho = {rho:.6e}"));
        }
    }
    report.record(
        "maxwell relation",
        worst_maxwell <= tol.maxwell_tol,
        format!(
            "worst relative residual {worst_maxwell:.3e} over {} samples (allowed {:.1e})",
            tol.samples, tol.maxwell_tol
        ),
    );
    report.record(
        "constitutive growth bounds",
        growth_violation.is_none(),
        growth_violation.unwrap_or_else(|| format!("hold on {} samples", tol.samples)),
    );
    Ok(())
}

/// `check-invariants <config>`: integrate the configured solve, then test
/// conservation, entropy production, positivity, and the sampled
/// constitutive inequalities. Failed checks exit with the numerical code.
pub fn check_invariants(config_path: &Path) -> Result<()> {
    let mut ws = open_workspace(config_path)?;
    let (solver, run) = integrate(&ws)?;
    let records = monitor_trajectory(&solver, &run.snapshots)?;
    io::write_monitors(&ws.file("monitors.csv"), &records)?;

    if let Some(e) = run.error {
        println!("FAIL integration: stopped after {} steps: {e}", run.steps_taken);
        ws.finish("check-invariants", json!({ "status": e.to_string() }))?;
        return Err(e);
    }

    let mut report = CheckReport::new();
    check_trajectory(&records, &ws, &mut report);
    check_constitutive(&ws, &mut report)?;

    let passed = report.failures.is_empty();
    println!(
        "{} ({} monitor records over {} steps)",
        if passed { "all invariant checks passed" } else { "invariant checks FAILED" },
        records.len(),
        run.steps_taken
    );
    let details = json!({
        "status": if passed { "ok".to_string() } else { report.failures.join("; ") },
        "steps_taken": run.steps_taken,
        "records": records.len(),
        "seed": ws.cfg.seed,
        "samples": ws.cfg.check.samples,
    });
    ws.finish("check-invariants", details)?;
    if passed {
        Ok(())
    } else {
        Err(Error::Accuracy(format!(
            "invariant checks failed: {}",
            report.failures.join("; ")
        )))
    }
}

/// `entropy-diag <config> --zeta <id>`: tabulate one weak entropy pair and
/// its gradients over a density-velocity grid. Ids: one, minus-one, linear,
/// minus-linear, square, bump (the bump takes its center and halfwidth from
/// the `[entropy]` table).
pub fn entropy_diag(config_path: &Path, zeta: &str) -> Result<()> {
    let mut ws = open_workspace(config_path)?;
    let es = ws.cfg.entropy;
    let gp = ws.cfg.solver.params;
    let test_fn = match zeta {
        "bump" => TestFunction::Bump { center: es.bump_center, halfwidth: es.bump_halfwidth },
        other => TestFunction::parse(other)?,
    };
    let pairs = if gp.gamma <= 3.0 {
        WeakPairs::new(gp.a, gp.gamma, es.quadrature_nodes)?
    } else {
        WeakPairs::with_singular_edges(gp.a, gp.gamma, es.quadrature_nodes)?
    };
    let mut text = String::from("rho,u,m,eta,q,eta_rho,eta_m,q_rho,q_m\n");
    let mut state_bound = 0.0f64;
    let mut rows = 0usize;
    for i in 1..=es.rho_points {
        let rho = es.rho_max * i as f64 / es.rho_points as f64;
        for j in 0..es.velocity_points {
            let u = -es.velocity_max
                + 2.0 * es.velocity_max * j as f64 / (es.velocity_points as f64 - 1.0);
            let m = rho * u;
            let (eta, q) = pairs.pair(rho, m, &test_fn)?;
            let grad = pairs.pair_gradients(rho, m, &test_fn)?;
            state_bound = state_bound.max((eta.abs() + q.abs()) / rho);
            let cells = [rho, u, m, eta, q, grad[0], grad[1], grad[2], grad[3]];
            let line: Vec<String> = cells.iter().map(|&x| io::format_float(x)).collect();
            text.push_str(&line.join(","));
            text.push('\n');
            rows += 1;
        }
    }
    let path = ws.file(&format!("entropy_{zeta}.csv"));
    fs::write(&path, text).map_err(|e| io_err(&path, e))?;
    println!(
        "tabulated {rows} states for zeta = {zeta}; sup (|eta| + |q|)/rho = {state_bound:.6e}"
    );
    let details = json!({
        "zeta": zeta,
        "rows": rows,
        "state_bound": state_bound,
        "gamma": gp.gamma,
    });
    ws.finish("entropy-diag", details)
}

/// `limit-run <config>`: integrate the decoupled limit system on the sweep's
/// reference grids and write its trajectory: the fluid triple (with the
/// transverse velocity riding the same stream) and the free envelope.
pub fn limit_run(config_path: &Path) -> Result<()> {
    let mut ws = open_workspace(config_path)?;
    let plan = ws.cfg.sweep.clone();
    let reference = build_reference(&plan)?;

    let mut fluid = String::from("t,x,rho,m,u,w0,w1\n");
    for (j, &t) in reference.times.iter().enumerate() {
        let state = &reference.euler[j];
        let u = state.velocity(plan.rho_floor);
        let t_cell = io::format_float(t);
        for (i, &x) in reference.x_centers.iter().enumerate() {
            let cells = [
                state.rho[i],
                state.m[i],
                u[i],
                reference.w[j][0][i],
                reference.w[j][1][i],
            ];
            fluid.push_str(&t_cell);
            fluid.push(',');
            fluid.push_str(&io::format_float(x));
            for c in cells {
                fluid.push(',');
                fluid.push_str(&io::format_float(c));
            }
            fluid.push('\n');
        }
    }
    let fluid_path = ws.file("limit_fluid.csv");
    fs::write(&fluid_path, fluid).map_err(|e| io_err(&fluid_path, e))?;

    let mut envelope = String::from("t,y,psi_re,psi_im\n");
    for (j, &t) in reference.times.iter().enumerate() {
        let state = &reference.nls[j];
        let span = (state.psi.len() - 1) as f64;
        let t_cell = io::format_float(t);
        for (k, c) in state.psi.iter().enumerate() {
            envelope.push_str(&t_cell);
            envelope.push(',');
            envelope.push_str(&io::format_float(k as f64 / span));
            envelope.push(',');
            envelope.push_str(&io::format_float(c.re));
            envelope.push(',');
            envelope.push_str(&io::format_float(c.im));
            envelope.push('\n');
        }
    }
    let psi_path = ws.file("limit_psi.csv");
    fs::write(&psi_path, envelope).map_err(|e| io_err(&psi_path, e))?;

    println!(
        "limit reference: {} conservation-law steps and {} envelope steps over {} comparison times; wrote tables to {}",
        reference.euler_steps,
        reference.nls_steps,
        reference.times.len(),
        ws.dir.display()
    );
    let details = json!({
        "euler_steps": reference.euler_steps,
        "nls_steps": reference.nls_steps,
        "comparison_times": reference.times,
        "cells": reference.x_centers.len(),
    });
    ws.finish("limit-run", details)
}
