//! Vanishing-viscosity sweep harness.
//!
//! A sweep integrates the coupled viscous system along a ladder of strictly
//! decreasing bulk viscosities ε with the small coefficients slaved to
//! powers of ε: the envelope coupling α = ε^a with a > 1/2, the magnetic
//! permeability β = ε^b and the thermal pressure scale δ = ε^d with
//! b, d > 1. Those inequalities are exactly the smallness conditions under
//! which the coupled system decouples, so the plan refuses borderline
//! exponents and every emitted rung re-checks the derived coefficients
//! numerically.
//!
//! Per rung the harness measures distances to the decoupled limit system,
//! solved once on a fine grid and shared across rungs: the L¹ distance of
//! (ρ, ρu) to the isentropic Euler reference, a weak-topology distance of
//! the transverse velocity to its advected-diffused limit, the decay of the
//! transverse field in the natural √β-weighted norm, the L∞(L⁴) distance of
//! the envelope to the cubic Schrödinger limit, the running uniform-estimate
//! monitors, the variational residual of the limit heat inequality, and the
//! limit energy bracket. Rungs run concurrently on a fixed-size worker pool
//! and are merged in ladder order; every quantity is a pure function of the
//! plan, so repeated invocations produce identical tables.

use crate::constitutive::{CouplingFns, GasParams};
use crate::error::{Error, Result};
use crate::galerkin::{GalerkinState, Solver, SolverConfig};
use crate::initial::InitialData;
use crate::invariants::monitor_trajectory;
use crate::lagrangian::{positions_from_specific_volume, MonotoneCubic};
use crate::limit::euler::{euler_step, stable_dt, EulerConfig, EulerState, FluxKind};
use crate::limit::nls::{NlsSolver, NlsState};
use crate::limit::thermal::{
    thermal_inequality_residual, ThermalInput, ThermalSlice, ThermalTestFn,
};
use crate::limit::transverse::transverse_step;
use crate::quadrature::{trapezoid, trapezoid_uniform};
use crate::spectral::{eval_sine_at_c, Basis};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::time::Instant;

/// Column registry of the sweep table, in emission order. Wall-clock times
/// are deliberately absent: they belong to the run manifest, never to the
/// table, so that repeated sweeps are byte-identical.
pub const SWEEP_COLUMNS: [&str; 18] = [
    "eps",
    "alpha",
    "beta",
    "delta",
    "l1_fluid",
    "w_weak",
    "sup_beta_h",
    "beta_sqrt_h_l2",
    "psi_l4",
    "unif1",
    "unif2",
    "unif3",
    "unif4",
    "unif5",
    "thermal_residual",
    "thermal_scale",
    "energy_ratio",
    "status",
];

/// Declarative description of a sweep.
#[derive(Debug, Clone)]
pub struct SweepPlan {
    /// Strictly decreasing ladder of bulk viscosities, each in (0, 1).
    pub eps_ladder: Vec<f64>,
    /// Coupling exponent a in α = ε^a; must exceed 1/2.
    pub alpha_exp: f64,
    /// Permeability exponent b in β = ε^b; must exceed 1.
    pub beta_exp: f64,
    /// Thermal-pressure exponent d in δ = ε^d; must exceed 1.
    pub delta_exp: f64,
    /// Fixed coefficients (shear viscosity, resistivity, heat law, pressure
    /// law); ε, α, β, δ are overwritten per rung.
    pub base: GasParams,
    pub coupling: CouplingFns,
    pub initial: InitialData,
    /// Spectral resolution of every rung.
    pub modes: usize,
    pub t_end: f64,
    /// Number of comparison intervals; distances are sampled at the
    /// boundaries j·t_end/segments.
    pub segments: usize,
    /// Upper bound on the viscous time step.
    pub dt_cap: f64,
    /// Fraction of the advisory stability limit actually used.
    pub dt_safety: f64,
    /// Resolution of the shared Euler reference.
    pub euler_cells: usize,
    /// Numerical flux of the Euler reference.
    pub euler_flux: FluxKind,
    /// CFL number of the Euler reference.
    pub euler_cfl: f64,
    /// Vacuum floor of the Euler reference.
    pub rho_floor: f64,
    /// Grid of the Schrödinger reference (walls included).
    pub nls_points: usize,
    /// Upper bound on the Schrödinger reference step.
    pub nls_dt_cap: f64,
    /// Mass-grid resolution used to pull spectral fields back to physical
    /// space.
    pub pullback_points: usize,
    /// Number of sine test functions pairing the weak transverse distance.
    pub weak_test_modes: usize,
    /// Size of the worker pool integrating rungs concurrently.
    pub workers: usize,
    /// Replace the initial volume by its ε-dependent low-pass projection
    /// (keeping ceil(ε^{-1/2}) cosine modes). The analytic profiles already
    /// satisfy the initial-roughness bounds at every ε, so this is off by
    /// default and exists to probe sensitivity to rough data preparation.
    pub mollify: bool,
}

impl Default for SweepPlan {
    fn default() -> Self {
        let mut base = GasParams::default();
        base.mu = 0.4;
        base.nu = 0.005;
        base.k1 = 0.2;
        SweepPlan {
            eps_ladder: vec![0.1, 0.05, 0.025, 0.0125],
            alpha_exp: 0.75,
            beta_exp: 1.5,
            delta_exp: 1.5,
            base,
            coupling: CouplingFns::default(),
            // the fine-scale packet is omitted: its sub-millisecond viscous
            // decay sits far below the comparison cadence and would alias
            // into the time quadrature of the heat inequality
            initial: InitialData::SmoothPeriodic {
                fluid: 0.2,
                velocity: 0.08,
                thermal: 0.06,
                transverse_velocity: 0.015,
                transverse_field: 0.015,
                envelope: 0.15,
                fine_scale: 0.0,
            },
            modes: 24,
            t_end: 0.25,
            segments: 16,
            dt_cap: 4e-4,
            dt_safety: 0.6,
            euler_cells: 4096,
            euler_flux: FluxKind::LocalLaxFriedrichs,
            euler_cfl: 0.45,
            rho_floor: 1e-12,
            nls_points: 257,
            nls_dt_cap: 2e-4,
            pullback_points: 513,
            weak_test_modes: 4,
            workers: 4,
            mollify: false,
        }
    }
}

/// Coefficients of one rung, derived from ε and the plan's exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RungSettings {
    pub eps: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
}

impl SweepPlan {
    /// The derived coefficient table, one entry per ladder rung.
    pub fn rungs(&self) -> Vec<RungSettings> {
        self.eps_ladder
            .iter()
            .map(|&eps| RungSettings {
                eps,
                alpha: eps.powf(self.alpha_exp),
                beta: eps.powf(self.beta_exp),
                delta: eps.powf(self.delta_exp),
            })
            .collect()
    }

    /// Comparison times 0, t_end/segments, …, t_end.
    pub fn comparison_times(&self) -> Vec<f64> {
        let seg = self.t_end / self.segments as f64;
        let mut times: Vec<f64> = (0..self.segments).map(|j| j as f64 * seg).collect();
        times.push(self.t_end);
        times
    }

    /// Check every structural constraint, collecting all violations. The
    /// scaling constraints guard the decoupling regime: α must be o(ε^{1/2})
    /// and β, δ must be o(ε), which for a power law means a > 1/2 and
    /// b, d > 1. Each derived rung is also checked numerically.
    pub fn validate(&self) -> Result<()> {
        fn need(errs: &mut Vec<String>, ok: bool, msg: impl FnOnce() -> String) {
            if !ok {
                errs.push(msg());
            }
        }
        let mut errs = Vec::new();
        need(&mut errs, self.alpha_exp > 0.5, || {
            format!(
                "coupling exponent must exceed 1/2 so that α = ε^a is o(ε^{{1/2}}), \
                 got a = {}",
                self.alpha_exp
            )
        });
        need(&mut errs, self.beta_exp > 1.0, || {
            format!(
                "permeability exponent must exceed 1 so that β = ε^b is o(ε), got b = {}",
                self.beta_exp
            )
        });
        need(&mut errs, self.delta_exp > 1.0, || {
            format!(
                "thermal-pressure exponent must exceed 1 so that δ = ε^d is o(ε), got d = {}",
                self.delta_exp
            )
        });
        for (i, &eps) in self.eps_ladder.iter().enumerate() {
            need(&mut errs, eps > 0.0 && eps < 1.0 && eps.is_finite(), || {
                format!("ladder entry {i} must lie in (0, 1), got {eps}")
            });
            if i > 0 {
                need(&mut errs, eps < self.eps_ladder[i - 1], || {
                    format!(
                        "ladder must decrease strictly, entries {} and {i} are {} and {eps}",
                        i - 1,
                        self.eps_ladder[i - 1]
                    )
                });
            }
        }
        if errs.is_empty() {
            for r in self.rungs() {
                need(&mut errs, r.alpha < r.eps.sqrt(), || {
                    format!(
                        "rung ε = {}: coupling α = {} is not below √ε = {}",
                        r.eps,
                        r.alpha,
                        r.eps.sqrt()
                    )
                });
                need(&mut errs, r.beta < r.eps, || {
                    format!("rung ε = {}: permeability β = {} is not below ε", r.eps, r.beta)
                });
                need(&mut errs, r.delta < r.eps, || {
                    format!(
                        "rung ε = {}: thermal-pressure scale δ = {} is not below ε",
                        r.eps, r.delta
                    )
                });
            }
        }
        need(&mut errs, self.modes >= 1, || "mode count must be at least 1".into());
        need(&mut errs, self.segments >= 1, || {
            "sweep needs at least one comparison interval".into()
        });
        need(&mut errs, self.t_end > 0.0 && self.t_end.is_finite(), || {
            format!("final time must be positive, got {}", self.t_end)
        });
        need(&mut errs, self.dt_cap > 0.0 && self.dt_cap.is_finite(), || {
            format!("time-step cap must be positive, got {}", self.dt_cap)
        });
        need(&mut errs, self.dt_safety > 0.0 && self.dt_safety <= 1.0, || {
            format!("stability safety factor must lie in (0, 1], got {}", self.dt_safety)
        });
        need(&mut errs, self.euler_cells >= 16, || {
            format!("Euler reference needs at least 16 cells, got {}", self.euler_cells)
        });
        need(&mut errs, self.euler_cfl > 0.0 && self.euler_cfl <= 0.45, || {
            format!("Euler CFL number must lie in (0, 0.45], got {}", self.euler_cfl)
        });
        need(&mut errs, self.rho_floor >= 0.0 && self.rho_floor.is_finite(), || {
            format!("Euler vacuum floor must be finite and >= 0, got {}", self.rho_floor)
        });
        need(&mut errs, self.nls_points >= 9, || {
            format!("Schrödinger reference needs at least 9 points, got {}", self.nls_points)
        });
        need(&mut errs, self.nls_dt_cap > 0.0 && self.nls_dt_cap.is_finite(), || {
            format!("Schrödinger step cap must be positive, got {}", self.nls_dt_cap)
        });
        need(&mut errs, self.pullback_points >= 33, || {
            format!("pullback grid needs at least 33 points, got {}", self.pullback_points)
        });
        need(&mut errs, self.weak_test_modes >= 1, || {
            "weak transverse distance needs at least one test mode".into()
        });
        need(&mut errs, self.workers >= 1, || {
            "worker pool must have at least one thread".into()
        });
        if let Err(Error::Validation(p)) = self.base.validate() {
            errs.extend(p);
        }
        if let Err(Error::Validation(p)) = self.initial.validate() {
            errs.extend(p);
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }
}

/// Build a plan from a ladder and scaling exponents, with every other knob
/// at its default. An empty ladder is a valid (empty) plan; invalid
/// exponents are rejected with the violated scaling named.
pub fn make_plan(
    eps_ladder: &[f64],
    alpha_exp: f64,
    beta_exp: f64,
    delta_exp: f64,
) -> Result<SweepPlan> {
    let plan = SweepPlan {
        eps_ladder: eps_ladder.to_vec(),
        alpha_exp,
        beta_exp,
        delta_exp,
        ..SweepPlan::default()
    };
    plan.validate()?;
    Ok(plan)
}

/// Distances and monitors of one rung. All distance columns are finite and
/// nonnegative whenever the status is "ok"; on a failed rung they cover the
/// trajectory prefix that was completed before the failure, and the status
/// records the error.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub eps: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    /// max over comparison times of ‖(ρ, ρu) − reference‖_{L¹(0,1)}.
    pub l1_fluid: f64,
    /// L²-in-time distance of the transverse velocity to its limit, in the
    /// weak topology induced by the first few sine modes.
    pub w_weak: f64,
    /// sup over the trajectory of β|h|.
    pub sup_beta_h: f64,
    /// max over comparison times of √β ‖h‖_{L²(dx)}.
    pub beta_sqrt_h_l2: f64,
    /// max over comparison times of ‖ψ − ψ_limit‖_{L⁴(0,1)}.
    pub psi_l4: f64,
    /// Uniform-estimate monitors: peak energy bracket, peak gradient
    /// bracket plus its running companion, and the three running space-time
    /// integrals at the final time.
    pub unif: [f64; 5],
    /// Variational residual of the limit heat inequality on the pulled-back
    /// fields (nonpositive up to quadrature for a dissipative trajectory).
    pub thermal_residual: f64,
    /// Magnitude scale of the residual's integrand.
    pub thermal_scale: f64,
    /// max over comparison times of the limit energy bracket relative to
    /// its initial value.
    pub energy_ratio: f64,
    /// Wall-clock seconds spent on the rung; recorded in the manifest, not
    /// the table.
    pub wall_seconds: f64,
    /// "ok", or the error that stopped the rung.
    pub status: String,
}

impl SweepRow {
    fn new(rung: RungSettings) -> Self {
        SweepRow {
            eps: rung.eps,
            alpha: rung.alpha,
            beta: rung.beta,
            delta: rung.delta,
            l1_fluid: 0.0,
            w_weak: 0.0,
            sup_beta_h: 0.0,
            beta_sqrt_h_l2: 0.0,
            psi_l4: 0.0,
            unif: [0.0; 5],
            thermal_residual: 0.0,
            thermal_scale: 0.0,
            energy_ratio: 0.0,
            wall_seconds: 0.0,
            status: "ok".into(),
        }
    }

    /// Numeric value of a named column; None for "status" or unknown names.
    pub fn value(&self, column: &str) -> Option<f64> {
        Some(match column {
            "eps" => self.eps,
            "alpha" => self.alpha,
            "beta" => self.beta,
            "delta" => self.delta,
            "l1_fluid" => self.l1_fluid,
            "w_weak" => self.w_weak,
            "sup_beta_h" => self.sup_beta_h,
            "beta_sqrt_h_l2" => self.beta_sqrt_h_l2,
            "psi_l4" => self.psi_l4,
            "unif1" => self.unif[0],
            "unif2" => self.unif[1],
            "unif3" => self.unif[2],
            "unif4" => self.unif[3],
            "unif5" => self.unif[4],
            "thermal_residual" => self.thermal_residual,
            "thermal_scale" => self.thermal_scale,
            "energy_ratio" => self.energy_ratio,
            _ => return None,
        })
    }

    /// The numeric columns in SWEEP_COLUMNS order (all but "status").
    pub fn numeric_row(&self) -> Vec<f64> {
        SWEEP_COLUMNS
            .iter()
            .filter_map(|c| self.value(c))
            .collect()
    }
}

/// The shared limit-system reference: Euler states, transverse velocity,
/// and Schrödinger states at every comparison time.
#[derive(Debug, Clone)]
pub struct LimitReference {
    pub times: Vec<f64>,
    pub x_centers: Vec<f64>,
    pub dx: f64,
    pub euler: Vec<EulerState>,
    pub w: Vec<[Vec<f64>; 2]>,
    pub nls: Vec<NlsState>,
    pub euler_steps: usize,
    pub nls_steps: usize,
}

/// Solve the decoupled limit system once on the plan's fine grids. The
/// fluid pair uses the shock-capturing scheme at its own advective step,
/// the transverse velocity rides along on the same stream, and the
/// Schrödinger reference is integrated by the unitary splitting. Initial
/// data come from the same closed-form profiles (and the same spectral
/// envelope coefficients) as the viscous rungs.
pub fn build_reference(plan: &SweepPlan) -> Result<LimitReference> {
    let times = plan.comparison_times();
    let ecfg = EulerConfig {
        cells: plan.euler_cells,
        a: plan.base.a,
        gamma: plan.base.gamma,
        flux: plan.euler_flux,
        cfl: plan.euler_cfl,
        rho_floor: plan.rho_floor,
    };
    ecfg.validate()?;
    let dx = ecfg.dx();
    let x_centers: Vec<f64> = (0..plan.euler_cells)
        .map(|i| (i as f64 + 0.5) * dx)
        .collect();
    let mut rho = Vec::with_capacity(plan.euler_cells);
    let mut m = Vec::with_capacity(plan.euler_cells);
    let mut w: [Vec<f64>; 2] = [
        Vec::with_capacity(plan.euler_cells),
        Vec::with_capacity(plan.euler_cells),
    ];
    for &x in &x_centers {
        let p = plan.initial.limit_profile(x)?;
        rho.push(p.rho);
        m.push(p.rho * p.u);
        w[0].push(p.w[0]);
        w[1].push(p.w[1]);
    }
    let mut est = EulerState::new(rho, m, 0.0)?;

    let basis = Basis::new(plan.modes, 2 * plan.modes + 1)?;
    let psi0 = plan.initial.build(&basis)?.psi;
    let mut nst = NlsState::from_profile(plan.nls_points, |y| eval_sine_at_c(&psi0, y))?;
    let nsolver = NlsSolver::default();

    let mut euler = vec![est.clone()];
    let mut w_states = vec![w.clone()];
    let mut nls = vec![nst.clone()];
    let (mut euler_steps, mut nls_steps) = (0usize, 0usize);
    for &target in &times[1..] {
        while est.t < target - 1e-12 * plan.t_end {
            let dt = stable_dt(&est, &ecfg).min(target - est.t);
            let next = euler_step(&est, dt, &ecfg)?;
            for wc in &mut w {
                *wc = transverse_step(wc, &est.rho, &est.m, dt, plan.base.mu)?;
            }
            est = next;
            euler_steps += 1;
        }
        let span = target - nst.t;
        if span > 0.0 {
            let sub = (span / plan.nls_dt_cap).ceil().max(1.0) as usize;
            let dtn = span / sub as f64;
            for _ in 0..sub {
                nst = nsolver.step(&nst, dtn)?;
                nls_steps += 1;
            }
        }
        euler.push(est.clone());
        w_states.push(w.clone());
        nls.push(nst.clone());
    }
    Ok(LimitReference {
        times,
        x_centers,
        dx,
        euler,
        w: w_states,
        nls,
        euler_steps,
        nls_steps,
    })
}

/// A finished sweep: one row per rung, in ladder order, plus the reference
/// solve's bookkeeping.
#[derive(Debug, Clone)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub comparison_times: Vec<f64>,
    pub reference_euler_steps: usize,
    pub reference_nls_steps: usize,
}

/// Run the whole ladder. The limit reference is solved once; rungs are then
/// integrated concurrently on a pool of `plan.workers` threads and merged in
/// ladder order. A rung that fails mid-run (positivity loss, divergence)
/// keeps its row: distances cover the completed prefix and the status
/// records the error, while the remaining rungs continue unaffected.
pub fn run_sweep(plan: &SweepPlan) -> Result<SweepTable> {
    plan.validate()?;
    if plan.eps_ladder.is_empty() {
        return Ok(SweepTable {
            rows: Vec::new(),
            comparison_times: plan.comparison_times(),
            reference_euler_steps: 0,
            reference_nls_steps: 0,
        });
    }
    let reference = build_reference(plan)?;
    let rungs = plan.rungs();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers)
        .build()
        .map_err(|e| Error::Validation(vec![format!("worker pool: {e}")]))?;
    let rows = pool.install(|| {
        rungs
            .par_iter()
            .map(|&rung| rung_row(plan, &reference, rung))
            .collect::<Vec<_>>()
    });
    Ok(SweepTable {
        rows,
        comparison_times: reference.times.clone(),
        reference_euler_steps: reference.euler_steps,
        reference_nls_steps: reference.nls_steps,
    })
}

/// Low-pass the initial volume, keeping ceil(ε^{-1/2}) cosine modes. The
/// mean mode is untouched, so the physical length is preserved exactly.
fn mollified_volume(basis: &Basis, v_nodes: &[f64], eps: f64, floor: f64) -> Result<Vec<f64>> {
    let keep = (eps.powf(-0.5).ceil() as usize).clamp(2, basis.modes);
    let co = basis.cosine_analyze(v_nodes, keep)?;
    let smoothed = basis.synth_cosine(&co);
    if let Some(&bad) = smoothed.iter().find(|&&v| v <= floor) {
        return Err(Error::Validation(vec![format!(
            "mollified initial volume dips to {bad:.3e}, below the floor {floor:.1e}; \
             keep more modes or disable mollification"
        )]));
    }
    Ok(smoothed)
}

/// Integrate one rung and measure its distances. Never panics on numerical
/// failure: errors land in the row's status.
fn rung_row(plan: &SweepPlan, reference: &LimitReference, rung: RungSettings) -> SweepRow {
    let started = Instant::now();
    let mut row = SweepRow::new(rung);
    let outcome = (|| -> Result<()> {
        let mut params = plan.base;
        params.epsilon = rung.eps;
        params.alpha = rung.alpha;
        params.beta = rung.beta;
        params.delta = rung.delta;
        let mut cfg = SolverConfig {
            params,
            coupling: plan.coupling.clone(),
            initial: plan.initial.clone(),
            modes: plan.modes,
            dt: plan.dt_cap,
            t_end: plan.t_end,
            collocation_points: None,
            dealias: true,
            monitor_every: 1,
            v_floor: 1e-8,
            theta_floor: 1e-8,
            conservative_transverse_field: true,
        };
        let probe = Solver::new(cfg.clone())?;
        let mut state0 = probe.initial_state()?;
        if plan.mollify {
            state0.v_nodes =
                mollified_volume(&probe.basis, &state0.v_nodes, rung.eps, cfg.v_floor)?;
        }
        let advisory = probe.stability_advisory(&state0);
        let seg = plan.t_end / plan.segments as f64;
        let dt_allowed = plan.dt_cap.min(plan.dt_safety * advisory.dt_max);
        let steps_per_segment = ((seg / dt_allowed).ceil() as usize).max(1);
        cfg.dt = seg / steps_per_segment as f64;
        cfg.monitor_every = steps_per_segment;
        let solver = Solver::new(cfg)?;
        let run = solver.run(state0);
        if let Some(e) = &run.error {
            row.status = format!("integration stopped after {} steps: {e}", run.steps_taken);
        }
        let d = measure_distances(plan, reference, &solver, &run.snapshots, rung)?;
        row.l1_fluid = d.l1_fluid;
        row.w_weak = d.w_weak;
        row.sup_beta_h = d.sup_beta_h;
        row.beta_sqrt_h_l2 = d.beta_sqrt_h_l2;
        row.psi_l4 = d.psi_l4;
        row.unif = d.unif;
        row.thermal_residual = d.thermal_residual;
        row.thermal_scale = d.thermal_scale;
        row.energy_ratio = d.energy_ratio;
        Ok(())
    })();
    if let Err(e) = outcome {
        row.status = if row.status == "ok" {
            e.to_string()
        } else {
            format!("{}; distance pipeline: {e}", row.status)
        };
    }
    row.wall_seconds = started.elapsed().as_secs_f64();
    row
}

struct Distances {
    l1_fluid: f64,
    w_weak: f64,
    sup_beta_h: f64,
    beta_sqrt_h_l2: f64,
    psi_l4: f64,
    unif: [f64; 5],
    thermal_residual: f64,
    thermal_scale: f64,
    energy_ratio: f64,
}

/// Resolution of the fixed physical grid carrying the heat-inequality
/// slices.
const THERMAL_POINTS: usize = 257;

/// Pull the trajectory back to physical space and measure every distance
/// against the matching prefix of the reference.
fn measure_distances(
    plan: &SweepPlan,
    reference: &LimitReference,
    solver: &Solver,
    snapshots: &[GalerkinState],
    rung: RungSettings,
) -> Result<Distances> {
    let len = snapshots.len().min(reference.times.len());
    let times = &reference.times[..len];
    let params = &solver.cfg.params;
    let p = plan.pullback_points;
    let y_grid: Vec<f64> = (0..p).map(|j| j as f64 / (p - 1) as f64).collect();
    let dy = 1.0 / (p - 1) as f64;
    let nls_grid = reference.nls[0].grid();
    let nls_dy = reference.nls[0].dy();

    let records = monitor_trajectory(solver, &snapshots[..len])?;
    let max_of = |f: fn(&crate::invariants::MonitorRecord) -> f64| {
        records.iter().map(f).fold(f64::NEG_INFINITY, f64::max)
    };
    let last = records.last().expect("at least the initial state");
    let unif = [
        max_of(|r| r.unif1),
        max_of(|r| r.unif2) + last.unif2_time,
        last.unif3,
        last.unif4,
        last.unif5,
    ];

    let thermal_x: Vec<f64> = (0..THERMAL_POINTS)
        .map(|i| i as f64 / (THERMAL_POINTS - 1) as f64)
        .collect();
    let mut slices = Vec::with_capacity(len);

    let mut l1_fluid = 0.0f64;
    let mut weak_sq = vec![0.0; len];
    let mut sup_beta_h = 0.0f64;
    let mut h_l2_max = 0.0f64;
    let mut psi_l4 = 0.0f64;
    let mut energy_first = 0.0;
    let mut energy_ratio: f64 = 1.0;

    for (j, state) in snapshots[..len].iter().enumerate() {
        let snap = solver.reconstruct(state, &y_grid)?;
        let x_of_y = positions_from_specific_volume(&y_grid, &snap.v)?;
        let xs: Vec<f64> = y_grid.iter().map(|&y| x_of_y.eval(y)).collect();

        // L¹ distance of (ρ, ρu) on the reference cells
        let momentum: Vec<f64> = snap.rho.iter().zip(&snap.u).map(|(r, u)| r * u).collect();
        let rho_interp = MonotoneCubic::new(xs.clone(), snap.rho.clone())?;
        let mom_interp = MonotoneCubic::new(xs.clone(), momentum)?;
        let eref = &reference.euler[j];
        let mut acc = 0.0;
        for (i, &xc) in reference.x_centers.iter().enumerate() {
            acc += (rho_interp.eval(xc) - eref.rho[i]).abs()
                + (mom_interp.eval(xc) - eref.m[i]).abs();
        }
        l1_fluid = l1_fluid.max(acc * reference.dx);

        // weak transverse distance: pair both sides against sin(kπx); the
        // spectral side integrates in the mass frame with the volume weight,
        // so no interpolation error enters the functional
        let wref = &reference.w[j];
        for c in 0..2 {
            for k in 1..=plan.weak_test_modes {
                let kpi = k as f64 * PI;
                let spectral: Vec<f64> = (0..p)
                    .map(|i| snap.w[c][i] * (kpi * xs[i]).sin() * snap.v[i])
                    .collect();
                let a = trapezoid_uniform(dy, &spectral);
                let b = reference.dx
                    * wref[c]
                        .iter()
                        .zip(&reference.x_centers)
                        .map(|(&wv, &xc)| wv * (kpi * xc).sin())
                        .sum::<f64>();
                weak_sq[j] += (a - b) * (a - b);
            }
        }

        // transverse-field decay in the sup and √β-weighted L² norms
        let h_sq: Vec<f64> = (0..p)
            .map(|i| snap.h[0][i] * snap.h[0][i] + snap.h[1][i] * snap.h[1][i])
            .collect();
        for &hs in &h_sq {
            sup_beta_h = sup_beta_h.max(rung.beta * hs.sqrt());
        }
        let weighted: Vec<f64> = h_sq.iter().zip(&snap.v).map(|(&hs, &v)| hs * v).collect();
        h_l2_max = h_l2_max.max(trapezoid_uniform(dy, &weighted).max(0.0).sqrt());

        // envelope distance to the Schrödinger reference in L⁴
        let nref = &reference.nls[j];
        let quartic: Vec<f64> = nls_grid
            .iter()
            .zip(&nref.psi)
            .map(|(&y, &z)| {
                let d = eval_sine_at_c(&state.psi, y) - z;
                let n2 = d.norm_sqr();
                n2 * n2
            })
            .collect();
        psi_l4 = psi_l4.max(trapezoid_uniform(nls_dy, &quartic).max(0.0).powf(0.25));

        // limit energy bracket in the mass frame: ∫ ρ(P_e + Q + ½u² + ½|w|²) dx
        // = ∫ (P_e(ρ) + Q(θ) + ½u² + ½|w|²) dy
        let bracket: Vec<f64> = (0..p)
            .map(|i| {
                params.elastic_energy(snap.rho[i])
                    + params.heat_integral(snap.theta[i].max(0.0))
                    + 0.5 * snap.u[i] * snap.u[i]
                    + 0.5 * (snap.w[0][i] * snap.w[0][i] + snap.w[1][i] * snap.w[1][i])
            })
            .collect();
        let energy = trapezoid_uniform(dy, &bracket);
        if j == 0 {
            energy_first = energy.max(f64::MIN_POSITIVE);
        } else {
            energy_ratio = energy_ratio.max(energy / energy_first);
        }

        // heat-inequality slice on the fixed physical grid
        let u_interp = MonotoneCubic::new(xs.clone(), snap.u.clone())?;
        let w0_interp = MonotoneCubic::new(xs.clone(), snap.w[0].clone())?;
        let w1_interp = MonotoneCubic::new(xs.clone(), snap.w[1].clone())?;
        let theta_interp = MonotoneCubic::new(xs.clone(), snap.theta.clone())?;
        slices.push(ThermalSlice {
            rho: thermal_x.iter().map(|&x| rho_interp.eval(x).max(0.0)).collect(),
            u: thermal_x.iter().map(|&x| u_interp.eval(x)).collect(),
            w: [
                thermal_x.iter().map(|&x| w0_interp.eval(x)).collect(),
                thermal_x.iter().map(|&x| w1_interp.eval(x)).collect(),
            ],
            theta: thermal_x
                .iter()
                .map(|&x| theta_interp.eval(x).max(0.0))
                .collect(),
        });
    }

    let w_weak = trapezoid(times, &weak_sq).max(0.0).sqrt();

    // variational heat inequality with φ = (1 − t/T)², constant in space,
    // so both gradient conditions at the walls hold identically
    let (thermal_residual, thermal_scale) = if len >= 2 {
        let t_last = times[len - 1];
        let phi = move |_x: f64, t: f64| {
            let s = 1.0 - t / t_last;
            s * s
        };
        let phi_t = move |_x: f64, t: f64| -2.0 * (1.0 - t / t_last) / t_last;
        let zero = |_x: f64, _t: f64| 0.0;
        let test = ThermalTestFn {
            phi: &phi,
            phi_t: &phi_t,
            phi_x: &zero,
            phi_xx: &zero,
        };
        let input = ThermalInput {
            times: times.to_vec(),
            x: thermal_x,
            slices,
        };
        let r = thermal_inequality_residual(&input, params, params.mu, &test)?;
        (r.residual, r.scale)
    } else {
        (0.0, 0.0)
    };

    Ok(Distances {
        l1_fluid,
        w_weak,
        sup_beta_h,
        beta_sqrt_h_l2: rung.beta.sqrt() * h_l2_max,
        psi_l4,
        unif,
        thermal_residual,
        thermal_scale,
        energy_ratio,
    })
}

/// A least-squares power-law fit in log-log coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    /// Fitted exponent of value ∝ ε^slope.
    pub slope: f64,
    /// Fitted log-intercept.
    pub intercept: f64,
    /// Root-mean-square log residual of the fit.
    pub residual: f64,
}

/// Fit value ∝ ε^slope through (ε, value) pairs. Needs at least three
/// rungs with distinct ε; nonpositive or non-finite values are rejected
/// because the fit lives in log coordinates.
pub fn fit_rate_points(eps: &[f64], values: &[f64]) -> Result<RateFit> {
    if eps.len() != values.len() {
        return Err(Error::Shape {
            what: "rate-fit samples",
            expected: eps.len(),
            got: values.len(),
        });
    }
    if eps.len() < 3 {
        return Err(Error::Validation(vec![format!(
            "rate fit needs at least three rungs, got {}",
            eps.len()
        )]));
    }
    let mut problems = Vec::new();
    for (&e, &v) in eps.iter().zip(values) {
        if !(e > 0.0) || !e.is_finite() {
            problems.push(format!("rate fit needs positive ε, got {e}"));
        }
        if !(v > 0.0) || !v.is_finite() {
            problems.push(format!("log-log rate fit needs positive values, got {v} at ε = {e}"));
        }
    }
    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }
    let n = eps.len() as f64;
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    if sxx == 0.0 {
        return Err(Error::Validation(vec![
            "rate fit needs rungs at distinct ε".into(),
        ]));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(RateFit {
        slope,
        intercept,
        residual,
    })
}

/// Fit a named table column against ε over the successful rungs.
pub fn fit_rate(rows: &[SweepRow], column: &str) -> Result<RateFit> {
    if !SWEEP_COLUMNS.contains(&column) || column == "status" {
        return Err(Error::Domain(format!(
            "unknown sweep column '{column}' (numeric columns: {})",
            SWEEP_COLUMNS[..SWEEP_COLUMNS.len() - 1].join(", ")
        )));
    }
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.status == "ok").collect();
    let eps: Vec<f64> = ok.iter().map(|r| r.eps).collect();
    let values: Vec<f64> = ok
        .iter()
        .map(|r| r.value(column).expect("validated column"))
        .collect();
    if eps.len() < 3 {
        return Err(Error::Validation(vec![format!(
            "rate fit needs at least three successful rungs, got {}",
            eps.len()
        )]));
    }
    fit_rate_points(&eps, &values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn borderline_exponents_are_rejected_by_name() {
        let err = make_plan(&[0.1, 0.05, 0.025], 0.5, 1.5, 1.5).unwrap_err();
        assert!(err.to_string().contains("coupling exponent"), "{err}");
        let err = make_plan(&[0.1, 0.05, 0.025], 0.75, 1.0, 1.5).unwrap_err();
        assert!(err.to_string().contains("permeability exponent"), "{err}");
        let err = make_plan(&[0.1, 0.05, 0.025], 0.75, 1.5, 1.0).unwrap_err();
        assert!(err.to_string().contains("thermal-pressure exponent"), "{err}");
    }

    #[test]
    fn ladders_must_decrease_inside_the_unit_interval() {
        assert!(make_plan(&[0.05, 0.1], 0.75, 1.5, 1.5).is_err());
        assert!(make_plan(&[0.1, 0.1], 0.75, 1.5, 1.5).is_err());
        assert!(make_plan(&[1.5, 0.1], 0.75, 1.5, 1.5).is_err());
        assert!(make_plan(&[0.1, -0.05], 0.75, 1.5, 1.5).is_err());
    }

    #[test]
    fn empty_ladder_is_an_empty_sweep() {
        let plan = make_plan(&[], 0.75, 1.5, 1.5).unwrap();
        let table = run_sweep(&plan).unwrap();
        assert!(table.rows.is_empty());
    }

    #[test]
    fn derived_coefficients_satisfy_the_smallness_guards() {
        let plan = SweepPlan::default();
        plan.validate().unwrap();
        for r in plan.rungs() {
            assert!(r.alpha < r.eps.sqrt());
            assert!(r.beta < r.eps);
            assert!(r.delta < r.eps);
            assert!(r.alpha > 0.0 && r.beta > 0.0 && r.delta > 0.0);
        }
    }

    #[test]
    fn rate_fit_recovers_exact_power_laws() {
        let eps = [0.1, 0.05, 0.025, 0.0125];
        let linear: Vec<f64> = eps.iter().map(|e| 3.0 * e).collect();
        let fit = fit_rate_points(&eps, &linear).unwrap();
        assert_abs_diff_eq!(fit.slope, 1.0, epsilon = 1e-12);
        assert!(fit.residual < 1e-12, "residual {}", fit.residual);
        let constant = vec![7.0; 4];
        let fit = fit_rate_points(&eps, &constant).unwrap();
        assert_abs_diff_eq!(fit.slope, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.intercept, 7.0f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn rate_fit_rejects_bad_inputs() {
        assert!(fit_rate_points(&[0.1, 0.05], &[1.0, 0.5]).is_err());
        let err = fit_rate_points(&[0.1, 0.05, 0.025], &[1.0, 0.0, 0.1]).unwrap_err();
        assert!(err.to_string().contains("positive values"), "{err}");
        assert!(fit_rate_points(&[0.1; 3], &[1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn rate_fit_selects_table_columns_by_name() {
        let plan = make_plan(&[0.1, 0.05, 0.025], 0.75, 1.5, 1.5).unwrap();
        let rows: Vec<SweepRow> = plan
            .rungs()
            .into_iter()
            .map(|r| {
                let mut row = SweepRow::new(r);
                row.l1_fluid = 2.0 * r.eps.powf(1.5);
                row
            })
            .collect();
        let fit = fit_rate(&rows, "l1_fluid").unwrap();
        assert_abs_diff_eq!(fit.slope, 1.5, epsilon = 1e-12);
        assert!(fit_rate(&rows, "wall_seconds").is_err());
        assert!(fit_rate(&rows, "status").is_err());
    }

    /// A miniature one-rung sweep: checks that the pipeline runs end to
    /// end, that every distance is finite and nonnegative, and that two
    /// invocations agree bit for bit.
    #[test]
    fn single_rung_sweep_is_finite_and_deterministic() {
        let mut plan = make_plan(&[0.1], 0.75, 1.5, 1.5).unwrap();
        plan.modes = 8;
        plan.segments = 2;
        plan.t_end = 0.02;
        plan.euler_cells = 128;
        plan.nls_points = 33;
        plan.pullback_points = 65;
        plan.workers = 2;
        let table = run_sweep(&plan).unwrap();
        assert_eq!(table.rows.len(), 1);
        let row = &table.rows[0];
        assert_eq!(row.status, "ok", "{}", row.status);
        for v in row.numeric_row() {
            assert!(v.is_finite(), "non-finite column: {v}");
        }
        assert!(row.l1_fluid >= 0.0 && row.w_weak >= 0.0 && row.psi_l4 >= 0.0);
        assert!(row.sup_beta_h >= 0.0 && row.beta_sqrt_h_l2 >= 0.0);
        assert!(row.energy_ratio > 0.9 && row.energy_ratio < 1.1);
        let again = run_sweep(&plan).unwrap();
        let a: Vec<u64> = row.numeric_row().iter().map(|v| v.to_bits()).collect();
        let b: Vec<u64> = again.rows[0].numeric_row().iter().map(|v| v.to_bits()).collect();
        assert_eq!(a, b, "sweep must be deterministic");
    }

    #[test]
    fn mollification_preserves_the_mean_volume() {
        let basis = Basis::new(16, 33).unwrap();
        let state = InitialData::default().build(&basis).unwrap();
        let smoothed = mollified_volume(&basis, &state.v_nodes, 0.05, 1e-8).unwrap();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert_abs_diff_eq!(mean(&smoothed), mean(&state.v_nodes), epsilon = 1e-12);
        // the projection keeps only the low cosine modes
        let kept = basis.cosine_analyze(&smoothed, 16).unwrap();
        for (k, &c) in kept.iter().enumerate() {
            if k > 5 {
                assert!(c.abs() < 1e-12, "mode {k} survived: {c}");
            }
        }
    }
}
