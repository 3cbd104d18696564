//! Declarative run configuration for the command-line tools.
//!
//! One TOML document configures every subcommand. Unset keys fall back to
//! documented defaults, unknown keys are rejected outright, and parsing
//! revalidates every physical constraint, reporting the complete list of
//! violations so a broken file is fixed in one round trip.
//!
//! The document holds four scalar keys and up to seven tables, all optional:
//!
//! ```toml
//! seed = 0                    # randomized-sampling seed (check-invariants)
//! output_dir = "out"          # artifact directory; see io::OUTPUT_ROOT_ENV
//! snapshot_format = "binary"  # "binary" or "csv"
//! snapshot_points = 129       # reconstruction grid written by simulate
//!
//! [gas]       # constitutive coefficients (a, gamma, epsilon, mu, ...)
//! [coupling]  # supports of the interaction profiles: g_lo, g_hi, h_max
//! [initial]   # profile = "smooth-periodic" | "gaussian-envelope"
//!             #         | "near-constant", plus its amplitudes
//! [solver]    # modes, dt, t_end, dealias, floors, monitor cadence, ...
//! [sweep]     # eps_ladder, scaling exponents, reference grids, workers
//! [check]     # tolerances and sample count of check-invariants
//! [entropy]   # state grid and quadrature size of entropy-diag
//! ```
//!
//! The `[gas]` baseline is the working full-coupling profile (ε = 0.1,
//! α = ε^{3/4}, β = δ = ε^{3/2}, μ = 0.4, ν = 0.005, k₁ = 0.2), sized so
//! every parabolic rate clears the explicit stability interval at the
//! default resolution: an empty document is a valid configuration for every
//! subcommand. `[gas]`, `[coupling]`, and `[initial]` are shared by all
//! commands; ε, α, β, δ are overwritten rung by rung during a sweep.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::constitutive::{CouplingFns, GasParams};
use crate::error::{Error, Result};
use crate::galerkin::SolverConfig;
use crate::initial::InitialData;
use crate::limit::euler::FluxKind;
use crate::sweep::SweepPlan;

/// On-disk encoding of field snapshots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotFormat {
    /// One-line JSON header plus flat little-endian doubles; bit-exact.
    Binary,
    /// Plain CSV at 17 significant digits.
    Csv,
}

/// Tolerances and sample count of the invariant checker.
#[derive(Debug, Clone, Copy)]
pub struct CheckSettings {
    /// Relative drift allowed in the conserved volume integral and the
    /// envelope mass.
    pub mass_tol: f64,
    /// Relative total-energy drift allowed over the run.
    pub energy_tol: f64,
    /// Entropy may decrease by at most this fraction of the initial energy
    /// scale between consecutive monitor records.
    pub entropy_tol: f64,
    /// Relative Maxwell-relation residual allowed on sampled states.
    pub maxwell_tol: f64,
    /// Number of random (density, temperature) constitutive samples.
    pub samples: usize,
}

impl Default for CheckSettings {
    fn default() -> Self {
        CheckSettings {
            mass_tol: 1e-8,
            energy_tol: 1e-5,
            entropy_tol: 1e-6,
            maxwell_tol: 1e-6,
            samples: 1000,
        }
    }
}

/// State grid and quadrature size of the entropy-pair tabulation.
#[derive(Debug, Clone, Copy)]
pub struct EntropyDiagSettings {
    /// Gauss nodes of the kernel quadrature.
    pub quadrature_nodes: usize,
    /// Densities run over (0, rho_max].
    pub rho_max: f64,
    /// Velocities run over [-velocity_max, velocity_max].
    pub velocity_max: f64,
    pub rho_points: usize,
    pub velocity_points: usize,
    /// Center of the compactly supported bump test function.
    pub bump_center: f64,
    /// Halfwidth of the bump test function.
    pub bump_halfwidth: f64,
}

impl Default for EntropyDiagSettings {
    fn default() -> Self {
        EntropyDiagSettings {
            quadrature_nodes: 64,
            rho_max: 3.0,
            velocity_max: 3.0,
            rho_points: 33,
            velocity_points: 33,
            bump_center: 0.0,
            bump_halfwidth: 1.0,
        }
    }
}

/// A fully resolved and validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Seed of any randomized sampling (the invariant checker's
    /// constitutive probes).
    pub seed: u64,
    /// Artifact directory as configured; resolve the environment override
    /// with [`crate::io::resolve_output_dir`].
    pub output_dir: PathBuf,
    pub snapshot_format: SnapshotFormat,
    /// Size of the uniform reconstruction grid written by `simulate`.
    pub snapshot_points: usize,
    /// The viscous solve shared by `simulate` and `check-invariants`.
    pub solver: SolverConfig,
    /// The ladder plan shared by `sweep` and `limit-run`.
    pub sweep: SweepPlan,
    pub check: CheckSettings,
    pub entropy: EntropyDiagSettings,
}

/// Baseline gas table of the configuration layer: the working full-coupling
/// profile. ε = 0.1 carries α = ε^{3/4} and β = δ = ε^{3/2} (the sweep
/// scaling evaluated at its largest rung); the transport and conduction
/// constants are sized for explicit stability at the default resolutions.
pub fn baseline_gas() -> GasParams {
    let eps: f64 = 0.1;
    GasParams {
        epsilon: eps,
        alpha: eps.powf(0.75),
        beta: eps.powf(1.5),
        delta: eps.powf(1.5),
        mu: 0.4,
        nu: 0.005,
        k1: 0.2,
        ..GasParams::default()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
    snapshot_format: Option<String>,
    snapshot_points: Option<usize>,
    gas: Option<RawGas>,
    coupling: Option<RawCoupling>,
    initial: Option<RawInitial>,
    solver: Option<RawSolver>,
    sweep: Option<RawSweep>,
    check: Option<RawCheck>,
    entropy: Option<RawEntropy>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGas {
    a: Option<f64>,
    gamma: Option<f64>,
    delta: Option<f64>,
    epsilon: Option<f64>,
    mu: Option<f64>,
    nu: Option<f64>,
    beta: Option<f64>,
    alpha: Option<f64>,
    r: Option<f64>,
    q: Option<f64>,
    e1: Option<f64>,
    e2: Option<f64>,
    k1: Option<f64>,
    k2: Option<f64>,
    p0: Option<f64>,
    big_gamma: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoupling {
    g_lo: Option<f64>,
    g_hi: Option<f64>,
    h_max: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    profile: Option<String>,
    fluid: Option<f64>,
    velocity: Option<f64>,
    thermal: Option<f64>,
    transverse_velocity: Option<f64>,
    transverse_field: Option<f64>,
    envelope: Option<f64>,
    fine_scale: Option<f64>,
    center: Option<f64>,
    width: Option<f64>,
    amplitude: Option<f64>,
    scale: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    modes: Option<usize>,
    dt: Option<f64>,
    t_end: Option<f64>,
    collocation_points: Option<usize>,
    dealias: Option<bool>,
    monitor_every: Option<usize>,
    v_floor: Option<f64>,
    theta_floor: Option<f64>,
    conservative_transverse_field: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    eps_ladder: Option<Vec<f64>>,
    alpha_exp: Option<f64>,
    beta_exp: Option<f64>,
    delta_exp: Option<f64>,
    modes: Option<usize>,
    t_end: Option<f64>,
    segments: Option<usize>,
    dt_cap: Option<f64>,
    dt_safety: Option<f64>,
    euler_cells: Option<usize>,
    flux: Option<String>,
    cfl: Option<f64>,
    rho_floor: Option<f64>,
    nls_points: Option<usize>,
    nls_dt_cap: Option<f64>,
    pullback_points: Option<usize>,
    weak_test_modes: Option<usize>,
    workers: Option<usize>,
    mollify: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCheck {
    mass_tol: Option<f64>,
    energy_tol: Option<f64>,
    entropy_tol: Option<f64>,
    maxwell_tol: Option<f64>,
    samples: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntropy {
    quadrature_nodes: Option<usize>,
    rho_max: Option<f64>,
    velocity_max: Option<f64>,
    rho_points: Option<usize>,
    velocity_points: Option<usize>,
    bump_center: Option<f64>,
    bump_halfwidth: Option<f64>,
}

fn resolve_gas(raw: Option<&RawGas>) -> GasParams {
    let base = baseline_gas();
    let Some(r) = raw else { return base };
    GasParams {
        a: r.a.unwrap_or(base.a),
        gamma: r.gamma.unwrap_or(base.gamma),
        delta: r.delta.unwrap_or(base.delta),
        epsilon: r.epsilon.unwrap_or(base.epsilon),
        mu: r.mu.unwrap_or(base.mu),
        nu: r.nu.unwrap_or(base.nu),
        beta: r.beta.unwrap_or(base.beta),
        alpha: r.alpha.unwrap_or(base.alpha),
        r: r.r.unwrap_or(base.r),
        q: r.q.unwrap_or(base.q),
        e1: r.e1.unwrap_or(base.e1),
        e2: r.e2.unwrap_or(base.e2),
        k1: r.k1.unwrap_or(base.k1),
        k2: r.k2.unwrap_or(base.k2),
        p0: r.p0.unwrap_or(base.p0),
        big_gamma: r.big_gamma.unwrap_or(base.big_gamma),
    }
}

fn resolve_coupling(raw: Option<&RawCoupling>, problems: &mut Vec<String>) -> CouplingFns {
    let default = CouplingFns::default();
    let Some(r) = raw else { return default };
    let (g_lo_d, g_hi_d) = default.g_support;
    let g_lo = r.g_lo.unwrap_or(g_lo_d);
    let g_hi = r.g_hi.unwrap_or(g_hi_d);
    let h_max = r.h_max.unwrap_or(default.h_support);
    match CouplingFns::smoothstep(g_lo, g_hi, h_max) {
        Ok(fns) => fns,
        Err(e) => {
            problems.push(message_of(e));
            default
        }
    }
}

fn resolve_initial(raw: Option<&RawInitial>, problems: &mut Vec<String>) -> InitialData {
    let Some(r) = raw else { return InitialData::default() };
    let profile = r.profile.as_deref().unwrap_or("smooth-periodic");
    let template = match InitialData::parse(profile) {
        Ok(t) => t,
        Err(e) => {
            problems.push(message_of(e));
            return InitialData::default();
        }
    };
    let set = [
        ("fluid", r.fluid.is_some()),
        ("velocity", r.velocity.is_some()),
        ("thermal", r.thermal.is_some()),
        ("transverse_velocity", r.transverse_velocity.is_some()),
        ("transverse_field", r.transverse_field.is_some()),
        ("envelope", r.envelope.is_some()),
        ("fine_scale", r.fine_scale.is_some()),
        ("center", r.center.is_some()),
        ("width", r.width.is_some()),
        ("amplitude", r.amplitude.is_some()),
        ("scale", r.scale.is_some()),
    ];
    let allowed: &[&str] = match template {
        InitialData::SmoothPeriodic { .. } => &[
            "fluid",
            "velocity",
            "thermal",
            "transverse_velocity",
            "transverse_field",
            "envelope",
            "fine_scale",
        ],
        InitialData::GaussianEnvelope { .. } => &["center", "width", "amplitude"],
        InitialData::NearConstant { .. } => &["scale"],
    };
    for (key, is_set) in set {
        if is_set && !allowed.contains(&key) {
            problems.push(format!(
                "initial profile \"{profile}\" does not take key \"{key}\""
            ));
        }
    }
    match template {
        InitialData::SmoothPeriodic {
            fluid,
            velocity,
            thermal,
            transverse_velocity,
            transverse_field,
            envelope,
            fine_scale,
        } => InitialData::SmoothPeriodic {
            fluid: r.fluid.unwrap_or(fluid),
            velocity: r.velocity.unwrap_or(velocity),
            thermal: r.thermal.unwrap_or(thermal),
            transverse_velocity: r.transverse_velocity.unwrap_or(transverse_velocity),
            transverse_field: r.transverse_field.unwrap_or(transverse_field),
            envelope: r.envelope.unwrap_or(envelope),
            fine_scale: r.fine_scale.unwrap_or(fine_scale),
        },
        InitialData::GaussianEnvelope { center, width, amplitude } => {
            InitialData::GaussianEnvelope {
                center: r.center.unwrap_or(center),
                width: r.width.unwrap_or(width),
                amplitude: r.amplitude.unwrap_or(amplitude),
            }
        }
        InitialData::NearConstant { scale } => InitialData::NearConstant {
            scale: r.scale.unwrap_or(scale),
        },
    }
}

fn resolve_solver(
    raw: Option<&RawSolver>,
    params: GasParams,
    coupling: &CouplingFns,
    initial: &InitialData,
) -> SolverConfig {
    let d = SolverConfig::default();
    SolverConfig {
        params,
        coupling: coupling.clone(),
        initial: initial.clone(),
        modes: raw.and_then(|r| r.modes).unwrap_or(d.modes),
        dt: raw.and_then(|r| r.dt).unwrap_or(d.dt),
        t_end: raw.and_then(|r| r.t_end).unwrap_or(d.t_end),
        collocation_points: raw.and_then(|r| r.collocation_points).or(d.collocation_points),
        dealias: raw.and_then(|r| r.dealias).unwrap_or(d.dealias),
        monitor_every: raw.and_then(|r| r.monitor_every).unwrap_or(d.monitor_every),
        v_floor: raw.and_then(|r| r.v_floor).unwrap_or(d.v_floor),
        theta_floor: raw.and_then(|r| r.theta_floor).unwrap_or(d.theta_floor),
        conservative_transverse_field: raw
            .and_then(|r| r.conservative_transverse_field)
            .unwrap_or(d.conservative_transverse_field),
    }
}

fn resolve_sweep(
    raw: Option<&RawSweep>,
    base: GasParams,
    coupling: &CouplingFns,
    initial: &InitialData,
    problems: &mut Vec<String>,
) -> SweepPlan {
    let d = SweepPlan::default();
    let euler_flux = match raw.and_then(|r| r.flux.as_deref()) {
        None => d.euler_flux,
        Some("llf") | Some("local-lax-friedrichs") => FluxKind::LocalLaxFriedrichs,
        Some("hll") => FluxKind::Hll,
        Some(other) => {
            problems.push(format!(
                "sweep.flux must be \"llf\" or \"hll\", got \"{other}\""
            ));
            d.euler_flux
        }
    };
    SweepPlan {
        eps_ladder: raw
            .and_then(|r| r.eps_ladder.clone())
            .unwrap_or_else(|| d.eps_ladder.clone()),
        alpha_exp: raw.and_then(|r| r.alpha_exp).unwrap_or(d.alpha_exp),
        beta_exp: raw.and_then(|r| r.beta_exp).unwrap_or(d.beta_exp),
        delta_exp: raw.and_then(|r| r.delta_exp).unwrap_or(d.delta_exp),
        base,
        coupling: coupling.clone(),
        initial: initial.clone(),
        modes: raw.and_then(|r| r.modes).unwrap_or(d.modes),
        t_end: raw.and_then(|r| r.t_end).unwrap_or(d.t_end),
        segments: raw.and_then(|r| r.segments).unwrap_or(d.segments),
        dt_cap: raw.and_then(|r| r.dt_cap).unwrap_or(d.dt_cap),
        dt_safety: raw.and_then(|r| r.dt_safety).unwrap_or(d.dt_safety),
        euler_cells: raw.and_then(|r| r.euler_cells).unwrap_or(d.euler_cells),
        euler_flux,
        euler_cfl: raw.and_then(|r| r.cfl).unwrap_or(d.euler_cfl),
        rho_floor: raw.and_then(|r| r.rho_floor).unwrap_or(d.rho_floor),
        nls_points: raw.and_then(|r| r.nls_points).unwrap_or(d.nls_points),
        nls_dt_cap: raw.and_then(|r| r.nls_dt_cap).unwrap_or(d.nls_dt_cap),
        pullback_points: raw.and_then(|r| r.pullback_points).unwrap_or(d.pullback_points),
        weak_test_modes: raw.and_then(|r| r.weak_test_modes).unwrap_or(d.weak_test_modes),
        workers: raw.and_then(|r| r.workers).unwrap_or(d.workers),
        mollify: raw.and_then(|r| r.mollify).unwrap_or(d.mollify),
    }
}

fn resolve_check(raw: Option<&RawCheck>, problems: &mut Vec<String>) -> CheckSettings {
    let d = CheckSettings::default();
    let out = CheckSettings {
        mass_tol: raw.and_then(|r| r.mass_tol).unwrap_or(d.mass_tol),
        energy_tol: raw.and_then(|r| r.energy_tol).unwrap_or(d.energy_tol),
        entropy_tol: raw.and_then(|r| r.entropy_tol).unwrap_or(d.entropy_tol),
        maxwell_tol: raw.and_then(|r| r.maxwell_tol).unwrap_or(d.maxwell_tol),
        samples: raw.and_then(|r| r.samples).unwrap_or(d.samples),
    };
    for (name, v) in [
        ("check.mass_tol", out.mass_tol),
        ("check.energy_tol", out.energy_tol),
        ("check.entropy_tol", out.entropy_tol),
        ("check.maxwell_tol", out.maxwell_tol),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            problems.push(format!("{name} must be positive, got {v}"));
        }
    }
    if out.samples == 0 {
        problems.push("check.samples must be at least 1".into());
    }
    out
}

fn resolve_entropy(raw: Option<&RawEntropy>, problems: &mut Vec<String>) -> EntropyDiagSettings {
    let d = EntropyDiagSettings::default();
    let out = EntropyDiagSettings {
        quadrature_nodes: raw.and_then(|r| r.quadrature_nodes).unwrap_or(d.quadrature_nodes),
        rho_max: raw.and_then(|r| r.rho_max).unwrap_or(d.rho_max),
        velocity_max: raw.and_then(|r| r.velocity_max).unwrap_or(d.velocity_max),
        rho_points: raw.and_then(|r| r.rho_points).unwrap_or(d.rho_points),
        velocity_points: raw.and_then(|r| r.velocity_points).unwrap_or(d.velocity_points),
        bump_center: raw.and_then(|r| r.bump_center).unwrap_or(d.bump_center),
        bump_halfwidth: raw.and_then(|r| r.bump_halfwidth).unwrap_or(d.bump_halfwidth),
    };
    if out.quadrature_nodes < 8 {
        problems.push(format!(
            "entropy.quadrature_nodes must be at least 8, got {}",
            out.quadrature_nodes
        ));
    }
    if !(out.rho_max > 0.0 && out.rho_max.is_finite()) {
        problems.push(format!("entropy.rho_max must be positive, got {}", out.rho_max));
    }
    if !(out.velocity_max > 0.0 && out.velocity_max.is_finite()) {
        problems.push(format!(
            "entropy.velocity_max must be positive, got {}",
            out.velocity_max
        ));
    }
    if out.rho_points < 2 {
        problems.push(format!("entropy.rho_points must be at least 2, got {}", out.rho_points));
    }
    if out.velocity_points < 2 {
        problems.push(format!(
            "entropy.velocity_points must be at least 2, got {}",
            out.velocity_points
        ));
    }
    if !out.bump_center.is_finite() {
        problems.push(format!("entropy.bump_center must be finite, got {}", out.bump_center));
    }
    if !(out.bump_halfwidth > 0.0 && out.bump_halfwidth.is_finite()) {
        problems.push(format!(
            "entropy.bump_halfwidth must be positive, got {}",
            out.bump_halfwidth
        ));
    }
    out
}

fn message_of(e: Error) -> String {
    match e {
        Error::Domain(m) | Error::Format(m) | Error::Accuracy(m) => m,
        Error::Validation(v) => v.join("\n"),
        other => other.to_string(),
    }
}

fn dedup_preserving(problems: Vec<String>) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    problems.into_iter().filter(|p| seen.insert(p.clone())).collect()
}

impl RunConfig {
    /// Parse and validate a configuration document. All violations are
    /// collected into one [`Error::Validation`], shared sections reported
    /// once.
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text)
            .map_err(|e| Error::Validation(vec![format!("config parse error: {e}")]))?;
        let mut problems = Vec::new();

        let gas = resolve_gas(raw.gas.as_ref());
        let coupling = resolve_coupling(raw.coupling.as_ref(), &mut problems);
        let initial = resolve_initial(raw.initial.as_ref(), &mut problems);
        let solver = resolve_solver(raw.solver.as_ref(), gas, &coupling, &initial);
        let sweep = resolve_sweep(raw.sweep.as_ref(), gas, &coupling, &initial, &mut problems);
        let check = resolve_check(raw.check.as_ref(), &mut problems);
        let entropy = resolve_entropy(raw.entropy.as_ref(), &mut problems);

        let snapshot_format = match raw.snapshot_format.as_deref() {
            None | Some("binary") => SnapshotFormat::Binary,
            Some("csv") => SnapshotFormat::Csv,
            Some(other) => {
                problems.push(format!(
                    "snapshot_format must be \"binary\" or \"csv\", got \"{other}\""
                ));
                SnapshotFormat::Binary
            }
        };
        let snapshot_points = raw.snapshot_points.unwrap_or(129);
        if snapshot_points < 2 {
            problems.push(format!("snapshot_points must be at least 2, got {snapshot_points}"));
        }

        if let Err(Error::Validation(v)) = solver.validate() {
            problems.extend(v);
        }
        if let Err(Error::Validation(v)) = sweep.validate() {
            problems.extend(v);
        }
        let problems = dedup_preserving(problems);
        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }

        Ok(RunConfig {
            seed: raw.seed.unwrap_or(0),
            output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("out")),
            snapshot_format,
            snapshot_points,
            solver,
            sweep,
            check,
            entropy,
        })
    }
}

/// Read, parse, and validate the configuration file at `path`. A missing or
/// unreadable file is an I/O error; a syntactically or physically invalid
/// document is a validation error listing every problem.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })?;
    RunConfig::from_toml(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn violations(text: &str) -> Vec<String> {
        match RunConfig::from_toml(text) {
            Err(Error::Validation(v)) => v,
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn an_empty_document_is_a_complete_valid_configuration() {
        let cfg = RunConfig::from_toml("").expect("empty config");
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.output_dir, PathBuf::from("out"));
        assert_eq!(cfg.snapshot_format, SnapshotFormat::Binary);
        assert_eq!(cfg.solver.modes, 16);
        assert_eq!(cfg.solver.params.epsilon, 0.1);
        assert!(cfg.solver.params.beta > 0.0);
        assert_eq!(cfg.sweep.eps_ladder, vec![0.1, 0.05, 0.025, 0.0125]);
        assert!(cfg.solver.validate().is_ok());
        assert!(cfg.sweep.validate().is_ok());
    }

    #[test]
    fn partial_tables_keep_unmentioned_defaults() {
        let cfg = RunConfig::from_toml(
            "[gas]\ngamma = 2.5\n\n[solver]\nmodes = 32\n",
        )
        .expect("valid config");
        assert_eq!(cfg.solver.params.gamma, 2.5);
        assert_eq!(cfg.solver.params.a, 1.0);
        assert_eq!(cfg.solver.modes, 32);
        assert_eq!(cfg.solver.dt, 1e-4);
        assert_eq!(cfg.sweep.base.gamma, 2.5);
    }

    #[test]
    fn coupled_constraints_surface_when_one_side_moves() {
        // lowering gamma alone pushes the default thermal-pressure exponent
        // past its gamma/2 ceiling; the report must name the coupling
        let v = violations("[gas]\ngamma = 1.8\n");
        assert!(
            v.iter().any(|m| m.contains("big_gamma") && m.contains("gamma/2")),
            "{v:?}"
        );
    }

    #[test]
    fn non_physical_adiabatic_exponents_are_rejected_by_name() {
        let v = violations("[gas]\ngamma = 1.0\n");
        assert!(v.iter().any(|m| m.contains("gamma") && m.contains("> 1")), "{v:?}");
    }

    #[test]
    fn heat_exponent_coupling_is_reported_with_the_constraint() {
        let v = violations("[gas]\nq = 3.0\nr = 1.0\n");
        assert!(v.iter().any(|m| m.contains("2 + 2r") && m.contains("got 3")), "{v:?}");
    }

    #[test]
    fn borderline_sweep_exponents_are_rejected_with_the_smallness_law() {
        let v = violations("[sweep]\nalpha_exp = 0.4\n");
        assert!(
            v.iter().any(|m| m.contains("coupling exponent") && m.contains("o(")),
            "{v:?}"
        );
    }

    #[test]
    fn unknown_keys_are_rejected_with_line_information() {
        let err = RunConfig::from_toml("[solver]\nmodez = 4\n").unwrap_err();
        let text = err.to_string();
        assert!(text.contains("modez"), "{text}");
        assert!(text.contains("line"), "{text}");
    }

    #[test]
    fn every_violation_is_reported_in_one_pass() {
        let v = violations(
            "[gas]\ngamma = 1.0\n\n[sweep]\nalpha_exp = 0.4\n\n[solver]\ndt = -1.0\n",
        );
        assert!(v.iter().any(|m| m.contains("gamma")), "{v:?}");
        assert!(v.iter().any(|m| m.contains("coupling exponent")), "{v:?}");
        assert!(v.iter().any(|m| m.contains("time step")), "{v:?}");
    }

    #[test]
    fn shared_gas_violations_are_reported_once() {
        // the solver and the sweep both embed the gas table; the shared
        // violation must not appear twice
        let v = violations("[gas]\ngamma = 1.0\n");
        let hits = v.iter().filter(|m| m.contains("params.gamma must be")).count();
        assert_eq!(hits, 1, "{v:?}");
    }

    #[test]
    fn initial_profiles_reject_keys_of_other_profiles() {
        let v = violations("[initial]\nprofile = \"near-constant\"\nfluid = 0.2\n");
        assert!(
            v.iter().any(|m| m.contains("near-constant") && m.contains("fluid")),
            "{v:?}"
        );
    }

    #[test]
    fn initial_profile_names_are_vetted() {
        let v = violations("[initial]\nprofile = \"squarewave\"\n");
        assert!(v.iter().any(|m| m.contains("unknown initial profile")), "{v:?}");
    }

    #[test]
    fn gaussian_profiles_fill_their_documented_defaults() {
        let cfg = RunConfig::from_toml(
            "[initial]\nprofile = \"gaussian-envelope\"\nwidth = 0.2\n",
        )
        .expect("valid config");
        match cfg.solver.initial {
            InitialData::GaussianEnvelope { center, width, amplitude } => {
                assert_eq!(center, 0.5);
                assert_eq!(width, 0.2);
                assert_eq!(amplitude, 0.5);
            }
            other => panic!("wrong profile: {other:?}"),
        }
    }

    #[test]
    fn flux_names_map_to_the_builtin_schemes() {
        let cfg = RunConfig::from_toml("[sweep]\nflux = \"hll\"\n").expect("valid");
        assert_eq!(cfg.sweep.euler_flux, FluxKind::Hll);
        let v = violations("[sweep]\nflux = \"roe\"\n");
        assert!(v.iter().any(|m| m.contains("llf") && m.contains("roe")), "{v:?}");
    }

    #[test]
    fn snapshot_knobs_are_validated() {
        let v = violations("snapshot_format = \"hdf5\"\nsnapshot_points = 1\n");
        assert!(v.iter().any(|m| m.contains("snapshot_format")), "{v:?}");
        assert!(v.iter().any(|m| m.contains("snapshot_points")), "{v:?}");
    }

    #[test]
    fn zeroed_magnetic_coefficient_with_transverse_field_names_the_conflict() {
        let v = violations("[gas]\nbeta = 0.0\n");
        assert!(
            v.iter().any(|m| m.contains("transverse field") && m.contains("magnetic")),
            "{v:?}"
        );
    }

    #[test]
    fn tunables_of_every_design_decision_are_reachable() {
        let cfg = RunConfig::from_toml(
            "seed = 9\noutput_dir = \"artifacts\"\nsnapshot_format = \"csv\"\n\
             [solver]\nv_floor = 1e-7\ntheta_floor = 1e-9\ndealias = false\n\
             collocation_points = 99\nmonitor_every = 7\n\
             conservative_transverse_field = true\n\
             [sweep]\nflux = \"hll\"\nrho_floor = 1e-10\ncfl = 0.3\nmollify = true\n\
             workers = 2\n",
        )
        .expect("valid config");
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.output_dir, PathBuf::from("artifacts"));
        assert_eq!(cfg.snapshot_format, SnapshotFormat::Csv);
        assert_eq!(cfg.solver.v_floor, 1e-7);
        assert_eq!(cfg.solver.theta_floor, 1e-9);
        assert!(!cfg.solver.dealias);
        assert_eq!(cfg.solver.collocation_points, Some(99));
        assert_eq!(cfg.solver.monitor_every, 7);
        assert!(cfg.solver.conservative_transverse_field);
        assert_eq!(cfg.sweep.euler_flux, FluxKind::Hll);
        assert_eq!(cfg.sweep.rho_floor, 1e-10);
        assert_eq!(cfg.sweep.euler_cfl, 0.3);
        assert!(cfg.sweep.mollify);
        assert_eq!(cfg.sweep.workers, 2);
    }
}
