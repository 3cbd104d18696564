//! Conserved and monitored quantities.
//!
//! Every record carries the instantaneous integrals (total energy, entropy,
//! envelope norms, field extrema) together with the running space-time
//! integrals behind the uniform a-priori bounds: density-gradient and
//! magnetic energies, higher integrability of density and velocity,
//! temperature moments, and the full viscous/resistive/thermal dissipation.
//! Instantaneous integrals use the collocation quadrature of the spectral
//! solver; running integrals advance by the trapezoid rule in time at the
//! monitor cadence, so their values are comparable across runs only at
//! matched cadence.
//!
//! All integrands are stated in the mass coordinate. The corresponding
//! physical-space forms follow from dy = ρ dx and ∂_x = (1/v) ∂_y; for
//! example ∫ρ_x²/ρ³ dx = ∫v_y²/v² dy and ∬ρ|u|³ dx dt = ∬|u|³ dy dt.

use crate::constitutive::{coupling_eval, GasParams};
use crate::error::{Error, Result};
use crate::galerkin::{GalerkinState, NodalFields, Solver};

/// Column names of the monitor stream, in serialization order.
pub const MONITOR_COLUMNS: &[&str] = &[
    "t",
    "mass",
    "total_energy",
    "entropy_integral",
    "entropy_production_rate",
    "psi_l2",
    "psi_energy",
    "psi_linf",
    "min_v",
    "max_v",
    "min_theta",
    "max_theta",
    "unif1",
    "unif2",
    "unif2_time",
    "unif3",
    "unif4",
    "unif5",
    "dissipation",
    "dissipation_rate",
];

/// One row of the monitor stream.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorRecord {
    pub t: f64,
    /// ∫ v dy: the conserved volume integral (physical length of the slab).
    pub mass: f64,
    /// Closed-system energy: internal + kinetic + transverse kinetic +
    /// magnetic + coupling + envelope gradient + envelope quartic.
    pub total_energy: f64,
    /// ∫ s(1/v, θ) dy.
    pub entropy_integral: f64,
    /// Difference quotient of the entropy integral between consecutive
    /// records; zero on the first record.
    pub entropy_production_rate: f64,
    /// L² norm of the envelope (exactly conserved by the continuum flow).
    pub psi_l2: f64,
    /// ∫ ½|ψ_y|² + ¼|ψ|⁴ dy, the envelope's own energy.
    pub psi_energy: f64,
    /// max |ψ| over the collocation nodes.
    pub psi_linf: f64,
    pub min_v: f64,
    pub max_v: f64,
    pub min_theta: f64,
    pub max_theta: f64,
    /// The bounded energy bracket of the first uniform estimate (equals the
    /// total energy for this closed system).
    pub unif1: f64,
    /// ε²∫ v_y²/v² dy + εβ²∫ |h|² v² dy (instantaneous).
    pub unif2: f64,
    /// ε∬ v_y² v^{−γ−2} + εβ∬ |h_y|², running.
    pub unif2_time: f64,
    /// ∬ (v^{−γ} + δθ p_θ(1/v) + β|h|²) dy dt, running.
    pub unif3: f64,
    /// ∬ (|u|³ + v^{1−γ−ϑ}) dy dt, running.
    pub unif4: f64,
    /// ∬ (θ^{q+1} v + (q/2)² θ^{q−2} θ_y²/v) dy dt, running.
    pub unif5: f64,
    /// ∬ (κθ_y²/(vθ²) + (εu_y² + μ|w_y|² + ν|h_y|²)/v) dy dt, running.
    pub dissipation: f64,
    /// Instantaneous value of the dissipation integrand above.
    pub dissipation_rate: f64,
}

impl MonitorRecord {
    /// Values in the order of MONITOR_COLUMNS.
    pub fn to_row(&self) -> Vec<f64> {
        vec![
            self.t,
            self.mass,
            self.total_energy,
            self.entropy_integral,
            self.entropy_production_rate,
            self.psi_l2,
            self.psi_energy,
            self.psi_linf,
            self.min_v,
            self.max_v,
            self.min_theta,
            self.max_theta,
            self.unif1,
            self.unif2,
            self.unif2_time,
            self.unif3,
            self.unif4,
            self.unif5,
            self.dissipation,
            self.dissipation_rate,
        ]
    }
}

/// Per-run accumulator for the running space-time integrals. Owned by the
/// run that produces the records; never shared across runs.
#[derive(Debug, Clone, Default)]
pub struct Accumulator {
    started: bool,
    prev_t: f64,
    prev_entropy: f64,
    prev_rates: RunningRates,
    totals: RunningRates,
}

#[derive(Debug, Clone, Copy, Default)]
struct RunningRates {
    unif2_time: f64,
    unif3: f64,
    unif4: f64,
    unif5: f64,
    dissipation: f64,
}

impl RunningRates {
    fn advance(totals: &mut RunningRates, prev: &RunningRates, now: &RunningRates, dt: f64) {
        totals.unif2_time += 0.5 * dt * (prev.unif2_time + now.unif2_time);
        totals.unif3 += 0.5 * dt * (prev.unif3 + now.unif3);
        totals.unif4 += 0.5 * dt * (prev.unif4 + now.unif4);
        totals.unif5 += 0.5 * dt * (prev.unif5 + now.unif5);
        totals.dissipation += 0.5 * dt * (prev.dissipation + now.dissipation);
    }
}

/// Measure a spectral state. Spatial derivatives are spectral through the
/// solver's shared reconstruction; the accumulator carries the running
/// integrals and the previous entropy for the production rate.
pub fn measure(solver: &Solver, state: &GalerkinState, acc: &mut Accumulator) -> Result<MonitorRecord> {
    if let Some(field) = state.first_non_finite() {
        return Err(Error::Divergence {
            field: field.into(),
            time: state.t,
        });
    }
    let nodal = solver.nodal_fields(state)?;
    let record = measure_fields(&nodal, &solver.cfg.params, &solver.cfg.coupling, state.t, acc)?;
    Ok(record)
}

/// Measure from nodal fields directly (shared with the limit solvers, which
/// supply central-difference derivatives on their own grids).
pub fn measure_fields(
    nodal: &NodalFields,
    params: &GasParams,
    coupling: &crate::constitutive::CouplingFns,
    t: f64,
    acc: &mut Accumulator,
) -> Result<MonitorRecord> {
    let m = nodal.v.len();
    let p = params;
    let theta_exp = p.sound_speed_exponent();

    let mut mass = 0.0;
    let mut energy = 0.0;
    let mut entropy = 0.0;
    let mut psi_l2_sq = 0.0;
    let mut psi_energy = 0.0;
    let mut psi_linf = 0.0f64;
    let mut unif2 = 0.0;
    let mut rates = RunningRates::default();
    let mut min_v = f64::INFINITY;
    let mut max_v = f64::NEG_INFINITY;
    let mut min_theta = f64::INFINITY;
    let mut max_theta = f64::NEG_INFINITY;

    for i in 0..m {
        let v = nodal.v[i];
        let th = nodal.theta[i];
        let rho = 1.0 / v;
        min_v = min_v.min(v);
        max_v = max_v.max(v);
        min_theta = min_theta.min(th);
        max_theta = max_theta.max(th);

        let u = nodal.u[i];
        let u_y = nodal.u_y[i];
        let w_sq = nodal.w[0][i] * nodal.w[0][i] + nodal.w[1][i] * nodal.w[1][i];
        let w_y_sq = nodal.w_y[0][i] * nodal.w_y[0][i] + nodal.w_y[1][i] * nodal.w_y[1][i];
        let h_sq = nodal.h[0][i] * nodal.h[0][i] + nodal.h[1][i] * nodal.h[1][i];
        let h_y_sq = nodal.h_y[0][i] * nodal.h_y[0][i] + nodal.h_y[1][i] * nodal.h_y[1][i];
        let psi_sq = nodal.psi[i].norm_sqr();
        let psi_y_sq = nodal.psi_y[i].norm_sqr();
        let coup = coupling_eval(v, psi_sq, coupling)?;

        mass += v;
        energy += p.internal_energy(rho, th)?
            + 0.5 * (u * u + w_sq)
            + 0.5 * p.beta * v * h_sq
            + p.alpha * coup.g * coup.h
            + 0.5 * psi_y_sq
            + 0.25 * psi_sq * psi_sq;
        entropy += p.entropy(rho, th)?;
        psi_l2_sq += psi_sq;
        psi_energy += 0.5 * psi_y_sq + 0.25 * psi_sq * psi_sq;
        psi_linf = psi_linf.max(psi_sq.sqrt());

        let kappa = p.heat_conductivity(th);
        let theta_y = nodal.theta_y[i];
        let diss = kappa * theta_y * theta_y / (v * th * th)
            + (p.epsilon * u_y * u_y + p.mu * w_y_sq + p.nu * h_y_sq) / v;
        rates.dissipation += diss;
        rates.unif2_time += p.epsilon * p.beta * h_y_sq;
        rates.unif3 += v.powf(-p.gamma) + p.delta * th * p.p_theta(rho) + p.beta * h_sq;
        rates.unif4 += u.abs().powi(3) + v.powf(1.0 - p.gamma - theta_exp);
        rates.unif5 += th.powf(p.q + 1.0) * v
            + (0.5 * p.q).powi(2) * th.powf(p.q - 2.0) * theta_y * theta_y / v;
        unif2 += p.epsilon * p.beta * p.beta * h_sq * v * v;
    }

    // volume-gradient contributions
    for i in 0..m {
        let v = nodal.v[i];
        let g = nodal.v_y[i] * nodal.v_y[i];
        unif2 += p.epsilon * p.epsilon * g / (v * v);
        rates.unif2_time += p.epsilon * g * v.powf(-p.gamma - 2.0);
    }

    let inv_m = 1.0 / m as f64;
    mass *= inv_m;
    energy *= inv_m;
    entropy *= inv_m;
    psi_l2_sq *= inv_m;
    psi_energy *= inv_m;
    unif2 *= inv_m;
    rates.unif2_time *= inv_m;
    rates.unif3 *= inv_m;
    rates.unif4 *= inv_m;
    rates.unif5 *= inv_m;
    rates.dissipation *= inv_m;

    let production = if acc.started {
        let dt = t - acc.prev_t;
        if dt > 0.0 {
            RunningRates::advance(&mut acc.totals, &acc.prev_rates, &rates, dt);
            (entropy - acc.prev_entropy) / dt
        } else {
            0.0
        }
    } else {
        0.0
    };
    acc.started = true;
    acc.prev_t = t;
    acc.prev_entropy = entropy;
    acc.prev_rates = rates;

    let record = MonitorRecord {
        t,
        mass,
        total_energy: energy,
        entropy_integral: entropy,
        entropy_production_rate: production,
        psi_l2: psi_l2_sq.sqrt(),
        psi_energy,
        psi_linf,
        min_v,
        max_v,
        min_theta,
        max_theta,
        unif1: energy,
        unif2,
        unif2_time: acc.totals.unif2_time,
        unif3: acc.totals.unif3,
        unif4: acc.totals.unif4,
        unif5: acc.totals.unif5,
        dissipation: acc.totals.dissipation,
        dissipation_rate: rates.dissipation,
    };
    if record.to_row().iter().any(|x| !x.is_finite()) {
        return Err(Error::Divergence {
            field: "monitor integrals".into(),
            time: t,
        });
    }
    Ok(record)
}

/// Measure a full trajectory at its stored cadence.
pub fn monitor_trajectory(solver: &Solver, snapshots: &[GalerkinState]) -> Result<Vec<MonitorRecord>> {
    let mut acc = Accumulator::default();
    snapshots
        .iter()
        .map(|s| measure(solver, s, &mut acc))
        .collect()
}

/// Largest consecutive energy jump relative to the initial total energy.
/// Zero for windows shorter than two records.
pub fn check_energy_identity(records: &[MonitorRecord]) -> f64 {
    if records.len() < 2 {
        return 0.0;
    }
    let scale = records[0].total_energy.abs().max(f64::MIN_POSITIVE);
    records
        .windows(2)
        .map(|w| (w[1].total_energy - w[0].total_energy).abs() / scale)
        .fold(0.0, f64::max)
}

/// Total drift of the energy over the window, relative to the initial value.
pub fn energy_drift(records: &[MonitorRecord]) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    let scale = records[0].total_energy.abs().max(f64::MIN_POSITIVE);
    let lo = records.iter().map(|r| r.total_energy).fold(f64::INFINITY, f64::min);
    let hi = records
        .iter()
        .map(|r| r.total_energy)
        .fold(f64::NEG_INFINITY, f64::max);
    (hi - lo) / scale
}
