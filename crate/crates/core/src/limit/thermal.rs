//! Variational inequality satisfied by the limit temperature.
//!
//! The vanishing-viscosity limit does not determine the temperature through
//! a pointwise PDE; what survives is an integral inequality against
//! nonnegative test functions whose spatial derivative vanishes at the
//! walls and which vanish at the final time. This module evaluates that
//! inequality's residual on sampled trajectories. It never solves the
//! thermal equation forward: a trajectory certifies itself by producing a
//! nonpositive residual, up to quadrature error and the viscous remainders
//! of the run that generated it.

use crate::constitutive::GasParams;
use crate::error::{Error, Result};
use crate::quadrature::trapezoid;

/// Densities below this count toward the reported vacuum measure, where
/// the limit temperature is not determined by the fields.
pub const VACUUM_RHO: f64 = 1e-10;

/// One time slice of the fields entering the thermal inequality, sampled
/// on a shared spatial grid.
#[derive(Debug, Clone)]
pub struct ThermalSlice {
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    /// Two transverse velocity components.
    pub w: [Vec<f64>; 2],
    pub theta: Vec<f64>,
}

/// A sampled space-time trajectory: `slices[k]` holds the fields at
/// `times[k]` on the grid `x`.
#[derive(Debug, Clone)]
pub struct ThermalInput {
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    pub slices: Vec<ThermalSlice>,
}

impl ThermalInput {
    fn validate(&self) -> Result<()> {
        if self.times.len() != self.slices.len() {
            return Err(Error::Shape {
                what: "thermal trajectory slices",
                expected: self.times.len(),
                got: self.slices.len(),
            });
        }
        if self.times.len() < 2 {
            return Err(Error::Domain(
                "thermal residual needs at least two time slices".into(),
            ));
        }
        if self.x.len() < 3 {
            return Err(Error::Domain(
                "thermal residual needs at least three grid points".into(),
            ));
        }
        for w in self.times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Domain(
                    "slice times must increase strictly".into(),
                ));
            }
        }
        for w in self.x.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Domain(
                    "grid points must increase strictly".into(),
                ));
            }
        }
        let n = self.x.len();
        for (k, s) in self.slices.iter().enumerate() {
            for (name, len) in [
                ("rho", s.rho.len()),
                ("u", s.u.len()),
                ("w[0]", s.w[0].len()),
                ("w[1]", s.w[1].len()),
                ("theta", s.theta.len()),
            ] {
                if len != n {
                    return Err(Error::Domain(format!(
                        "slice {k} field {name} has {len} points, grid has {n}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Space-time test function with the derivatives the weak form needs.
/// Arguments are (x, t). Required shape: nonnegative everywhere, ∂_x zero
/// at both walls for every time, identically zero at the final time.
pub struct ThermalTestFn<'a> {
    pub phi: &'a dyn Fn(f64, f64) -> f64,
    pub phi_t: &'a dyn Fn(f64, f64) -> f64,
    pub phi_x: &'a dyn Fn(f64, f64) -> f64,
    pub phi_xx: &'a dyn Fn(f64, f64) -> f64,
}

/// Outcome of the inequality check. A variational limit temperature makes
/// `residual ≤ 0` up to quadrature error on the scale `scale`;
/// `vacuum_measure` reports the space-time fraction where the density sits
/// below the vacuum floor and the temperature is therefore unconstrained.
#[derive(Debug, Clone, Copy)]
pub struct ThermalResidual {
    pub residual: f64,
    pub scale: f64,
    pub vacuum_measure: f64,
}

/// Evaluate the thermal inequality residual
/// ∬ [ρ Q(θ) φ_t + ρ u Q(θ) φ_x + 𝒦(θ) φ_xx] dx dt
/// + ∬ μ |w_x|² φ dx dt + ∫ ρ₀ Q(θ₀) φ(·,0) dx,
/// with Q the heat-capacity primitive and 𝒦 the conductivity primitive of
/// the gas model. Trapezoid quadrature in both variables; the transverse
/// gradient uses centered differences inside the grid and one-sided ones
/// at the walls.
pub fn thermal_inequality_residual(
    input: &ThermalInput,
    gas: &GasParams,
    mu: f64,
    phi: &ThermalTestFn,
) -> Result<ThermalResidual> {
    input.validate()?;
    if !(mu >= 0.0) {
        return Err(Error::Domain(format!(
            "shear viscosity must be nonnegative, got {mu}"
        )));
    }
    let x = &input.x;
    let times = &input.times;
    let n = x.len();
    let t_end = *times.last().unwrap();

    let mut violations = Vec::new();
    let mut max_phi = 0.0f64;
    for &t in times {
        for &xi in x {
            max_phi = max_phi.max((phi.phi)(xi, t).abs());
        }
    }
    let gate = 1e-10 * (1.0 + max_phi);
    for &t in times {
        if x.iter().any(|&xi| (phi.phi)(xi, t) < -gate) {
            violations.push(format!("test function is negative at t = {t:.4}"));
        }
        let (x_lo, x_hi) = (x[0], x[n - 1]);
        if (phi.phi_x)(x_lo, t).abs() > gate || (phi.phi_x)(x_hi, t).abs() > gate {
            violations.push(format!(
                "test function gradient must vanish at the walls, violated at t = {t:.4}"
            ));
        }
    }
    if x.iter().any(|&xi| (phi.phi)(xi, t_end).abs() > gate) {
        violations.push(format!(
            "test function must vanish at the final time {t_end:.4}"
        ));
    }
    if !violations.is_empty() {
        violations.dedup();
        return Err(Error::Validation(violations));
    }

    let mut slice_vals = Vec::with_capacity(times.len());
    let mut slice_abs = Vec::with_capacity(times.len());
    let mut vacuum_vals = Vec::with_capacity(times.len());
    for (s, &t) in input.slices.iter().zip(times) {
        let wx = [gradient(x, &s.w[0]), gradient(x, &s.w[1])];
        let mut integrand = Vec::with_capacity(n);
        let mut integrand_abs = Vec::with_capacity(n);
        let mut vacuum = Vec::with_capacity(n);
        for i in 0..n {
            let xi = x[i];
            let big_q = gas.heat_integral(s.theta[i]);
            let transport = s.rho[i] * big_q * (phi.phi_t)(xi, t)
                + s.rho[i] * s.u[i] * big_q * (phi.phi_x)(xi, t);
            let conduction = gas.kappa_primitive(s.theta[i]) * (phi.phi_xx)(xi, t);
            let shear = mu
                * (wx[0][i] * wx[0][i] + wx[1][i] * wx[1][i])
                * (phi.phi)(xi, t);
            integrand.push(transport + conduction + shear);
            integrand_abs.push(transport.abs() + conduction.abs() + shear.abs());
            vacuum.push(if s.rho[i] < VACUUM_RHO { 1.0 } else { 0.0 });
        }
        slice_vals.push(trapezoid(x, &integrand));
        slice_abs.push(trapezoid(x, &integrand_abs));
        vacuum_vals.push(trapezoid(x, &vacuum));
    }
    let interior = trapezoid(times, &slice_vals);
    let interior_abs = trapezoid(times, &slice_abs);
    let vacuum_spacetime = trapezoid(times, &vacuum_vals);

    let first = &input.slices[0];
    let t0 = times[0];
    let initial_fs: Vec<f64> = (0..n)
        .map(|i| first.rho[i] * gas.heat_integral(first.theta[i]) * (phi.phi)(x[i], t0))
        .collect();
    let initial = trapezoid(x, &initial_fs);
    let initial_abs = trapezoid(
        x,
        &initial_fs.iter().map(|v| v.abs()).collect::<Vec<_>>(),
    );

    let span = (x[n - 1] - x[0]) * (t_end - t0);
    Ok(ThermalResidual {
        residual: interior + initial,
        scale: interior_abs + initial_abs,
        vacuum_measure: if span > 0.0 {
            vacuum_spacetime / span
        } else {
            0.0
        },
    })
}

/// Centered differences on a nonuniform grid, one-sided at the ends.
fn gradient(x: &[f64], f: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut g = vec![0.0; n];
    g[0] = (f[1] - f[0]) / (x[1] - x[0]);
    for i in 1..n - 1 {
        g[i] = (f[i + 1] - f[i - 1]) / (x[i + 1] - x[i - 1]);
    }
    g[n - 1] = (f[n - 1] - f[n - 2]) / (x[n - 1] - x[n - 2]);
    g
}
