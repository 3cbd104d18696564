//! Transverse momentum transport in the vanishing-viscosity limit:
//! (ρw)_t + (ρuw)_x = (μ w_x)_x, driven by frozen density and momentum
//! fields from the Euler reference solver.
//!
//! One step splits into conservative upwind advection of the momentum
//! density ρw with the interface-averaged Euler velocity, followed by an
//! implicit (backward Euler) diffusion solve. The diffusion matrix stays
//! symmetric positive definite even across vacuum, because the shear term
//! contributes to the diagonal regardless of ρ. Walls impose w = 0 through
//! antisymmetric ghost values.

use crate::error::{Error, Result};

/// Densities below this are treated as vacuum: the cell carries the
/// transverse velocity of its upwind neighbor, since ρw vanishes there and
/// the equation no longer determines w itself.
pub const VACUUM_RHO: f64 = 1e-10;

/// Advance the transverse velocity field one step of size dt against the
/// frozen Euler fields (rho, m). Returns the updated velocity (not the
/// momentum density). Fails when dt violates the advective CFL bound
/// dt·max|u| ≤ Δx or when inputs are inconsistent.
pub fn transverse_step(
    w: &[f64],
    rho: &[f64],
    m: &[f64],
    dt: f64,
    mu: f64,
) -> Result<Vec<f64>> {
    let n = w.len();
    if rho.len() != n || m.len() != n {
        return Err(Error::Shape {
            what: "transverse step fields",
            expected: n,
            got: rho.len().min(m.len()),
        });
    }
    if n < 3 {
        return Err(Error::Domain(
            "transverse grid needs at least three cells".into(),
        ));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!(
            "step size must be positive, got {dt}"
        )));
    }
    if !(mu >= 0.0) {
        return Err(Error::Domain(format!(
            "shear viscosity must be nonnegative, got {mu}"
        )));
    }
    for (i, &r) in rho.iter().enumerate() {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!(
                "density must be nonnegative, got {r} in cell {i}"
            )));
        }
    }
    let dx = 1.0 / n as f64;
    let u: Vec<f64> = rho
        .iter()
        .zip(m)
        .map(|(&r, &mi)| if r > VACUUM_RHO { mi / r } else { 0.0 })
        .collect();

    // interface velocities; walls are closed
    let mut u_face = vec![0.0; n + 1];
    for i in 1..n {
        u_face[i] = 0.5 * (u[i - 1] + u[i]);
    }
    let max_face = u_face.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if dt * max_face > dx * (1.0 + 1e-12) {
        return Err(Error::StepSize {
            what: "transverse advective limit",
            given: dt,
            limit: dx / max_face,
        });
    }

    // upwind advection of the momentum density W = ρw
    let momentum: Vec<f64> = rho.iter().zip(w).map(|(&r, &wi)| r * wi).collect();
    let mut flux = vec![0.0; n + 1];
    for i in 1..n {
        flux[i] = if u_face[i] >= 0.0 {
            u_face[i] * momentum[i - 1]
        } else {
            u_face[i] * momentum[i]
        };
    }
    let mut advected = vec![0.0; n];
    for i in 0..n {
        advected[i] = momentum[i] - dt / dx * (flux[i + 1] - flux[i]);
    }

    // implicit diffusion: (ρ_i + 2s) w_i − s (w_{i−1} + w_{i+1}) = W*_i,
    // s = dt μ / Δx²; Dirichlet walls enter as ghost values w = −w_edge,
    // which adds s to the diagonal of the first and last rows
    let s = dt * mu / (dx * dx);
    let mut diag = vec![0.0; n];
    let mut rhs = advected;
    for i in 0..n {
        diag[i] = rho[i] + 2.0 * s;
        if i == 0 || i == n - 1 {
            diag[i] += s;
        }
    }
    let mut next = if s > 0.0 {
        solve_tridiagonal(&diag, -s, &rhs)?
    } else {
        // pure advection: vacuum rows are undetermined, fixed below
        for i in 0..n {
            rhs[i] = if rho[i] > VACUUM_RHO { rhs[i] / rho[i] } else { 0.0 };
        }
        rhs
    };

    // vacuum cells carry the upwind neighbor's velocity. Faces interior to
    // a vacuum run are stagnant, so the carry propagates through the run
    // from the face where flow enters; when both ends feed a run, the
    // leftward sweep resolves last.
    let vac: Vec<bool> = rho.iter().map(|&r| r < VACUUM_RHO).collect();
    let mut carried = vec![false; n];
    for i in 1..n {
        if vac[i] && (u_face[i] > 0.0 || (vac[i - 1] && carried[i - 1])) {
            next[i] = next[i - 1];
            carried[i] = true;
        }
    }
    let mut carried_back = vec![false; n];
    for i in (0..n - 1).rev() {
        if vac[i] && (u_face[i + 1] < 0.0 || (vac[i + 1] && carried_back[i + 1])) {
            next[i] = next[i + 1];
            carried_back[i] = true;
        }
    }
    Ok(next)
}

/// Total transverse momentum Δx Σ ρw, the quantity the step conserves up
/// to wall fluxes.
pub fn transverse_momentum(w: &[f64], rho: &[f64]) -> f64 {
    let dx = 1.0 / w.len() as f64;
    dx * w.iter().zip(rho).map(|(&wi, &r)| wi * r).sum::<f64>()
}

/// Thomas solve for a symmetric tridiagonal system with constant
/// off-diagonal entries. Diagonal dominance holds by construction here,
/// so no pivoting is needed.
fn solve_tridiagonal(diag: &[f64], off: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom.abs() < 1e-300 {
        return Err(Error::Accuracy("diffusion solve pivot vanished".into()));
    }
    c[0] = off / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - off * c[i - 1];
        if denom.abs() < 1e-300 {
            return Err(Error::Accuracy("diffusion solve pivot vanished".into()));
        }
        c[i] = off / denom;
        d[i] = (rhs[i] - off * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_field_stays_zero() {
        let n = 32;
        let rho = vec![1.0; n];
        let m = vec![0.3; n];
        let w = vec![0.0; n];
        let next = transverse_step(&w, &rho, &m, 1e-3, 0.2).unwrap();
        assert!(next.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn diffusion_decays_the_fundamental_mode_at_the_heat_rate() {
        let n = 200;
        let dx = 1.0 / n as f64;
        let mu = 0.1;
        let rho = vec![1.0; n];
        let m = vec![0.0; n];
        let run = |dt: f64| -> f64 {
            let mut w: Vec<f64> = (0..n)
                .map(|i| (PI * (i as f64 + 0.5) * dx).sin())
                .collect();
            let steps = (0.5 / dt).round() as usize;
            for _ in 0..steps {
                w = transverse_step(&w, &rho, &m, dt, mu).unwrap();
            }
            w[n / 2 - 1]
        };
        let exact = (PI * (0.5 - 0.5 * dx)).sin() * (-mu * PI * PI * 0.5).exp();
        let coarse = (run(2e-3) - exact).abs();
        let fine = (run(1e-3) - exact).abs();
        assert!(coarse < 1e-3 * exact.abs() + 1e-4);
        // backward Euler in time: halving dt roughly halves the error
        assert!(
            coarse / fine > 1.7,
            "decay error ratio {:.2} under dt halving",
            coarse / fine
        );
    }

    #[test]
    fn momentum_is_conserved_for_compact_data() {
        let n = 160;
        let dx = 1.0 / n as f64;
        let rho: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.3 * (2.0 * PI * (i as f64 + 0.5) * dx).cos())
            .collect();
        let m: Vec<f64> = rho.iter().map(|&r| 0.4 * r).collect();
        let mut w: Vec<f64> = (0..n)
            .map(|i| {
                let x = (i as f64 + 0.5) * dx;
                let arg = (x - 0.5) / 0.04;
                (-arg * arg).exp()
            })
            .collect();
        let before = transverse_momentum(&w, &rho);
        // short enough that diffusion cannot carry the support to a wall,
        // so the boundary shear flux stays below the conservation gate
        let dt = 0.5 * dx / 0.6;
        for _ in 0..20 {
            w = transverse_step(&w, &rho, &m, dt, 0.005).unwrap();
        }
        let after = transverse_momentum(&w, &rho);
        assert!(
            (after - before).abs() <= 1e-8 * before.abs(),
            "momentum moved from {before:.12} to {after:.12}"
        );
    }

    #[test]
    fn vacuum_cells_carry_the_upwind_velocity() {
        let n = 10;
        let mut rho = vec![1.0; n];
        let mut m = vec![0.5; n];
        rho[6] = 0.0;
        m[6] = 0.0;
        rho[7] = 0.0;
        m[7] = 0.0;
        let w: Vec<f64> = (0..n).map(|i| 0.1 * i as f64).collect();
        // rightward flow: faces into the vacuum block see u > 0
        let next = transverse_step(&w, &rho, &m, 1e-3, 0.0).unwrap();
        assert_eq!(next[6], next[5]);
        assert_eq!(next[7], next[6]);
    }

    #[test]
    fn advective_cfl_violation_is_rejected() {
        let n = 50;
        let rho = vec![1.0; n];
        let m = vec![2.0; n];
        let w = vec![0.1; n];
        let dx = 1.0 / n as f64;
        let err = transverse_step(&w, &rho, &m, 1.5 * dx / 2.0, 0.1).unwrap_err();
        assert!(matches!(err, Error::StepSize { .. }));
    }

    #[test]
    fn uniform_advection_transports_without_distortion_of_the_mean() {
        // constant rho and u: the scheme reduces to upwind transport whose
        // total momentum is exactly conserved away from the walls
        let n = 128;
        let dx = 1.0 / n as f64;
        let rho = vec![1.0; n];
        let m = vec![0.25; n];
        let mut w: Vec<f64> = (0..n)
            .map(|i| {
                let x = (i as f64 + 0.5) * dx;
                let arg = (x - 0.3) / 0.05;
                0.7 * (-arg * arg).exp()
            })
            .collect();
        let before = transverse_momentum(&w, &rho);
        let dt = 0.8 * dx / 0.25;
        for _ in 0..40 {
            w = transverse_step(&w, &rho, &m, dt, 0.0).unwrap();
        }
        let after = transverse_momentum(&w, &rho);
        assert!((after - before).abs() < 1e-12);
        // the packet's center of mass moved with the flow
        let center = |w: &[f64]| -> f64 {
            let total: f64 = w.iter().sum();
            w.iter()
                .enumerate()
                .map(|(i, &wi)| (i as f64 + 0.5) * dx * wi)
                .sum::<f64>()
                / total
        };
        let moved = center(&w);
        let expected = 0.3 + 0.25 * 40.0 * dt;
        assert!(
            (moved - expected).abs() < 0.02,
            "packet center {moved:.4}, expected {expected:.4}"
        );
    }
}
