//! Lagrangian mass coordinate y(x) = ∫₀ˣ ρ₀ dξ and its inverse.
//!
//! The PDE system is integrated on the mass interval (0, d) with
//! d = ∫₀¹ ρ₀ dx; positive density makes y strictly increasing, so the
//! change of variables is a bijection and dy = ρ dx. Specific volume in the
//! new variable is v(y) = 1/ρ(x(y)). Both directions of the map are
//! represented as monotone cubic Hermite interpolants (Fritsch–Carlson
//! tangents), which preserve strict monotonicity of the data and converge at
//! second order in the grid spacing for the Jacobian.

use crate::error::{Error, Result};

/// Monotonicity-preserving cubic Hermite interpolant on sorted knots.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    tangents: Vec<f64>,
}

impl MonotoneCubic {
    /// Fritsch–Carlson construction; requires strictly increasing `xs`.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::Shape {
                what: "interpolation knots",
                expected: xs.len(),
                got: ys.len(),
            });
        }
        if xs.len() < 2 {
            return Err(Error::Domain("interpolation needs at least two knots".into()));
        }
        let n = xs.len();
        for i in 1..n {
            if xs[i] <= xs[i - 1] {
                return Err(Error::Domain(format!(
                    "interpolation abscissae must increase strictly (index {i})"
                )));
            }
        }
        let mut secants = vec![0.0; n - 1];
        for i in 0..n - 1 {
            secants[i] = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        }
        let mut tangents = vec![0.0; n];
        tangents[0] = secants[0];
        tangents[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            if secants[i - 1] * secants[i] <= 0.0 {
                tangents[i] = 0.0;
            } else {
                tangents[i] = 0.5 * (secants[i - 1] + secants[i]);
            }
        }
        // clamp tangents into the monotonicity region |(α, β)| ≤ 3
        for i in 0..n - 1 {
            if secants[i] == 0.0 {
                tangents[i] = 0.0;
                tangents[i + 1] = 0.0;
                continue;
            }
            let alpha = tangents[i] / secants[i];
            let beta = tangents[i + 1] / secants[i];
            let s = alpha * alpha + beta * beta;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                tangents[i] = tau * alpha * secants[i];
                tangents[i + 1] = tau * beta * secants[i];
            }
        }
        Ok(MonotoneCubic { xs, ys, tangents })
    }

    fn segment(&self, x: f64) -> usize {
        // clamp to the boundary segments; extrapolation is linearized there
        match self.xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.xs.len() - 2),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.tangents[i] + h01 * self.ys[i + 1]
            + h11 * h * self.tangents[i + 1]
    }

    pub fn eval_deriv(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let dh00 = (6.0 * t2 - 6.0 * t) / h;
        let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
        let dh01 = (-6.0 * t2 + 6.0 * t) / h;
        let dh11 = 3.0 * t2 - 2.0 * t;
        dh00 * self.ys[i] + dh10 * self.tangents[i] + dh01 * self.ys[i + 1]
            + dh11 * self.tangents[i + 1]
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }
}

/// Bijective change of variables between physical space x ∈ [0,1] and mass
/// coordinate y ∈ [0,d].
#[derive(Debug, Clone)]
pub struct MassMap {
    pub x_nodes: Vec<f64>,
    /// Cumulative mass y(x_i) (trapezoid rule), y_0 = 0.
    pub y_values: Vec<f64>,
    pub total_mass: f64,
    pub rho_nodes: Vec<f64>,
    forward: MonotoneCubic,
    inverse: MonotoneCubic,
}

impl MassMap {
    /// Build from density samples on strictly increasing physical nodes.
    /// Density at or below `rho_min` is treated as vacuum and rejected.
    pub fn build(x_nodes: Vec<f64>, rho_nodes: Vec<f64>, rho_min: f64) -> Result<Self> {
        if x_nodes.len() != rho_nodes.len() {
            return Err(Error::Shape {
                what: "density samples",
                expected: x_nodes.len(),
                got: rho_nodes.len(),
            });
        }
        for (&x, &r) in x_nodes.iter().zip(&rho_nodes) {
            if !r.is_finite() || r <= rho_min {
                return Err(Error::Vacuum {
                    location: x,
                    value: r,
                    floor: rho_min,
                });
            }
        }
        let n = x_nodes.len();
        let mut y_values = vec![0.0; n];
        for i in 1..n {
            let h = x_nodes[i] - x_nodes[i - 1];
            y_values[i] = y_values[i - 1] + 0.5 * h * (rho_nodes[i] + rho_nodes[i - 1]);
        }
        let total_mass = y_values[n - 1];
        let forward = MonotoneCubic::new(x_nodes.clone(), y_values.clone())?;
        let inverse = MonotoneCubic::new(y_values.clone(), x_nodes.clone())?;
        Ok(MassMap {
            x_nodes,
            y_values,
            total_mass,
            rho_nodes,
            forward,
            inverse,
        })
    }

    /// Sample a density profile on a uniform grid of `cells` intervals.
    pub fn from_profile<F: Fn(f64) -> f64>(cells: usize, rho: F, rho_min: f64) -> Result<Self> {
        let xs: Vec<f64> = (0..=cells).map(|i| i as f64 / cells as f64).collect();
        let rhos: Vec<f64> = xs.iter().map(|&x| rho(x)).collect();
        Self::build(xs, rhos, rho_min)
    }

    /// y(x), the mass of fluid to the left of x.
    pub fn to_mass(&self, x: f64) -> f64 {
        self.forward.eval(x)
    }

    /// x(y), the physical position holding mass y to its left.
    pub fn to_physical(&self, y: f64) -> f64 {
        self.inverse.eval(y)
    }

    /// dy/dx = ρ(x) recovered from the interpolant.
    pub fn jacobian(&self, x: f64) -> f64 {
        self.forward.eval_deriv(x)
    }

    /// Transplant an Eulerian profile f(x) to mass coordinates: f(x(y)).
    pub fn pull_to_mass<F: Fn(f64) -> f64>(&self, f: F, y_pts: &[f64]) -> Vec<f64> {
        y_pts.iter().map(|&y| f(self.to_physical(y))).collect()
    }

    /// Specific volume in mass coordinates, v(y) = 1/ρ(x(y)).
    pub fn specific_volume(&self, y_pts: &[f64]) -> Vec<f64> {
        y_pts
            .iter()
            .map(|&y| 1.0 / self.forward.eval_deriv(self.to_physical(y)).max(f64::MIN_POSITIVE))
            .collect()
    }
}

/// Reconstruct the physical positions x(y) = ∫₀ʸ v dy′ from nodal specific
/// volume in mass coordinates (the reverse transplant used when comparing a
/// mass-coordinate solution against an Eulerian reference).
pub fn positions_from_specific_volume(y_nodes: &[f64], v_nodes: &[f64]) -> Result<MonotoneCubic> {
    if y_nodes.len() != v_nodes.len() {
        return Err(Error::Shape {
            what: "specific volume samples",
            expected: y_nodes.len(),
            got: v_nodes.len(),
        });
    }
    for (&y, &v) in y_nodes.iter().zip(v_nodes) {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::Vacuum {
                location: y,
                value: v,
                floor: 0.0,
            });
        }
    }
    let n = y_nodes.len();
    let mut xs = vec![0.0; n];
    for i in 1..n {
        let h = y_nodes[i] - y_nodes[i - 1];
        xs[i] = xs[i - 1] + 0.5 * h * (v_nodes[i] + v_nodes[i - 1]);
    }
    MonotoneCubic::new(y_nodes.to_vec(), xs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn smooth_rho(x: f64) -> f64 {
        1.0 + 0.2 * (2.0 * std::f64::consts::PI * x).cos()
    }

    #[test]
    fn jacobian_recovers_density_second_order() {
        // midpoint Jacobian error should shrink ~4x per refinement
        let errs: Vec<f64> = [64usize, 128, 256]
            .iter()
            .map(|&n| {
                let map = MassMap::from_profile(n, smooth_rho, 1e-10).unwrap();
                let mut worst: f64 = 0.0;
                for i in 0..n {
                    let x = (i as f64 + 0.5) / n as f64;
                    worst = worst.max((map.jacobian(x) - smooth_rho(x)).abs());
                }
                worst
            })
            .collect();
        assert!(errs[0] / errs[1] > 3.0, "first refinement ratio {}", errs[0] / errs[1]);
        assert!(errs[1] / errs[2] > 3.0, "second refinement ratio {}", errs[1] / errs[2]);
    }

    #[test]
    fn round_trip_is_tight_at_moderate_resolution() {
        let map = MassMap::from_profile(256, smooth_rho, 1e-10).unwrap();
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            let back = map.to_physical(map.to_mass(x));
            assert!(
                (back - x).abs() <= 1e-6,
                "round trip drift {} at x = {x}",
                (back - x).abs()
            );
        }
    }

    #[test]
    fn vacuum_is_rejected_not_clamped() {
        let err = MassMap::from_profile(64, |x| 1.0 - x, 1e-10).unwrap_err();
        match err {
            Error::Vacuum { location, .. } => assert_abs_diff_eq!(location, 1.0, epsilon = 1e-12),
            other => panic!("expected vacuum error, got {other}"),
        }
    }

    #[test]
    fn total_mass_matches_quadrature() {
        let map = MassMap::from_profile(512, smooth_rho, 1e-10).unwrap();
        // ∫(1 + 0.2 cos 2πx) dx = 1 exactly
        assert_abs_diff_eq!(map.total_mass, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn specific_volume_is_reciprocal_density() {
        let map = MassMap::from_profile(256, smooth_rho, 1e-10).unwrap();
        let ys = [0.1, 0.37, 0.5, 0.82];
        let vs = map.specific_volume(&ys);
        for (&y, &v) in ys.iter().zip(&vs) {
            let x = map.to_physical(y);
            assert_abs_diff_eq!(v, 1.0 / smooth_rho(x), epsilon = 1e-4);
        }
    }

    #[test]
    fn positions_invert_the_mass_map() {
        let map = MassMap::from_profile(256, smooth_rho, 1e-10).unwrap();
        let ys: Vec<f64> = (0..=256).map(|i| i as f64 * map.total_mass / 256.0).collect();
        let vs = map.specific_volume(&ys);
        let pos = positions_from_specific_volume(&ys, &vs).unwrap();
        for &y in &[0.15, 0.5, 0.9] {
            assert_abs_diff_eq!(pos.eval(y), map.to_physical(y), epsilon = 1e-4);
        }
    }

    proptest! {
        #[test]
        fn map_is_monotone_for_positive_density(amp in 0.0..0.9f64, phase in 0.0..6.28f64) {
            let map = MassMap::from_profile(
                64,
                |x| 1.0 + amp * (2.0 * std::f64::consts::PI * x + phase).sin(),
                1e-10,
            ).unwrap();
            let mut prev = -1.0;
            for i in 0..=200 {
                let y = map.to_mass(i as f64 / 200.0);
                prop_assert!(y > prev);
                prev = y;
            }
        }
    }
}
