//! Constitutive closures: pressure law, caloric equation of state, entropy,
//! heat conductivity, and the two coupling profiles that tie the fluid to the
//! short-wave envelope.
//!
//! The gas is a γ-law fluid with a thermal correction,
//! p(ρ,θ) = a ρ^γ + δ θ p_θ(ρ), with p_θ(ρ) = p0 ρ^Γ. Internal energy splits
//! as e = P_e(ρ) + Q(θ) with P_e(ρ) = a ρ^{γ-1}/(γ-1) and Q(θ) = ∫₀^θ C_ϑ(z) dz,
//! so the Maxwell relation e_ρ = (p − θ p_θ')/ρ² holds identically; see
//! [`GasParams::maxwell_residual`] for the finite-difference check.
//! The heat capacity and conductivity take the concrete forms
//! C_ϑ(θ) = e1 (1 + θ^r) and κ(θ) = k1 (1 + θ^q); the remaining constants
//! (e2, k2) are the upper growth bounds used for validation only.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Material and scaling constants for one run. All fields are plain numbers
/// so a parameter set can be read from a config document, hashed, and echoed
/// into output manifests.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasParams {
    /// Coefficient of the elastic pressure a ρ^γ.
    pub a: f64,
    /// Adiabatic exponent, γ > 1.
    pub gamma: f64,
    /// Scale of the thermal pressure contribution δ θ p_θ(ρ).
    pub delta: f64,
    /// Bulk viscosity of the longitudinal velocity equation.
    pub epsilon: f64,
    /// Shear viscosity of the transverse velocity equation.
    pub mu: f64,
    /// Magnetic diffusivity.
    pub nu: f64,
    /// Magnetic permeability scale in front of the induction terms.
    pub beta: f64,
    /// Strength of the fluid/envelope coupling.
    pub alpha: f64,
    /// Growth exponent of the heat capacity, r ∈ [0,1].
    pub r: f64,
    /// Growth exponent of the heat conductivity, q ≥ 2 + 2r.
    pub q: f64,
    /// Lower heat-capacity constant; C_ϑ(θ) = e1 (1 + θ^r).
    pub e1: f64,
    /// Upper heat-capacity growth constant (validation bound, e2 ≥ e1).
    pub e2: f64,
    /// Lower conductivity constant; κ(θ) = k1 (1 + θ^q).
    pub k1: f64,
    /// Upper conductivity growth constant (validation bound, k2 ≥ k1).
    pub k2: f64,
    /// Coefficient of the thermal pressure density factor p_θ(ρ) = p0 ρ^Γ.
    pub p0: f64,
    /// Growth exponent of p_θ, 0 < Γ ≤ γ/2.
    pub big_gamma: f64,
}

impl Default for GasParams {
    fn default() -> Self {
        GasParams {
            a: 1.0,
            gamma: 2.0,
            delta: 1.0,
            epsilon: 0.1,
            mu: 1.0,
            nu: 1.0,
            beta: 0.0,
            alpha: 0.0,
            r: 1.0,
            q: 4.0,
            e1: 1.0,
            e2: 1.0,
            k1: 1.0,
            k2: 1.0,
            p0: 1.0,
            big_gamma: 1.0,
        }
    }
}

impl GasParams {
    /// Check every structural constraint, collecting all violations.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        let mut need = |ok: bool, msg: String| {
            if !ok {
                errs.push(msg);
            }
        };
        need(self.a > 0.0, format!("params.a must be > 0, got {}", self.a));
        need(
            self.gamma > 1.0,
            format!("params.gamma must be > 1, got {}", self.gamma),
        );
        need(
            (0.0..=1.0).contains(&self.r),
            format!("params.r must lie in [0,1], got {}", self.r),
        );
        need(
            self.q >= 2.0 + 2.0 * self.r,
            format!(
                "params.q must be >= 2 + 2r = {}, got {}",
                2.0 + 2.0 * self.r,
                self.q
            ),
        );
        need(
            self.e1 > 0.0 && self.e2 >= self.e1,
            format!(
                "heat capacity constants need 0 < e1 <= e2, got e1 = {}, e2 = {}",
                self.e1, self.e2
            ),
        );
        need(
            self.k1 > 0.0 && self.k2 >= self.k1,
            format!(
                "conductivity constants need 0 < k1 <= k2, got k1 = {}, k2 = {}",
                self.k1, self.k2
            ),
        );
        for (name, x) in [
            ("delta", self.delta),
            ("epsilon", self.epsilon),
            ("mu", self.mu),
            ("nu", self.nu),
            ("beta", self.beta),
            ("alpha", self.alpha),
            ("p0", self.p0),
        ] {
            need(
                x >= 0.0 && x.is_finite(),
                format!("params.{name} must be finite and >= 0, got {x}"),
            );
        }
        if self.delta > 0.0 && self.p0 > 0.0 {
            need(
                self.big_gamma > 0.0 && self.big_gamma <= self.gamma / 2.0,
                format!(
                    "params.big_gamma must lie in (0, gamma/2] = (0, {}], got {}",
                    self.gamma / 2.0,
                    self.big_gamma
                ),
            );
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }

    /// Exponent ϑ = (γ−1)/2: the sound speed scales like ρ^ϑ.
    pub fn sound_speed_exponent(&self) -> f64 {
        (self.gamma - 1.0) / 2.0
    }

    /// Exponent Λ = (3−γ)/(2(γ−1)) of the entropy-generating kernel.
    pub fn kernel_exponent(&self) -> f64 {
        (3.0 - self.gamma) / (2.0 * (self.gamma - 1.0))
    }

    /// Elastic sound speed √(a γ ρ^{γ−1}).
    pub fn sound_speed(&self, rho: f64) -> f64 {
        (self.a * self.gamma * rho.powf(self.gamma - 1.0)).sqrt()
    }

    /// Thermal pressure density factor p_θ(ρ) = p0 ρ^Γ.
    pub fn p_theta(&self, rho: f64) -> f64 {
        self.p0 * rho.powf(self.big_gamma)
    }

    /// Total pressure p = a ρ^γ + δ θ p_θ(ρ).
    pub fn pressure(&self, rho: f64, theta: f64) -> Result<f64> {
        if rho < 0.0 || theta < 0.0 || !rho.is_finite() || !theta.is_finite() {
            return Err(Error::Domain(format!(
                "pressure needs rho, theta >= 0, got rho = {rho}, theta = {theta}"
            )));
        }
        Ok(self.a * rho.powf(self.gamma) + self.delta * theta * self.p_theta(rho))
    }

    /// Elastic potential P_e(ρ) = a ρ^{γ−1}/(γ−1) (per unit mass).
    pub fn elastic_energy(&self, rho: f64) -> f64 {
        self.a * rho.powf(self.gamma - 1.0) / (self.gamma - 1.0)
    }

    /// Heat capacity C_ϑ(θ) = e1 (1 + θ^r).
    pub fn heat_capacity(&self, theta: f64) -> f64 {
        self.e1 * (1.0 + theta.powf(self.r))
    }

    /// Thermal energy Q(θ) = ∫₀^θ C_ϑ(z) dz = e1 (θ + θ^{1+r}/(1+r)).
    pub fn heat_integral(&self, theta: f64) -> f64 {
        self.e1 * (theta + theta.powf(1.0 + self.r) / (1.0 + self.r))
    }

    /// Specific internal energy e(ρ,θ) = P_e(ρ) + Q(θ).
    pub fn internal_energy(&self, rho: f64, theta: f64) -> Result<f64> {
        if rho < 0.0 || theta < 0.0 || !rho.is_finite() || !theta.is_finite() {
            return Err(Error::Domain(format!(
                "internal_energy needs rho, theta >= 0, got rho = {rho}, theta = {theta}"
            )));
        }
        Ok(self.elastic_energy(rho) + self.heat_integral(theta))
    }

    /// Specific entropy s(ρ,θ) = ∫₁^θ C_ϑ(z)/z dz − δ ∫₁^ρ p_θ(z)/z² dz.
    ///
    /// The thermal-pressure part carries the same δ factor as the pressure
    /// law, so that θ ds = de + p d(1/ρ) holds exactly for this system and
    /// the entropy balance of a viscous trajectory is sign-definite. With
    /// the defaults (e1 = 1, r = 1, p0 = 1, Γ = 1, δ = 1) this reduces to
    /// ln θ + θ − 1 − ln ρ.
    pub fn entropy(&self, rho: f64, theta: f64) -> Result<f64> {
        if rho <= 0.0 || theta <= 0.0 || !rho.is_finite() || !theta.is_finite() {
            return Err(Error::Domain(format!(
                "entropy needs rho, theta > 0, got rho = {rho}, theta = {theta}"
            )));
        }
        let thermal = if self.r < 1e-12 {
            2.0 * self.e1 * theta.ln()
        } else {
            self.e1 * (theta.ln() + (theta.powf(self.r) - 1.0) / self.r)
        };
        let dens = if (self.big_gamma - 1.0).abs() < 1e-12 {
            self.p0 * rho.ln()
        } else {
            self.p0 * (rho.powf(self.big_gamma - 1.0) - 1.0) / (self.big_gamma - 1.0)
        };
        Ok(thermal - self.delta * dens)
    }

    /// Heat conductivity κ(θ) = k1 (1 + θ^q).
    pub fn heat_conductivity(&self, theta: f64) -> f64 {
        self.k1 * (1.0 + theta.powf(self.q))
    }

    /// Conductivity primitive 𝒦(θ) = ∫₀^θ κ(z) dz = k1 (θ + θ^{q+1}/(q+1)).
    pub fn kappa_primitive(&self, theta: f64) -> f64 {
        self.k1 * (theta + theta.powf(self.q + 1.0) / (self.q + 1.0))
    }

    /// Relative residual of the Maxwell relation e_ρ = (p − θ ∂_θ p)/ρ²,
    /// with e_ρ approximated by a centered difference of step `h`.
    pub fn maxwell_residual(&self, rho: f64, theta: f64, h: f64) -> Result<f64> {
        if rho <= h || theta < 0.0 {
            return Err(Error::Domain(format!(
                "maxwell_residual needs rho > h and theta >= 0, got rho = {rho}, theta = {theta}"
            )));
        }
        let e_plus = self.internal_energy(rho + h, theta)?;
        let e_minus = self.internal_energy(rho - h, theta)?;
        let fd = (e_plus - e_minus) / (2.0 * h);
        let p = self.pressure(rho, theta)?;
        let dp_dtheta = self.delta * self.p_theta(rho);
        let exact = (p - theta * dp_dtheta) / (rho * rho);
        let scale = fd.abs().max(exact.abs()).max(1e-300);
        Ok((fd - exact).abs() / scale)
    }
}

type ScalarFn3 = Arc<dyn Fn(f64) -> (f64, f64, f64) + Send + Sync>;
type ScalarFn2 = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

/// The two coupling profiles: g acts on the specific volume, h on the local
/// envelope intensity |ψ|². Both are injectable so alternative shapes can be
/// swapped in; the defaults are a quintic smoothstep for g (constant outside
/// [g_lo, g_hi], so g' is compactly supported away from vacuum) and, for h,
/// the integral of the bump (1 − (z/h_max)²)² (so h' is compactly supported
/// in [0, h_max] and h saturates at 8 h_max/15).
#[derive(Clone)]
pub struct CouplingFns {
    g: ScalarFn3,
    h: ScalarFn2,
    /// Support of g' (g is constant outside this interval).
    pub g_support: (f64, f64),
    /// Support of h' is [0, h_support].
    pub h_support: f64,
}

impl std::fmt::Debug for CouplingFns {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CouplingFns")
            .field("g_support", &self.g_support)
            .field("h_support", &self.h_support)
            .finish()
    }
}

/// Values of the coupling profiles and their derivatives at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingEval {
    pub g: f64,
    pub g_d1: f64,
    pub g_d2: f64,
    pub h: f64,
    pub h_d1: f64,
}

impl CouplingFns {
    /// Default profiles with g rising over [g_lo, g_hi] and h saturating at
    /// h_max.
    pub fn smoothstep(g_lo: f64, g_hi: f64, h_max: f64) -> Result<Self> {
        if !(g_lo > 0.0 && g_hi > g_lo && h_max > 0.0) {
            return Err(Error::Domain(format!(
                "coupling supports need 0 < g_lo < g_hi and h_max > 0, got ({g_lo}, {g_hi}, {h_max})"
            )));
        }
        let width = g_hi - g_lo;
        let g = move |v: f64| -> (f64, f64, f64) {
            let t = ((v - g_lo) / width).clamp(0.0, 1.0);
            // quintic smoothstep: C^2 at both knots
            let s = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
            let s1 = 30.0 * t * t * (1.0 - t) * (1.0 - t);
            let s2 = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
            (s, s1 / width, s2 / (width * width))
        };
        let h = move |z: f64| -> (f64, f64) {
            if z >= h_max {
                (8.0 * h_max / 15.0, 0.0)
            } else {
                let c2 = h_max * h_max;
                let val = z - 2.0 * z.powi(3) / (3.0 * c2) + z.powi(5) / (5.0 * c2 * c2);
                let w = 1.0 - z * z / c2;
                (val, w * w)
            }
        };
        Ok(CouplingFns {
            g: Arc::new(g),
            h: Arc::new(h),
            g_support: (g_lo, g_hi),
            h_support: h_max,
        })
    }

    /// Inject custom profiles. `g` returns (g, g', g''), `h` returns (h, h').
    pub fn custom(
        g: ScalarFn3,
        h: ScalarFn2,
        g_support: (f64, f64),
        h_support: f64,
    ) -> Self {
        CouplingFns {
            g,
            h,
            g_support,
            h_support,
        }
    }

    pub fn g(&self, v: f64) -> (f64, f64, f64) {
        (self.g)(v)
    }

    pub fn h(&self, z: f64) -> (f64, f64) {
        (self.h)(z)
    }
}

impl Default for CouplingFns {
    fn default() -> Self {
        CouplingFns::smoothstep(0.25, 4.0, 4.0).expect("default supports are valid")
    }
}

/// Evaluate both coupling profiles at a state (v = specific volume,
/// z = envelope intensity |ψ|²).
pub fn coupling_eval(v: f64, z: f64, fns: &CouplingFns) -> Result<CouplingEval> {
    if v < 0.0 || z < 0.0 || !v.is_finite() || !z.is_finite() {
        return Err(Error::Domain(format!(
            "coupling_eval needs v, z >= 0, got v = {v}, z = {z}"
        )));
    }
    let (g, g_d1, g_d2) = fns.g(v);
    let (h, h_d1) = fns.h(z);
    Ok(CouplingEval {
        g,
        g_d1,
        g_d2,
        h,
        h_d1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p() -> GasParams {
        GasParams::default()
    }

    #[test]
    fn pressure_hand_values() {
        let mut gp = p();
        gp.delta = 0.1;
        // a rho^gamma + delta theta rho = 4 + 0.1 * 1 * 2
        assert_abs_diff_eq!(gp.pressure(2.0, 1.0).unwrap(), 4.2, epsilon = 1e-15);
        gp.delta = 0.0;
        assert_abs_diff_eq!(gp.pressure(1.0, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert!(gp.pressure(-1.0, 1.0).is_err());
    }

    #[test]
    fn internal_energy_hand_values() {
        // P_e(1) = 1/(gamma-1) = 1, Q(1) = 1 + 1/2 = 1.5
        assert_abs_diff_eq!(p().internal_energy(1.0, 1.0).unwrap(), 2.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p().heat_integral(1.0), 1.5, epsilon = 1e-15);
    }

    #[test]
    fn entropy_hand_values() {
        // defaults give s = ln theta + theta - 1 - ln rho
        let gp = p();
        assert_abs_diff_eq!(gp.entropy(1.0, 1.0).unwrap(), 0.0, epsilon = 1e-15);
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(gp.entropy(e, 1.0).unwrap(), -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(gp.entropy(1.0, e).unwrap(), e, epsilon = 1e-14);
        assert!(gp.entropy(0.0, 1.0).is_err());
    }

    #[test]
    fn entropy_r_zero_limit() {
        let mut gp = p();
        gp.r = 0.0;
        gp.q = 2.0;
        // C_v = 2 e1 constant, so the thermal part is 2 e1 ln theta
        assert_abs_diff_eq!(gp.entropy(1.0, 2.0).unwrap(), 2.0 * 2.0f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn conductivity_hand_values() {
        assert_abs_diff_eq!(p().heat_conductivity(1.0), 2.0, epsilon = 1e-15);
        // K(1) = k1 (1 + 1/(q+1)) = 1.2 for q = 4
        assert_abs_diff_eq!(p().kappa_primitive(1.0), 1.2, epsilon = 1e-15);
    }

    #[test]
    fn maxwell_relation_on_grid() {
        let gp = p();
        for i in 0..20 {
            for j in 0..20 {
                let rho = 0.5 + 2.5 * (i as f64) / 19.0;
                let theta = 0.5 + 2.5 * (j as f64) / 19.0;
                let res = gp.maxwell_residual(rho, theta, 1e-5).unwrap();
                assert!(res <= 1e-6, "residual {res:.3e} at ({rho}, {theta})");
            }
        }
    }

    #[test]
    fn entropy_monotone() {
        let gp = p();
        let mut prev_in_theta = f64::NEG_INFINITY;
        for j in 1..40 {
            let s = gp.entropy(1.3, 0.1 * j as f64).unwrap();
            assert!(s > prev_in_theta);
            prev_in_theta = s;
        }
        let mut prev_in_rho = f64::INFINITY;
        for i in 1..40 {
            let s = gp.entropy(0.1 * i as f64, 1.3).unwrap();
            assert!(s < prev_in_rho);
            prev_in_rho = s;
        }
    }

    #[test]
    fn coupling_default_shape() {
        let fns = CouplingFns::default();
        let at = |v: f64| coupling_eval(v, 0.0, &fns).unwrap();
        assert_eq!(at(0.0).g, 0.0);
        assert_eq!(at(0.25).g, 0.0);
        assert_abs_diff_eq!(at(4.0).g, 1.0, epsilon = 1e-15);
        assert_eq!(at(7.0).g, 1.0);
        assert_eq!(at(0.1).g_d1, 0.0);
        assert_eq!(at(5.0).g_d1, 0.0);
        assert!(at(1.0).g_d1 > 0.0);

        let hz = |z: f64| coupling_eval(1.0, z, &fns).unwrap();
        assert_eq!(hz(0.0).h, 0.0);
        assert_abs_diff_eq!(hz(0.0).h_d1, 1.0, epsilon = 1e-15);
        // h(1) = 1 - 2/(3*16) + 1/(5*256)
        assert_abs_diff_eq!(hz(1.0).h, 1.0 - 2.0 / 48.0 + 1.0 / 1280.0, epsilon = 1e-15);
        assert_abs_diff_eq!(hz(4.0).h, 32.0 / 15.0, epsilon = 1e-15);
        assert_eq!(hz(6.0).h, 32.0 / 15.0);
        assert_eq!(hz(4.0).h_d1, 0.0);
        assert!(coupling_eval(-0.5, 0.0, &fns).is_err());
    }

    #[test]
    fn coupling_c2_at_knots() {
        // second derivative of g stays continuous across both knots
        let fns = CouplingFns::default();
        let d = 1e-7;
        for knot in [0.25, 4.0] {
            let lo = fns.g(knot - d).2;
            let hi = fns.g(knot + d).2;
            assert!((lo - hi).abs() < 1e-4, "g'' jump at {knot}: {lo} vs {hi}");
        }
        // h' vanishes to second order at the saturation point
        let (_, d1) = fns.h(4.0 - 1e-6);
        assert!(d1 < 1e-11);
    }

    #[test]
    fn validation_collects_all() {
        let mut gp = p();
        gp.gamma = 0.5;
        gp.q = 1.0;
        gp.e2 = 0.0;
        match gp.validate() {
            Err(Error::Validation(v)) => assert!(v.len() >= 3, "got {v:?}"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn derived_exponents() {
        let gp = p();
        assert_abs_diff_eq!(gp.sound_speed_exponent(), 0.5);
        assert_abs_diff_eq!(gp.kernel_exponent(), 0.5);
        assert_abs_diff_eq!(gp.sound_speed(1.0), 2.0f64.sqrt(), epsilon = 1e-15);
    }
}
