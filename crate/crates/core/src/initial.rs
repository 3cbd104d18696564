//! Initial-data library.
//!
//! Profiles are specified in physical space where that is natural (the
//! density, via its cumulative mass) and in the mass coordinate
//! otherwise. The density transplant inverts the closed-form cumulative
//! mass Y(x) = ∫₀ˣ ρ₀ by Newton iteration at every collocation node, so the
//! nodal volume is exact to round-off at every resolution and coarse runs
//! are strict truncations of fine ones. Spectral coefficients of the other
//! fields are analyzed on a fixed fine grid, independent of the run's own
//! resolution, for the same reason.
//!
//! All profiles carry unit total mass on the unit interval, keep the fluid
//! away from vacuum, and respect the wall conditions by construction.

use crate::error::{Error, Result};
use crate::galerkin::GalerkinState;
use crate::spectral::Basis;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Fixed analysis resolution for projecting non-polynomial profiles.
const ANALYSIS_MODES: usize = 256;
const ANALYSIS_POINTS: usize = 2 * ANALYSIS_MODES + 1;

/// Named initial profiles.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// Smoothly perturbed fluid with gentle transverse fields and a
    /// multi-mode envelope; the default working profile. The density
    /// perturbation is cosine-phased so the transplanted volume has
    /// vanishing odd derivatives at the walls, keeping every field inside
    /// the smooth class of the mixed basis.
    SmoothPeriodic {
        /// Density perturbation amplitude (default 0.2).
        fluid: f64,
        /// Longitudinal velocity amplitude (default 0.08).
        velocity: f64,
        /// Temperature perturbation amplitude (default 0.06).
        thermal: f64,
        /// Transverse velocity amplitude (default 0.015).
        transverse_velocity: f64,
        /// Transverse field amplitude (default 0.015).
        transverse_field: f64,
        /// Envelope amplitude (default 0.15).
        envelope: f64,
        /// Amplitude of a compact fine-scale packet in the transverse
        /// velocity, centered on mode 13 with Gaussian width 2 (default
        /// 0.04). Its fast viscous decay exercises the energy transfer
        /// between kinetic and thermal channels on the integrator's own
        /// timescale.
        fine_scale: f64,
    },
    /// Fluid at rest with a localized envelope pulse.
    GaussianEnvelope {
        center: f64,
        width: f64,
        amplitude: f64,
    },
    /// Small single-mode perturbation of the rest state.
    NearConstant { scale: f64 },
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::SmoothPeriodic {
            fluid: 0.2,
            velocity: 0.08,
            thermal: 0.06,
            transverse_velocity: 0.015,
            transverse_field: 0.015,
            envelope: 0.15,
            fine_scale: 0.04,
        }
    }
}

/// Center mode of the fine-scale transverse packet.
const PACKET_CENTER: f64 = 13.0;
/// Gaussian width (in mode index) of the fine-scale packet.
const PACKET_WIDTH: f64 = 2.0;
/// Modes carrying the packet; chosen to stay within a 16-mode truncation
/// so coarse and fine discretizations start from the same state.
const PACKET_BAND: std::ops::RangeInclusive<usize> = 9..=16;

/// Sine-mode shapes of the smooth-periodic family (mode k carries
/// amplitude·shape[k-1]). Shared between the spectral build and the
/// closed-form evaluation so the two agree to round-off.
const U_SHAPE: [f64; 3] = [1.0, -0.6, 0.25];
const W0_SHAPE: [f64; 3] = [1.0, 0.0, -0.4];
const W1_SHAPE: [f64; 2] = [0.0, 0.8];
const H0_SHAPE: [f64; 3] = [1.0, 0.0, 0.4];
const H1_SHAPE: [f64; 2] = [0.0, -0.7];
const PSI_SHAPE: [(f64, f64); 3] = [(1.0, 0.25), (-0.35, 0.15), (0.1, 0.2)];

fn packet_coefficient(k: usize) -> f64 {
    let arg = (k as f64 - PACKET_CENTER) / PACKET_WIDTH;
    (-arg * arg).exp()
}

fn eval_shape(amplitude: f64, shape: &[f64], y: f64) -> f64 {
    shape
        .iter()
        .enumerate()
        .map(|(k0, &s)| amplitude * s * ((k0 + 1) as f64 * PI * y).sin())
        .sum()
}

/// Pointwise initial data of the inviscid limit system at one physical
/// point: density, longitudinal velocity, and transverse velocity. Fields
/// specified in the mass coordinate are transplanted through the closed-form
/// cumulative mass, so the values agree with the spectral build wherever the
/// truncation holds all the profile's modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitProfile {
    pub rho: f64,
    pub u: f64,
    pub w: [f64; 2],
}

impl InitialData {
    /// Parse a profile name, with default parameters.
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "smooth-periodic" => Ok(InitialData::default()),
            "gaussian-envelope" | "gaussian-psi" => Ok(InitialData::GaussianEnvelope {
                center: 0.5,
                width: 0.12,
                amplitude: 0.5,
            }),
            "near-constant" => Ok(InitialData::NearConstant { scale: 0.01 }),
            other => Err(Error::Domain(format!(
                "unknown initial profile '{other}' \
                 (expected smooth-periodic, gaussian-envelope, or near-constant)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InitialData::SmoothPeriodic { .. } => "smooth-periodic",
            InitialData::GaussianEnvelope { .. } => "gaussian-envelope",
            InitialData::NearConstant { .. } => "near-constant",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        match self {
            InitialData::SmoothPeriodic { fluid, fine_scale, .. } => {
                // richness factors sum to 1.4; keep the density above 0.1
                if !(*fluid >= 0.0 && *fluid < 0.64) {
                    problems.push(format!(
                        "fluid amplitude must lie in [0, 0.64) to keep the density \
                         positive, got {fluid}"
                    ));
                }
                if !(fine_scale.abs() < 0.5) {
                    problems.push(format!(
                        "fine-scale packet amplitude must stay below 0.5, got {fine_scale}"
                    ));
                }
            }
            InitialData::GaussianEnvelope { center, width, .. } => {
                if !(*center > 0.0 && *center < 1.0) {
                    problems.push(format!("pulse center must lie inside (0,1), got {center}"));
                }
                if !(*width > 0.0) {
                    problems.push(format!("pulse width must be positive, got {width}"));
                }
            }
            InitialData::NearConstant { scale } => {
                if !(scale.abs() < 0.5) {
                    problems.push(format!(
                        "near-constant scale must stay below 0.5, got {scale}"
                    ));
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }

    /// Whether the profile carries a nonzero transverse field (which
    /// requires a positive magnetic coefficient in the parameters).
    pub fn has_transverse_field(&self) -> bool {
        matches!(
            self,
            InitialData::SmoothPeriodic { transverse_field, .. } if *transverse_field != 0.0
        )
    }

    /// Build the coefficient-space state on the given basis.
    pub fn build(&self, basis: &Basis) -> Result<GalerkinState> {
        self.validate()?;
        let n = basis.modes;
        let mut state = GalerkinState::quiescent(n, basis.points);
        match *self {
            InitialData::SmoothPeriodic {
                fluid,
                velocity,
                thermal,
                transverse_velocity,
                transverse_field,
                envelope,
                fine_scale,
            } => {
                for (i, &y) in basis.nodes.iter().enumerate() {
                    let x = invert_cumulative_mass(fluid, y);
                    state.v_nodes[i] = 1.0 / density(fluid, x);
                }
                set_sine(&mut state.u, velocity, &U_SHAPE);
                set_sine(&mut state.w[0], transverse_velocity, &W0_SHAPE);
                set_sine(&mut state.w[1], transverse_velocity, &W1_SHAPE);
                for k in PACKET_BAND {
                    if k <= n {
                        state.w[0][k - 1] += fine_scale * packet_coefficient(k);
                    }
                }
                set_sine(&mut state.h[0], transverse_field, &H0_SHAPE);
                set_sine(&mut state.h[1], transverse_field, &H1_SHAPE);
                if n >= 1 {
                    state.theta[1] = thermal;
                }
                if n >= 2 {
                    state.theta[2] = 0.5 * thermal;
                }
                if n >= 3 {
                    state.theta[3] = -0.25 * thermal;
                }
                for (k0, &(re, im)) in PSI_SHAPE.iter().enumerate() {
                    if k0 < n {
                        state.psi[k0] = envelope * Complex64::new(re, im);
                    }
                }
            }
            InitialData::GaussianEnvelope {
                center,
                width,
                amplitude,
            } => {
                // windowed pulse: sin(πy) keeps the wall values exactly zero
                let fine = Basis::new(ANALYSIS_MODES, ANALYSIS_POINTS)?;
                let profile: Vec<Complex64> = fine
                    .nodes
                    .iter()
                    .map(|&y| {
                        let arg = (y - center) / width;
                        Complex64::new(
                            amplitude * (PI * y).sin() * (-0.5 * arg * arg).exp(),
                            0.0,
                        )
                    })
                    .collect();
                let co = fine.sine_analyze_c(&profile, n.min(ANALYSIS_MODES))?;
                state.psi[..co.len()].copy_from_slice(&co);
            }
            InitialData::NearConstant { scale } => {
                if n >= 1 {
                    state.u[0] = scale;
                    state.theta[1] = scale;
                    state.psi[0] = Complex64::new(scale, 0.0);
                }
            }
        }
        Ok(state)
    }

    /// Closed-form fluid and transverse initial data at a physical point
    /// x ∈ [0, 1], for seeding the inviscid limit solvers. Velocities are
    /// evaluated at the mass coordinate Y(x), the exact cumulative mass of
    /// the density profile, so they match the spectral state pointwise. The
    /// fine-scale packet is included in full; truncations below its top mode
    /// drop the tail.
    pub fn limit_profile(&self, x: f64) -> Result<LimitProfile> {
        self.validate()?;
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!(
                "limit profile is defined on [0, 1], got x = {x}"
            )));
        }
        Ok(match *self {
            InitialData::SmoothPeriodic {
                fluid,
                velocity,
                transverse_velocity,
                fine_scale,
                ..
            } => {
                let y = cumulative_mass(fluid, x);
                let mut w0 = eval_shape(transverse_velocity, &W0_SHAPE, y);
                for k in PACKET_BAND {
                    w0 += fine_scale * packet_coefficient(k) * (k as f64 * PI * y).sin();
                }
                LimitProfile {
                    rho: density(fluid, x),
                    u: eval_shape(velocity, &U_SHAPE, y),
                    w: [w0, eval_shape(transverse_velocity, &W1_SHAPE, y)],
                }
            }
            InitialData::GaussianEnvelope { .. } => LimitProfile {
                rho: 1.0,
                u: 0.0,
                w: [0.0, 0.0],
            },
            InitialData::NearConstant { scale } => LimitProfile {
                rho: 1.0,
                u: scale * (PI * x).sin(),
                w: [0.0, 0.0],
            },
        })
    }
}

/// Density profile of the smooth-periodic family: unit mean plus a
/// cosine-phased perturbation with fixed overtone richness.
fn density(amplitude: f64, x: f64) -> f64 {
    1.0 + amplitude
        * ((2.0 * PI * x).cos() + 0.3 * (4.0 * PI * x).cos() + 0.1 * (6.0 * PI * x).cos())
}

/// Cumulative mass Y(x) = ∫₀ˣ ρ₀; closed form of the profile above.
fn cumulative_mass(amplitude: f64, x: f64) -> f64 {
    x + amplitude / (2.0 * PI)
        * ((2.0 * PI * x).sin()
            + 0.15 * (4.0 * PI * x).sin()
            + (0.1 / 3.0) * (6.0 * PI * x).sin())
}

/// Solve Y(x) = y for x by guarded Newton iteration. Y' = ρ₀ ≥ 1 − 1.4·A > 0
/// keeps the map strictly monotone for admissible amplitudes.
fn invert_cumulative_mass(amplitude: f64, y: f64) -> f64 {
    let mut x = y;
    for _ in 0..60 {
        let f = cumulative_mass(amplitude, x) - y;
        let step = f / density(amplitude, x);
        x -= step;
        x = x.clamp(0.0, 1.0);
        if step.abs() < 1e-15 {
            break;
        }
    }
    x
}

fn set_sine(co: &mut [f64], amplitude: f64, shape: &[f64]) {
    for (k0, &s) in shape.iter().enumerate() {
        if k0 < co.len() {
            co[k0] = amplitude * s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mass_transplant_is_exact_at_the_nodes() {
        let basis = Basis::new(16, 33).unwrap();
        let data = InitialData::default();
        let state = data.build(&basis).unwrap();
        // each nodal volume matches the density at the inverted point
        for (i, &y) in basis.nodes.iter().enumerate() {
            let x = invert_cumulative_mass(0.2, y);
            assert_abs_diff_eq!(cumulative_mass(0.2, x), y, epsilon = 1e-13);
            assert_abs_diff_eq!(state.v_nodes[i] * density(0.2, x), 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn transplanted_volume_has_unit_physical_length() {
        // ∫ v dy = ∫ dx = 1 because the total mass is one
        let basis = Basis::new(64, 129).unwrap();
        let state = InitialData::default().build(&basis).unwrap();
        let mean: f64 = state.v_nodes.iter().sum::<f64>() / state.v_nodes.len() as f64;
        assert_abs_diff_eq!(mean, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn coarse_coefficients_nest_inside_fine_ones() {
        let coarse = InitialData::default()
            .build(&Basis::new(8, 17).unwrap())
            .unwrap();
        let fine = InitialData::default()
            .build(&Basis::new(32, 65).unwrap())
            .unwrap();
        for k in 0..8 {
            assert_eq!(coarse.u[k], fine.u[k]);
            assert_eq!(coarse.psi[k], fine.psi[k]);
            assert_eq!(coarse.h[0][k], fine.h[0][k]);
        }
        for j in 0..=8 {
            assert_eq!(coarse.theta[j], fine.theta[j]);
        }
    }

    #[test]
    fn default_profile_is_physical() {
        let basis = Basis::new(32, 65).unwrap();
        let state = InitialData::default().build(&basis).unwrap();
        for &v in &state.v_nodes {
            assert!(v > 0.4 && v < 3.0, "volume out of range: {v}");
        }
        let theta = basis.synth_cosine(&state.theta);
        for &th in &theta {
            assert!(th > 0.8, "temperature out of range: {th}");
        }
    }

    #[test]
    fn gaussian_envelope_is_localized_and_clean() {
        let basis = Basis::new(48, 97).unwrap();
        let data = InitialData::parse("gaussian-envelope").unwrap();
        let state = data.build(&basis).unwrap();
        // fluid at rest
        assert!(state.u.iter().all(|&c| c == 0.0));
        assert!(state.v_nodes.iter().all(|&v| v == 1.0));
        // pulse peaks near the center and decays toward the walls
        let vals = basis.synth_sine_c(&state.psi);
        let mid = vals[basis.points / 2].norm();
        let edge = vals[1].norm();
        assert!(mid > 0.4, "peak too small: {mid}");
        assert!(edge < 1e-3 * mid, "pulse not localized: {edge} vs {mid}");
    }

    #[test]
    fn near_constant_scales_to_quiescent() {
        let basis = Basis::new(8, 17).unwrap();
        let state = InitialData::NearConstant { scale: 0.0 }
            .build(&basis)
            .unwrap();
        assert!(state.u.iter().all(|&c| c == 0.0));
        assert!(state.psi.iter().all(|&c| c.norm() == 0.0));
        assert_eq!(state.theta[0], 1.0);
    }

    #[test]
    fn unknown_profile_is_rejected() {
        assert!(InitialData::parse("sawtooth").is_err());
    }

    #[test]
    fn amplitude_bounds_are_enforced() {
        let mut data = InitialData::default();
        if let InitialData::SmoothPeriodic { fluid, .. } = &mut data {
            *fluid = 0.9;
        }
        assert!(data.validate().is_err());
    }
}
