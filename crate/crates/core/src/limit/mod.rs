//! Reference solvers for the decoupled limit system reached as the bulk
//! viscosity vanishes.
//!
//! In the limit the fields separate: density and longitudinal momentum obey
//! the isentropic Euler equations, the transverse velocity is advected by
//! the Euler flow while diffusing with its own shear viscosity, the envelope
//! obeys a free cubic Schrödinger equation, and the temperature survives only
//! through a variational inequality. Each submodule owns one of these pieces:
//!
//! - [`euler`]: shock-capturing finite-volume solver for (ρ, ρu), plus the
//!   weak entropy-inequality residual used to certify its output.
//! - [`nls`]: split-step cubic Schrödinger solver with Dirichlet walls.
//! - [`transverse`]: conservative advection-diffusion step for ρw driven by
//!   a frozen Euler field.
//! - [`thermal`]: the variational inequality residual for limit temperature
//!   trajectories; the limit thermal equation is never solved forward.

pub mod euler;
pub mod nls;
pub mod thermal;
pub mod transverse;

pub use euler::{entropy_inequality_residual, euler_step, EulerConfig, EulerState, FluxKind};
pub use nls::{nls_step, NlsSolver, NlsState};
pub use thermal::{thermal_inequality_residual, ThermalInput, ThermalSlice, ThermalTestFn};
pub use transverse::transverse_step;
