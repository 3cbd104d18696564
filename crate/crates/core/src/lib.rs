//! One-dimensional short-wave/long-wave interaction in planar
//! magnetohydrodynamics.
//!
//! A compressible, viscous, heat-conducting fluid with one transverse
//! velocity/magnetic-field pair is coupled to a cubic Schrödinger envelope
//! through density- and intensity-dependent interaction terms. The solver
//! works in Lagrangian mass coordinates on the unit interval with a spectral
//! Galerkin discretization; companion solvers integrate the inviscid Euler
//! and free Schrödinger limits for vanishing-dissipation studies.

pub mod commands;
pub mod config;
pub mod constitutive;
pub mod entropy;
pub mod error;
pub mod galerkin;
pub mod initial;
pub mod invariants;
pub mod io;
pub mod lagrangian;
pub mod limit;
pub mod sweep;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
