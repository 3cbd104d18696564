//! Error taxonomy shared by every module.
//!
//! Errors are split by how the process should exit: configuration and domain
//! violations (exit 2), numerical failures during time stepping or quadrature
//! (exit 3), and I/O failures (exit 4). Numerical errors carry enough context
//! (field, location, time) to locate the failure in a trajectory.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of an operation
    /// (negative density, non-positive temperature, and so on).
    #[error("domain error: {0}")]
    Domain(String),

    /// A density sample at or below the vacuum floor where a strictly
    /// positive density is required.
    #[error("vacuum: density {value:.3e} at x = {location:.6} is below the floor {floor:.1e}")]
    Vacuum {
        location: f64,
        value: f64,
        floor: f64,
    },

    /// A positive field dropped to or below its floor during time stepping.
    #[error("positivity failure: {field} = {value:.6e} at y = {location:.6}, t = {time:.6}")]
    Positivity {
        field: &'static str,
        location: f64,
        time: f64,
        value: f64,
    },

    /// A field became NaN or infinite.
    #[error("divergence: {field} is not finite at t = {time:.6}")]
    Divergence { field: &'static str, time: f64 },

    /// An explicit step was requested beyond the advertised stability limit.
    #[error("step size {given:.3e} exceeds the stable limit {limit:.3e} ({what})")]
    StepSize {
        what: &'static str,
        given: f64,
        limit: f64,
    },

    /// A quadrature or iterative solve failed to reach its tolerance.
    #[error("accuracy failure: {0}")]
    Accuracy(String),

    /// Configuration violations. Collects every problem found, not just the
    /// first, so one round trip fixes them all.
    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Validation(Vec<String>),

    /// Mismatched array lengths between caller and callee.
    #[error("shape mismatch: expected {expected}, got {got} ({what})")]
    Shape {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed data: {0}")]
    Format(String),
}

impl Error {
    /// Process exit code for the CLI: 2 = validation, 3 = numerical, 4 = I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Validation(_) | Error::Shape { .. } => 2,
            Error::Vacuum { .. }
            | Error::Positivity { .. }
            | Error::Divergence { .. }
            | Error::StepSize { .. }
            | Error::Accuracy(_) => 3,
            Error::Io(_) | Error::Format(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
