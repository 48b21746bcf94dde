//! Crate error type.

use alloc::string::String;
use core::fmt;

/// Errors produced by model construction and solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violated a precondition (non-unit director, bad geometry, ...).
    InvalidInput(String),
    /// The request has no solution in the model's domain (e.g. no nematic
    /// minimum, no splay Freedericksz transition).
    Domain(String),
    /// An iterative solver ran out of its iteration budget.
    NonConvergence {
        what: &'static str,
        iterations: u64,
        residual: f64,
    },
    /// Gradient-flow time step shrank below the stagnation floor.
    Stagnation { dt: f64, residual: f64 },
    /// A layer permittivity made the Berreman matrix singular.
    SingularLayer(String),
    /// The in-plane wave component is evanescent in an ambient medium.
    Evanescent { eta: f64, ambient_index: f64 },
    /// Calibration anchors were inconsistent.
    Calibration(String),
    /// An S11 curve never crosses -10 dB.
    NoBandwidth { min_db: f64 },
    /// A voltage-sweep point failed; carries the offending voltage.
    SweepFailed {
        voltage: f64,
        source: alloc::boxed::Box<Error>,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::NonConvergence {
                what,
                iterations,
                residual,
            } => write!(
                f,
                "{what} did not converge after {iterations} iterations (residual {residual:.3e})"
            ),
            Error::Stagnation { dt, residual } => write!(
                f,
                "gradient flow stagnated: dt underflow at {dt:.3e} (residual {residual:.3e})"
            ),
            Error::SingularLayer(msg) => write!(f, "singular optical layer: {msg}"),
            Error::Evanescent { eta, ambient_index } => write!(
                f,
                "evanescent ambient mode: |eta| = {eta} >= ambient index {ambient_index}"
            ),
            Error::Calibration(msg) => write!(f, "calibration error: {msg}"),
            Error::NoBandwidth { min_db } => {
                write!(f, "no -10 dB bandwidth: curve minimum is {min_db:.2} dB")
            }
            Error::SweepFailed { voltage, source } => {
                write!(f, "sweep failed at {voltage} V: {source}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
