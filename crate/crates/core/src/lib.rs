//! Electro-elastic and optical modelling of voltage-reconfigurable nematic
//! liquid-crystal (NLC) antenna substrates.
//!
//! The crate covers the full chain from material constants to antenna tuning:
//!
//! * [`qtensor`] / [`material`] / [`dielectric`] / [`energy`] — Q-tensor order
//!   parameter algebra, Landau–de Gennes energy densities and the dielectric
//!   tensor of a nematic mixture.
//! * [`cell`] / [`poisson`] / [`relax`] — relaxation of the coupled
//!   Q-tensor/potential system across a cell (1D) or over one grid-electrode
//!   period (2D), yielding director profiles, effective permittivity and the
//!   Freedericksz curve.
//! * [`berreman`] — 4x4 transfer-matrix optics for stratified anisotropic
//!   media; transmittance of the LC cell.
//! * [`antenna`] — lumped resonance model mapping substrate permittivity to
//!   resonant frequency, S11 curves and spiral geometry.
//!
//! All quantities are SI unless a name says otherwise; permittivities are
//! relative. The crate is `no_std`-compatible (with `alloc`); file IO, CSV
//! emission and the CLI live in the companion `nematune` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(feature = "std")]
extern crate std;

pub mod antenna;
pub mod berreman;
pub mod cell;
pub mod dielectric;
pub mod energy;
pub mod error;
pub mod material;
pub mod poisson;
pub mod qtensor;
pub mod relax;

pub use error::Error;
pub use material::{LCMaterial, QuarticConvention};
pub use qtensor::QTensor;

/// Vacuum permittivity (F/m).
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
