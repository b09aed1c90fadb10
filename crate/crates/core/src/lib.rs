//! Capacity bounds and constructive array synthesis for aperture-constrained
//! free-space AWGN links.
//!
//! The crate is organized bottom-up:
//!
//! * [`numerics`]: Bessel functions, Gauss–Legendre rules, the `eps0` constant.
//! * [`link_model`]: link budget, channel gain, SISO and equal-power MIMO efficiency.
//! * [`spectrum`]: eigenvalues and radial eigenfunctions of the disc propagation operator.
//! * [`waterfill`]: optimal power allocation over parallel Gaussian channels.
//! * [`bounds`]: upper/lower capacity bounds and disc-area optimization.
//! * [`array_synth`]: far-field channel matrices and finite distributed array synthesis.
//! * [`report`] and [`verify`]: CLI-facing reports, sweeps and the acceptance checks.

pub mod array_synth;
pub mod bounds;
mod error;
pub mod link_model;
pub mod numerics;
pub mod report;
pub mod spectrum;
pub mod verify;
pub mod waterfill;

pub use error::{Error, Result};

/// Version stamped into every JSON report.
pub const SCHEMA_VERSION: u32 = 1;
