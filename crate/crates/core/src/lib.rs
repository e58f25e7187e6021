//! Semi-ellipsoid scatterer model for the NLOS part of a LEO
//! satellite-to-ground downlink.
//!
//! Scatterers are uniform in the upper half (`z >= 0`) of an ellipsoid whose
//! semi-major axis points at the satellite. From that geometry the crate
//! derives:
//!
//! - the axis lengths that reproduce a target RMS delay spread for a given
//!   maximum building height ([`geometry::solve_axes`]),
//! - excess-delay moments and RMS delay spread ([`delay_stats`]),
//! - the joint and marginal angle-of-arrival densities ([`angular_pdf`]),
//! - the autocorrelation and Doppler power spectral density, computed two
//!   independent ways ([`spectrum`]),
//! - a brute-force scatterer-sampling oracle and sum-of-rays waveform
//!   synthesis ([`montecarlo`]).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line front end and FFT-based spectral estimation live in the `leo-nlos`
//! crate.
#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` style checks are there to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod angular_pdf;
pub mod delay_stats;
mod error;
pub mod geometry;
pub mod montecarlo;
pub mod numerics;
pub mod spectrum;

pub use error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
