//! Pseudo-spectral laboratory for the Navier-Stokes equations with
//! randomized supercritical initial data on the periodic torus.
//!
//! The crate is organized bottom-up:
//!
//! * [`spectral`] – fields, transforms, projectors and norms;
//! * [`randomizer`] – test data and the per-mode Gaussian randomization;
//! * [`heat`] – exact heat flow and its space-time norms;
//! * [`prob`] – Monte Carlo estimates of moments, tails and event coverage;
//! * [`galerkin`] – the smoothed Galerkin solver and its energy ledger;
//! * [`verify`] – the invariant suite used by the command line tool.

pub mod spectral;

pub use spectral::{GridSpec, RealField, SpectralError, SpectralField};
pub mod heat;
pub mod galerkin;
pub mod prob;
pub mod randomizer;
pub mod verify;

pub use heat::{HeatError, NormTable, TimeGrid};
pub use randomizer::{DataFamily, RandomDraw, RandomizedData, RandomizerError};
