//! Spectral representation of vector fields on the torus `[0, 2π)³`.

mod fft;
mod field;
mod grid;
mod norms;
mod ops;
mod snapshot;

use thiserror::Error;

pub use fft::Fft3;
pub use field::{forward_transform, inverse_transform, RealField, ScalarSpectrum, SpectralField, HERMITIAN_TOL};
pub(crate) use field::inverse_scalar;
pub use grid::GridSpec;
pub use norms::{bernstein_ratio, lebesgue_norm, sobolev_norm, Exponent};
pub(crate) use norms::{lebesgue_norm_of_magnitude, sobolev_norm_sq_unchecked};
pub use ops::{band_projector, divergence, leray_project, ramp, relative_divergence, smooth_cutoff};
pub(crate) use ops::leray_vector;
pub use snapshot::{read_snapshot, write_snapshot, MAGIC as SNAPSHOT_MAGIC};

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("grid size {0} must be an even integer >= 4")]
    InvalidGrid(usize),
    #[error("expected {expected} coefficients, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("grids differ: {left} vs {right}")]
    GridMismatch { left: usize, right: usize },
    #[error("field is not conjugate-symmetric (relative defect {defect:e})")]
    NonHermitianInput { defect: f64 },
    #[error("negative Sobolev order requires a zero mean mode")]
    NegativeOrderOnNonzeroMean,
    #[error("field is identically zero")]
    ZeroField,
    #[error("invalid Lebesgue exponent {0}")]
    InvalidExponent(f64),
    #[error("invalid frequency scale {0}")]
    InvalidScale(f64),
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
