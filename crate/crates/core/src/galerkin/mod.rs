//! Smoothed Galerkin system for the perturbation `v = u − g`, its Picard
//! map, the energy ledger, and full Navier-Stokes restarts.

mod bilinear;
mod checks;
mod ledger;
mod picard;
mod solver;

use thiserror::Error;

pub use checks::{
    cancellation_check, holder_interpolation_check, negative_interpolation_check, nse_residual, scaling_transform,
    transport_cancellation_check, InterpolationCheck,
};
pub use ledger::{energy_identity_residual, EnergyLedger, LedgerRow};
pub use picard::{picard_iterate, picard_iterate_with, PicardHistory};
pub use solver::{assemble_rhs, restart_full_nse, solve, Snapshot, Solver, SolverState, Trajectory};

use crate::heat::HeatError;
use crate::spectral::{GridSpec, SpectralError, SpectralField};

#[derive(Debug, Error)]
pub enum GalerkinError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("state invariant violated: {0}")]
    StateInvariantViolation(String),
    #[error("non-finite coefficient at step {step} (t = {t})")]
    NonFiniteState { step: usize, t: f64 },
    #[error("scaled frequency {needed} exceeds the target grid's band {available}")]
    FrequencyOverflow { needed: i64, available: i64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Heat(#[from] HeatError),
}

/// Frequency truncation of the evolved field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Smooth cutoff `P_{≤N}` inside the dealiased band.
    Smooth(f64),
    /// Dealiased band only (plain Navier-Stokes).
    BandOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    /// Integrating-factor fourth-order Runge-Kutta.
    IfRk4,
    /// Fixed-point iteration of the Duhamel map on a uniform subgrid.
    Picard { iterations: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dealias {
    TwoThirds,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub grid: GridSpec,
    pub truncation: Truncation,
    pub dt: f64,
    pub horizon: f64,
    pub alpha: f64,
    /// Randomized initial data `f^ω`; its heat flow `g` forces `v`.
    pub forcing: SpectralField,
    pub dealias: Dealias,
    pub integrator: Integrator,
    /// Keep a snapshot every this many steps (and at the final step).
    pub snapshot_every: usize,
    /// Drop the quadratic terms (linear test problems).
    pub nonlinear: bool,
}

impl SolverConfig {
    pub fn new(forcing: SpectralField, cutoff: f64, dt: f64, horizon: f64, alpha: f64) -> Self {
        Self {
            grid: forcing.grid(),
            truncation: Truncation::Smooth(cutoff),
            dt,
            horizon,
            alpha,
            forcing,
            dealias: Dealias::TwoThirds,
            integrator: Integrator::IfRk4,
            snapshot_every: 1,
            nonlinear: true,
        }
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<(), GalerkinError> {
        let bad = |m: String| Err(GalerkinError::InvalidConfig(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        let steps = self.horizon / self.dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return bad(format!("horizon {} is not a whole number of steps {}", self.horizon, self.dt));
        }
        if self.forcing.grid() != self.grid {
            return bad("forcing lives on a different grid".into());
        }
        if self.snapshot_every == 0 {
            return bad("snapshot_every must be at least 1".into());
        }
        if let Truncation::Smooth(n) = self.truncation {
            let limit = self.grid.size() as f64 / 3.0;
            if !(n >= 1.0 && n <= limit) {
                return bad(format!("cutoff N = {n} must lie in [1, M/3 = {limit}]"));
            }
        }
        Ok(())
    }
}
