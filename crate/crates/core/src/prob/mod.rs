//! Monte Carlo harness for the probabilistic estimates of the linear
//! evolution: Gaussian moment growth, tail frequencies of space-time norms,
//! and coverage of the dyadic event ladders.

mod coverage;
mod moments;
pub mod stats;
mod tail;

use thiserror::Error;

pub use coverage::{coverage_study, CoverageConfig, CoverageReport, CoverageRow, Ladder};
pub use moments::{run_moment_experiment, MomentRow, MomentTable};
pub use tail::{run_tail_experiment, TailFit, TailReport, TailRow};

use crate::heat::HeatError;
use crate::randomizer::RandomizerError;

/// Minimum ensemble size for any tail or moment estimate.
pub const MIN_SAMPLES: usize = 100;

#[derive(Debug, Error)]
pub enum ProbError {
    #[error("ensemble of {0} samples is below the minimum of {MIN_SAMPLES}")]
    InsufficientSamples(usize),
    #[error("every exceedance frequency is 0 or 1; no tail to fit")]
    DegenerateTail,
    #[error("invalid experiment: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Heat(#[from] HeatError),
    #[error(transparent)]
    Randomizer(#[from] RandomizerError),
}

/// Ensemble-wide settings shared by the experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub samples: usize,
    pub master_seed: u64,
    pub alpha: f64,
    /// Nodes of the log-spaced time grid used for each member's norms.
    pub time_nodes: usize,
}

impl EnsembleConfig {
    pub fn new(samples: usize, master_seed: u64, alpha: f64) -> Self {
        Self {
            samples,
            master_seed,
            alpha,
            time_nodes: 64,
        }
    }

    fn check(&self) -> Result<(), ProbError> {
        if self.samples < MIN_SAMPLES {
            return Err(ProbError::InsufficientSamples(self.samples));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ProbError::InvalidConfig(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        Ok(())
    }
}

/// Collected outputs of an ensemble run.
#[derive(Debug, Clone, Default)]
pub struct EnsembleReport {
    pub tails: Vec<TailReport>,
    pub moments: Option<MomentTable>,
    pub coverage: Option<CoverageReport>,
}

/// Membership in `{ω : ‖e^{tΔ}f^ω‖ < λ‖f‖}`; the inequality is strict.
pub fn event_membership(norm_value: f64, lambda: f64, f_norm: f64) -> bool {
    norm_value < lambda * f_norm
}
