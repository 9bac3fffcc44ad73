use rayon::prelude::*;

use super::stats::gaussian_moment_norm;
use super::{EnsembleConfig, ProbError, MIN_SAMPLES};
use crate::randomizer::rng::{gaussian, member_seed};

/// One `r` of a moment table.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentRow {
    pub r: f64,
    /// Monte Carlo `(mean |X|^r)^{1/r}`.
    pub estimate: f64,
    /// Exact `‖c‖ (E|Z|^r)^{1/r}`.
    pub oracle: f64,
    /// Delta-method standard error of `estimate`.
    pub std_error: f64,
    /// `C √r ‖c‖` with `C = max_r (E|Z|^r)^{1/r} / √r` over the grid.
    pub bound: f64,
    /// Whether `estimate ≤ bound` up to three standard errors.
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub rows: Vec<MomentRow>,
    pub c_norm: f64,
    /// Gaussian constant `C` used in the `√r` bound.
    pub constant: f64,
}

impl MomentTable {
    pub const HEADER: [&'static str; 3] = ["r", "estimate", "oracle"];
}

/// Monte Carlo `‖Σ c_i h_i‖_{L^r(Ω)}` for each `r`.
pub fn run_moment_experiment(c: &[f64], r_grid: &[f64], cfg: &EnsembleConfig) -> Result<MomentTable, ProbError> {
    if cfg.samples < MIN_SAMPLES {
        return Err(ProbError::InsufficientSamples(cfg.samples));
    }
    let c_norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    if c_norm == 0.0 {
        return Err(ProbError::InvalidConfig("coefficient sequence is zero".into()));
    }
    if r_grid.iter().any(|&r| !(r >= 1.0 && r.is_finite())) {
        return Err(ProbError::InvalidConfig("moment orders must be finite and >= 1".into()));
    }

    let master = cfg.master_seed;
    let samples: Vec<f64> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|s| {
            let seed = member_seed(master, s);
            c.iter().enumerate().map(|(i, ci)| ci * gaussian(seed, i as u64)).sum()
        })
        .collect();

    let constant = r_grid
        .iter()
        .map(|&r| gaussian_moment_norm(r) / r.sqrt())
        .fold(0.0, f64::max);
    let n = samples.len() as f64;
    let rows = r_grid
        .iter()
        .map(|&r| {
            let powers: Vec<f64> = samples.iter().map(|x| x.abs().powf(r)).collect();
            let mean = powers.iter().sum::<f64>() / n;
            let var = powers.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let estimate = mean.powf(1.0 / r);
            // d(m^{1/r}) = m^{1/r} dm / (r m)
            let std_error = estimate * (var / n).sqrt() / (r * mean);
            let bound = constant * r.sqrt() * c_norm;
            MomentRow {
                r,
                estimate,
                oracle: c_norm * gaussian_moment_norm(r),
                std_error,
                bound,
                within_bound: estimate <= bound + 3.0 * std_error,
            }
        })
        .collect();
    Ok(MomentTable { rows, c_norm, constant })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_second_moment() {
        let cfg = EnsembleConfig::new(100_000, 17, 0.5);
        let t = run_moment_experiment(&[1.0], &[2.0], &cfg).unwrap();
        assert!((t.rows[0].estimate - 1.0).abs() < 0.02);
        assert!((t.rows[0].oracle - 1.0).abs() < 1e-12);
    }

    #[test]
    fn moments_are_monotone_in_r() {
        let cfg = EnsembleConfig::new(5_000, 3, 0.5);
        let t = run_moment_experiment(&[0.2, -1.0, 0.5], &[1.0, 2.0, 3.0, 4.0, 6.0, 8.0], &cfg).unwrap();
        assert!(t.rows.windows(2).all(|w| w[0].estimate <= w[1].estimate));
    }

    #[test]
    fn rejects_small_ensembles_and_zero_sequences() {
        let cfg = EnsembleConfig::new(50, 3, 0.5);
        assert!(matches!(
            run_moment_experiment(&[1.0], &[2.0], &cfg),
            Err(ProbError::InsufficientSamples(50))
        ));
        let cfg = EnsembleConfig::new(500, 3, 0.5);
        assert!(run_moment_experiment(&[0.0, 0.0], &[2.0], &cfg).is_err());
    }
}
