use rayon::prelude::*;

use super::stats::{weighted_line_fit, wilson_interval};
use super::{event_membership, EnsembleConfig, ProbError};
use crate::heat::{heat_lplq_on_grid, HeatError, TimeGrid};
use crate::randomizer::rng::member_seed;
use crate::randomizer::{draw_gaussians, randomize_field, PairIndex};
use crate::spectral::{sobolev_norm, SpectralField};

/// Empirical exceedance at one `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailRow {
    pub p: f64,
    pub q: f64,
    pub horizon: f64,
    pub lambda: f64,
    /// Fraction of members with `‖g‖ ≥ λ‖f‖`, i.e. outside the event.
    pub freq: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Weighted fit `ln P̂ ≈ a − β̂ λ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    pub beta: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Number of `λ` values inside the fitting window.
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailReport {
    pub rows: Vec<TailRow>,
    /// `None` when fewer than two frequencies fall inside the window.
    pub fit: Option<TailFit>,
    /// Per-member `‖e^{tΔ}f^ω‖_{L^p_t L^q_x}`, in member order.
    pub norms: Vec<f64>,
    /// `‖f‖_{Ḣ^{−α}}`.
    pub f_norm: f64,
}

impl TailReport {
    pub const HEADER: [&'static str; 7] = ["p", "q", "T", "lambda", "freq", "ci_lo", "ci_hi"];
}

/// Time grid resolving the fastest decay present in `f`.
pub(crate) fn resolving_grid(f: &SpectralField, horizon: f64, nodes: usize) -> Result<TimeGrid, HeatError> {
    let r = f.support_radius();
    TimeGrid::resolving(horizon, nodes, r * r)
}

/// Monte Carlo tail of `‖e^{tΔ}f^ω‖_{L^p([0,T], L^q)} / ‖f‖_{Ḣ^{−α}}`.
pub fn run_tail_experiment(
    f: &SpectralField,
    p: f64,
    q: f64,
    horizon: f64,
    lambda_grid: &[f64],
    cfg: &EnsembleConfig,
) -> Result<TailReport, ProbError> {
    cfg.check()?;
    if lambda_grid.is_empty() || lambda_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(ProbError::InvalidConfig("lambda grid must be non-empty and strictly increasing".into()));
    }
    if cfg.alpha * p > 2.0 + 1e-12 {
        return Err(ProbError::InvalidConfig(format!("alpha*p = {} exceeds 2", cfg.alpha * p)));
    }
    let f_norm = sobolev_norm(f, -cfg.alpha).map_err(HeatError::from)?;
    if f_norm == 0.0 {
        return Err(HeatError::ZeroField.into());
    }
    let grid = f.grid();
    let tgrid = resolving_grid(f, horizon, cfg.time_nodes)?;
    let pairs = PairIndex::new(grid);
    let master = cfg.master_seed;

    let norms = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|s| {
            let draw = draw_gaussians(grid, member_seed(master, s));
            let g0 = randomize_field(f, &draw, &pairs)?;
            Ok(heat_lplq_on_grid(&g0, p, q, &tgrid)?)
        })
        .collect::<Result<Vec<f64>, ProbError>>()?;

    let n = norms.len();
    let rows: Vec<TailRow> = lambda_grid
        .iter()
        .map(|&lambda| {
            let k = norms.iter().filter(|&&v| !event_membership(v, lambda, f_norm)).count();
            let (ci_lo, ci_hi) = wilson_interval(k, n);
            TailRow {
                p,
                q,
                horizon,
                lambda,
                freq: k as f64 / n as f64,
                ci_lo,
                ci_hi,
            }
        })
        .collect();
    if rows.iter().all(|r| r.freq == 0.0 || r.freq == 1.0) {
        return Err(ProbError::DegenerateTail);
    }
    let fit = fit_tail(&rows, n);
    Ok(TailReport {
        rows,
        fit,
        norms,
        f_norm,
    })
}

/// Fits `ln P̂` against `λ²` over `P̂ ∈ [10/n, 0.5]`, weighting each point by
/// the inverse delta-method variance `n P̂ / (1 − P̂)` of `ln P̂`.
fn fit_tail(rows: &[TailRow], n: usize) -> Option<TailFit> {
    let lo = 10.0 / n as f64;
    let window: Vec<&TailRow> = rows.iter().filter(|r| r.freq >= lo && r.freq <= 0.5).collect();
    let x: Vec<f64> = window.iter().map(|r| r.lambda * r.lambda).collect();
    let y: Vec<f64> = window.iter().map(|r| r.freq.ln()).collect();
    let w: Vec<f64> = window.iter().map(|r| n as f64 * r.freq / (1.0 - r.freq)).collect();
    let line = weighted_line_fit(&x, &y, &w)?;
    Some(TailFit {
        beta: -line.slope,
        intercept: line.intercept,
        r_squared: line.r_squared,
        points: window.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::stats::two_sided_tail;
    use crate::spectral::GridSpec;
    use num_complex::Complex64;

    fn single_pair(m: usize) -> SpectralField {
        let grid = GridSpec::new(m).unwrap();
        let mut f = SpectralField::zeros(grid);
        f.set_pair(1, [1, 0, 0], Complex64::new(0.7, 0.2));
        f
    }

    #[test]
    fn single_pair_matches_gaussian_tail() {
        let f = single_pair(4);
        let cfg = EnsembleConfig::new(4000, 5, 0.5);
        let lambdas = [0.0, 0.5, 1.0, 2.0];
        let rep = run_tail_experiment(&f, 3.0, 4.0, 1.0, &lambdas, &cfg).unwrap();
        // unit draw gives the deterministic norm
        let c0 = heat_lplq_on_grid(&f, 3.0, 4.0, &resolving_grid(&f, 1.0, cfg.time_nodes).unwrap()).unwrap();
        assert_eq!(rep.rows[0].freq, 1.0);
        for row in &rep.rows {
            let exact = two_sided_tail(row.lambda * rep.f_norm / c0);
            let sd = (exact * (1.0 - exact) / 4000.0).sqrt();
            assert!((row.freq - exact).abs() <= 3.0 * sd + 1e-12, "{row:?} vs {exact}");
        }
    }

    #[test]
    fn tiny_lambda_gives_frequency_one() {
        let f = single_pair(4);
        let cfg = EnsembleConfig::new(200, 1, 0.5);
        let rep = run_tail_experiment(&f, 3.0, 2.0, 1.0, &[1e-300, 1.0, 1e6], &cfg).unwrap();
        assert_eq!(rep.rows[0].freq, 1.0);
        assert_eq!(rep.rows[2].freq, 0.0);
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        let f = single_pair(4);
        let cfg = EnsembleConfig::new(200, 1, 0.5);
        assert!(matches!(
            run_tail_experiment(&f, 3.0, 2.0, 1.0, &[1e6], &cfg),
            Err(ProbError::DegenerateTail)
        ));
        assert!(run_tail_experiment(&f, 3.0, 2.0, 1.0, &[1.0, 1.0], &cfg).is_err());
        assert!(run_tail_experiment(&f, 5.0, 2.0, 1.0, &[1.0], &cfg).is_err());
        let small = EnsembleConfig::new(99, 1, 0.5);
        assert!(matches!(
            run_tail_experiment(&f, 3.0, 2.0, 1.0, &[1.0], &small),
            Err(ProbError::InsufficientSamples(99))
        ));
    }

    #[test]
    fn same_seed_same_report() {
        let f = single_pair(4);
        let cfg = EnsembleConfig::new(300, 9, 0.5);
        let a = run_tail_experiment(&f, 3.0, 4.0, 1.0, &[0.5, 1.0], &cfg).unwrap();
        let b = run_tail_experiment(&f, 3.0, 4.0, 1.0, &[0.5, 1.0], &cfg).unwrap();
        assert_eq!(a, b);
    }
}
