use rayon::prelude::*;

use super::stats::two_sided_mass;
use super::tail::resolving_grid;
use super::{event_membership, EnsembleConfig, ProbError};
use crate::heat::{cumulative_trapezoid, HeatError, HeatNormEvaluator};
use crate::randomizer::rng::member_seed;
use crate::randomizer::{draw_gaussians, randomize_field, PairIndex};
use crate::spectral::{sobolev_norm, Exponent, SpectralField};

/// Nodes per dyadic time interval of the merged quadrature grid.
const NODES_PER_OCTAVE: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    /// `∪_{j≤J} E_{p₁,q₁}(2^j, δ)` at fixed `δ`.
    Amplitude,
    /// `∪_{i≤J} E_{p₂,q₂}(λ, 2^{−i})` at fixed `λ`.
    Horizon,
    /// `∪_{i≤J} [E_{p₂,q₂}(λ, 2^{−i}) ∩ ∪_{j≤J} E_{p₁,q₁}(2^j, 2^{−i})]`.
    Joint,
}

impl Ladder {
    pub fn name(self) -> &'static str {
        match self {
            Ladder::Amplitude => "amplitude",
            Ladder::Horizon => "horizon",
            Ladder::Joint => "joint",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageConfig {
    pub ensemble: EnsembleConfig,
    pub p1: f64,
    pub q1: f64,
    pub p2: f64,
    pub q2: f64,
    /// Horizon `δ` of the amplitude ladder.
    pub delta: f64,
    /// Threshold `λ` of the horizon ladder.
    pub lambda: f64,
    /// Largest rung index.
    pub max_rung: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRow {
    pub ladder: Ladder,
    pub rung: usize,
    pub fraction: f64,
    /// Exact coverage when every member norm is `|h|` times a fixed constant.
    pub predicted: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub rows: Vec<CoverageRow>,
    pub samples: usize,
}

impl CoverageReport {
    pub const HEADER: [&'static str; 3] = ["ladder", "J", "fraction"];

    pub fn fractions(&self, ladder: Ladder) -> Vec<f64> {
        self.rows.iter().filter(|r| r.ladder == ladder).map(|r| r.fraction).collect()
    }
}

/// Per-member norms needed by every ladder.
struct MemberNorms {
    /// `‖g‖_{L^{p₁}([0,δ], L^{q₁})}`.
    amplitude: f64,
    /// `‖g‖_{L^{p₁}([0,2^{−i}], L^{q₁})}` for `i = 0..=J`.
    first: Vec<f64>,
    /// `‖g‖_{L^{p₂}([0,2^{−i}], L^{q₂})}` for `i = 0..=J`.
    second: Vec<f64>,
}

/// Log-spaced abscissae containing every checkpoint, starting at 0.
fn merged_times(checkpoints: &[f64], first: f64) -> (Vec<f64>, Vec<usize>) {
    let mut marks: Vec<f64> = checkpoints.to_vec();
    marks.sort_by(|a, b| a.total_cmp(b));
    marks.dedup();
    let lo = first.min(marks[0] / 100.0);
    let mut times = vec![0.0];
    let mut prev = lo;
    times.push(lo);
    for &m in &marks {
        let octaves = (m / prev).log2().max(1.0);
        let count = (octaves * NODES_PER_OCTAVE as f64).ceil() as usize;
        let ratio = (m / prev).powf(1.0 / count as f64);
        for k in 1..count {
            times.push(prev * ratio.powi(k as i32));
        }
        times.push(m);
        prev = m;
    }
    let index = checkpoints
        .iter()
        .map(|c| times.iter().position(|t| t == c).unwrap())
        .collect();
    (times, index)
}

fn member_norms(
    g0: &SpectralField,
    cfg: &CoverageConfig,
    times: &[f64],
    amp_idx: usize,
    rung_idx: &[usize],
) -> Result<MemberNorms, ProbError> {
    let mut eval = HeatNormEvaluator::new(g0);
    let qs = [Exponent::Finite(cfg.q1), Exponent::Finite(cfg.q2)];
    let mut y1 = Vec::with_capacity(times.len());
    let mut y2 = Vec::with_capacity(times.len());
    for &t in times {
        let v = eval.lq_norms(t, &qs)?;
        y1.push(v[0].powf(cfg.p1));
        y2.push(v[1].powf(cfg.p2));
    }
    let c1 = cumulative_trapezoid(times, &y1);
    let c2 = cumulative_trapezoid(times, &y2);
    Ok(MemberNorms {
        amplitude: c1[amp_idx].powf(1.0 / cfg.p1),
        first: rung_idx.iter().map(|&i| c1[i].powf(1.0 / cfg.p1)).collect(),
        second: rung_idx.iter().map(|&i| c2[i].powf(1.0 / cfg.p2)).collect(),
    })
}

/// Least rung at which a member enters each ladder (`None` if never).
fn least_rungs(n: &MemberNorms, cfg: &CoverageConfig, f_norm: f64) -> [Option<usize>; 3] {
    let rungs = 0..=cfg.max_rung;
    let amp = rungs
        .clone()
        .find(|&j| event_membership(n.amplitude, 2f64.powi(j as i32), f_norm));
    let hor = rungs.clone().find(|&i| event_membership(n.second[i], cfg.lambda, f_norm));
    // Both unions are nested, so truncating at J leaves the single term
    // with horizon 2^{−J} and amplitude 2^J.
    let joint = rungs.clone().find(|&jj| {
        event_membership(n.second[jj], cfg.lambda, f_norm)
            && event_membership(n.first[jj], 2f64.powi(jj as i32), f_norm)
    });
    [amp, hor, joint]
}

/// Empirical coverage of the finite dyadic unions of event sets.
///
/// When `f` is carried by a single conjugate pair every member norm is
/// `|h|` times the norm of the unrandomized flow, and the exact coverage is
/// reported alongside.
pub fn coverage_study(f: &SpectralField, cfg: &CoverageConfig) -> Result<CoverageReport, ProbError> {
    let ens = &cfg.ensemble;
    ens.check()?;
    if !(cfg.delta > 0.0 && cfg.lambda > 0.0) {
        return Err(ProbError::InvalidConfig("delta and lambda must be positive".into()));
    }
    if ens.alpha * cfg.p1 > 2.0 + 1e-12 {
        return Err(ProbError::InvalidConfig(format!("alpha*p1 = {} exceeds 2", ens.alpha * cfg.p1)));
    }
    if ens.alpha * cfg.p2 >= 2.0 {
        return Err(ProbError::InvalidConfig(format!(
            "the horizon ladder needs alpha*p2 < 2, got {}",
            ens.alpha * cfg.p2
        )));
    }
    let f_norm = sobolev_norm(f, -ens.alpha).map_err(HeatError::from)?;
    if f_norm == 0.0 {
        return Err(HeatError::ZeroField.into());
    }

    let mut checkpoints: Vec<f64> = (0..=cfg.max_rung).map(|i| 0.5f64.powi(i as i32)).collect();
    checkpoints.push(cfg.delta);
    let finest = 0.5f64.powi(cfg.max_rung as i32).min(cfg.delta);
    let first = resolving_grid(f, 1.0, 16)?.nodes()[0].min(finest / 100.0);
    let (times, idx) = merged_times(&checkpoints, first);
    let amp_idx = idx[cfg.max_rung + 1];
    let rung_idx = &idx[..=cfg.max_rung];

    let grid = f.grid();
    let pairs = PairIndex::new(grid);
    let master = ens.master_seed;
    let least = (0..ens.samples as u64)
        .into_par_iter()
        .map(|s| {
            let draw = draw_gaussians(grid, member_seed(master, s));
            let g0 = randomize_field(f, &draw, &pairs)?;
            let norms = member_norms(&g0, cfg, &times, amp_idx, rung_idx)?;
            Ok(least_rungs(&norms, cfg, f_norm))
        })
        .collect::<Result<Vec<_>, ProbError>>()?;

    let predictor = if single_pair(f) {
        Some(member_norms(f, cfg, &times, amp_idx, rung_idx)?)
    } else {
        None
    };

    let n = least.len() as f64;
    let mut rows = Vec::new();
    for (k, ladder) in [Ladder::Amplitude, Ladder::Horizon, Ladder::Joint].into_iter().enumerate() {
        for rung in 0..=cfg.max_rung {
            let covered = least.iter().filter(|l| l[k].is_some_and(|r| r <= rung)).count();
            let predicted = predictor.as_ref().map(|c| {
                let amp = 2f64.powi(rung as i32) * f_norm;
                let z = match ladder {
                    Ladder::Amplitude => amp / c.amplitude,
                    Ladder::Horizon => cfg.lambda * f_norm / c.second[rung],
                    Ladder::Joint => (cfg.lambda * f_norm / c.second[rung]).min(amp / c.first[rung]),
                };
                two_sided_mass(z)
            });
            rows.push(CoverageRow {
                ladder,
                rung,
                fraction: covered as f64 / n,
                predicted,
            });
        }
    }
    Ok(CoverageReport {
        rows,
        samples: ens.samples,
    })
}

/// Whether the nonzero coefficients of `f` occupy one conjugate pair.
fn single_pair(f: &SpectralField) -> bool {
    let grid = f.grid();
    let pairs = PairIndex::new(grid);
    let len = grid.len();
    let mut seen = None;
    for idx in 0..len {
        if (0..3).any(|c| f.coeffs()[c * len + idx].norm_sqr() > 0.0) {
            let k = pairs.of_mode(idx);
            match seen {
                None => seen = Some(k),
                Some(prev) if prev != k => return false,
                _ => {}
            }
        }
    }
    seen.is_some()
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::spectral::GridSpec;

    fn oracle_field() -> SpectralField {
        let grid = GridSpec::new(4).unwrap();
        let mut f = SpectralField::zeros(grid);
        f.set_pair(2, [1, 0, 0], Complex64::new(1.0, 0.0));
        f
    }

    fn config(samples: usize, lambda: f64, max_rung: usize) -> CoverageConfig {
        CoverageConfig {
            ensemble: EnsembleConfig::new(samples, 77, 0.5),
            p1: 4.0,
            q1: 4.0,
            p2: 3.0,
            q2: 4.0,
            delta: 1.0,
            lambda,
            max_rung,
        }
    }

    #[test]
    fn merged_grid_contains_checkpoints() {
        let (t, idx) = merged_times(&[1.0, 0.5, 0.25, 1.0], 1e-4);
        assert_eq!(t[0], 0.0);
        assert!(t.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(t[idx[0]], 1.0);
        assert_eq!(t[idx[2]], 0.25);
        assert_eq!(idx[0], idx[3]);
    }

    #[test]
    fn huge_lambda_single_rung_covers_everything() {
        let rep = coverage_study(&oracle_field(), &config(200, 1e9, 0)).unwrap();
        assert_eq!(rep.fractions(Ladder::Horizon), vec![1.0]);
    }

    #[test]
    fn coverage_is_monotone_and_matches_oracle() {
        let samples = 3000;
        let rep = coverage_study(&oracle_field(), &config(samples, 0.05, 6)).unwrap();
        for ladder in [Ladder::Amplitude, Ladder::Horizon, Ladder::Joint] {
            let fr = rep.fractions(ladder);
            assert!(fr.windows(2).all(|w| w[0] <= w[1]), "{ladder:?} {fr:?}");
        }
        for row in &rep.rows {
            let p = row.predicted.unwrap();
            let sd = (p * (1.0 - p) / samples as f64).sqrt();
            assert!((row.fraction - p).abs() <= 3.0 * sd + 1e-12, "{row:?}");
        }
    }

    #[test]
    fn horizon_ladder_needs_subcritical_exponent() {
        let mut cfg = config(200, 1.0, 2);
        cfg.p2 = 4.0;
        assert!(coverage_study(&oracle_field(), &cfg).is_err());
    }
}
