//! Exact heat flow `g = e^{tΔ} f` and its space-time norms.

mod supremum;
mod time_grid;

use num_complex::Complex64;
use thiserror::Error;

pub use supremum::{compute_j, compute_k, golden_section_max, lattice_j, sigma_exponent};
pub use time_grid::{cumulative_trapezoid, trapezoid, TimeGrid, TimeScheme, MIN_NODES};

use crate::spectral::{
    inverse_scalar, lebesgue_norm_of_magnitude, sobolev_norm, Exponent, SpectralError, SpectralField,
};

#[derive(Debug, Error)]
pub enum HeatError {
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("field is identically zero")]
    ZeroField,
    #[error("time quadrature did not settle below {tolerance} after {doublings} doublings (last change {change:e})")]
    UnconvergedQuadrature { doublings: usize, change: f64, tolerance: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("maximand has {0} monotonicity changes on the coarse scan")]
    NotUnimodal(usize),
    #[error("coarse maximum at {at} sits on the scan boundary [{lower}, {upper}]")]
    Bracket { at: f64, lower: f64, upper: f64 },
    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Relative change under node doubling accepted by [`heat_lplq`].
pub const REFINEMENT_TOL: f64 = 5e-3;
/// Number of node doublings attempted by [`heat_lplq`].
pub const MAX_DOUBLINGS: usize = 3;

/// `e^{tΔ} f`: per-mode multiplication by `e^{−t|n|²}`.
pub fn heat_evolve(f: &SpectralField, t: f64) -> Result<SpectralField, HeatError> {
    if t < 0.0 || t.is_nan() {
        return Err(HeatError::NegativeTime(t));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    let grid = f.grid();
    Ok(f.apply_multiplier(|idx| (-t * grid.norm_sq(idx)).exp()))
}

/// Sharp mode-wise constant `c*(s) = sup_{y>0} y^s e^{−y²} = (s/2)^{s/2} e^{−s/2}`.
pub fn mode_constant(s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else {
        (0.5 * s).powf(0.5 * s) * (-0.5 * s).exp()
    }
}

/// Energy of `f` grouped by lattice shell `|n|²`, sorted by shell.
fn shell_energies(f: &SpectralField) -> Vec<(f64, f64)> {
    let grid = f.grid();
    let len = grid.len();
    let c = f.coeffs();
    let mut shells = std::collections::BTreeMap::<u64, f64>::new();
    for idx in 1..len {
        let e = c[idx].norm_sqr() + c[len + idx].norm_sqr() + c[2 * len + idx].norm_sqr();
        if e > 0.0 {
            *shells.entry(grid.norm_sq(idx) as u64).or_default() += e;
        }
    }
    shells.into_iter().map(|(s, e)| (s as f64, e)).collect()
}

/// `sup_t t^{(α+k)/2} ‖D^k g(t)‖_{L²} / ‖f‖_{Ḣ^{−α}}` over the grid nodes.
pub fn deterministic_decay_ratio(f: &SpectralField, alpha: f64, k: u32, grid: &TimeGrid) -> Result<f64, HeatError> {
    let norm = sobolev_norm(f, -alpha)?;
    if norm == 0.0 {
        return Err(HeatError::ZeroField);
    }
    let shells = shell_energies(f);
    let s = alpha + k as f64;
    let mut best: f64 = 0.0;
    for &t in grid.nodes() {
        let sq: f64 = shells
            .iter()
            .map(|&(nn, e)| nn.powi(k as i32) * (-2.0 * t * nn).exp() * e)
            .sum();
        best = best.max(t.powf(0.5 * s) * sq.sqrt());
    }
    Ok(best / norm)
}

/// Evaluates `‖e^{tΔ} f‖_{L^q_x}` at arbitrary times, reusing buffers.
pub struct HeatNormEvaluator<'a> {
    f: &'a SpectralField,
    shells: Vec<(f64, f64)>,
    norm_sq: Vec<f64>,
    buf: Vec<Complex64>,
    mag_sq: Vec<f64>,
}

impl<'a> HeatNormEvaluator<'a> {
    pub fn new(f: &'a SpectralField) -> Self {
        let grid = f.grid();
        Self {
            f,
            shells: shell_energies(f),
            norm_sq: (0..grid.len()).map(|i| grid.norm_sq(i)).collect(),
            buf: vec![Complex64::default(); grid.len()],
            mag_sq: vec![0.0; grid.len()],
        }
    }

    pub fn lq_norm(&mut self, t: f64, q: Exponent) -> Result<f64, HeatError> {
        Ok(self.lq_norms(t, &[q])?[0])
    }

    /// `‖g(t)‖_{L^q}` for several `q` from a single synthesis.
    pub fn lq_norms(&mut self, t: f64, qs: &[Exponent]) -> Result<Vec<f64>, HeatError> {
        if t < 0.0 {
            return Err(HeatError::NegativeTime(t));
        }
        let mut out = vec![0.0; qs.len()];
        let mut synthesized = false;
        for (slot, &q) in out.iter_mut().zip(qs) {
            if q == Exponent::Finite(2.0) {
                let mean: f64 = (0..3).map(|c| self.f.component(c)[0].norm_sqr()).sum();
                let sq: f64 = self.shells.iter().map(|&(nn, e)| (-2.0 * t * nn).exp() * e).sum::<f64>() + mean;
                *slot = sq.sqrt();
                continue;
            }
            if !synthesized {
                self.synthesize(t);
                synthesized = true;
            }
            let mag: Vec<f64> = self.mag_sq.iter().map(|m| m.sqrt()).collect();
            *slot = lebesgue_norm_of_magnitude(&mag, self.f.grid().cell_volume(), q)?;
        }
        Ok(out)
    }

    fn synthesize(&mut self, t: f64) {
        let grid = self.f.grid();
        self.mag_sq.iter_mut().for_each(|m| *m = 0.0);
        let active: Vec<usize> = (0..3)
            .filter(|&c| self.f.component(c).iter().any(|v| *v != Complex64::default()))
            .collect();
        // two real components share one complex inverse transform
        for chunk in active.chunks(2) {
            let a = self.f.component(chunk[0]);
            let b = chunk.get(1).map(|&c| self.f.component(c));
            for (k, (slot, &nn)) in self.buf.iter_mut().zip(&self.norm_sq).enumerate() {
                let decay = (-t * nn).exp();
                let z = match b {
                    Some(b) => a[k] + Complex64::i() * b[k],
                    None => a[k],
                };
                *slot = z * decay;
            }
            inverse_scalar(grid, &mut self.buf);
            for (m, z) in self.mag_sq.iter_mut().zip(&self.buf) {
                *m += z.re * z.re;
                if b.is_some() {
                    *m += z.im * z.im;
                }
            }
        }
    }

    /// `‖g(t)‖_{L^q}` at `t = 0` and every node of `grid`.
    pub fn series(&mut self, q: Exponent, times: &[f64]) -> Result<Vec<f64>, HeatError> {
        times.iter().map(|&t| self.lq_norm(t, q)).collect()
    }
}

fn check_pq(p: f64, q: f64) -> Result<(), HeatError> {
    if !(p >= 2.0 && p.is_finite() && q >= 2.0 && q.is_finite()) {
        return Err(HeatError::Domain(format!("need 2 <= p, q < inf (p={p}, q={q})")));
    }
    Ok(())
}

/// `‖e^{tΔ} f‖_{L^p([0,T], L^q_x)}` by trapezoid on `{0} ∪ grid`, without
/// refinement.
pub fn heat_lplq_on_grid(f: &SpectralField, p: f64, q: f64, grid: &TimeGrid) -> Result<f64, HeatError> {
    check_pq(p, q)?;
    let times = grid.with_origin();
    let norms = HeatNormEvaluator::new(f).series(Exponent::Finite(q), &times)?;
    let powered: Vec<f64> = norms.iter().map(|v| v.powf(p)).collect();
    Ok(trapezoid(&times, &powered).powf(1.0 / p))
}

/// Running `‖e^{tΔ} f‖_{L^p([0,t_k], L^q_x)}` at `t_0 = 0` and every node.
pub fn heat_lplq_cumulative(f: &SpectralField, p: f64, q: f64, grid: &TimeGrid) -> Result<Vec<f64>, HeatError> {
    check_pq(p, q)?;
    let times = grid.with_origin();
    let norms = HeatNormEvaluator::new(f).series(Exponent::Finite(q), &times)?;
    let powered: Vec<f64> = norms.iter().map(|v| v.powf(p)).collect();
    Ok(cumulative_trapezoid(&times, &powered)
        .into_iter()
        .map(|v| v.powf(1.0 / p))
        .collect())
}

/// `‖e^{tΔ} f‖_{L^p([0,T], L^q_x)}`, accepted once a node doubling changes
/// the value by less than [`REFINEMENT_TOL`]; the refined value is returned.
pub fn heat_lplq(f: &SpectralField, p: f64, q: f64, grid: &TimeGrid) -> Result<f64, HeatError> {
    check_pq(p, q)?;
    if f.l2_norm() == 0.0 {
        return Ok(0.0);
    }
    let mut current = grid.clone();
    let mut value = heat_lplq_on_grid(f, p, q, &current)?;
    let mut change = f64::INFINITY;
    for _ in 0..MAX_DOUBLINGS {
        current = current.refined();
        let refined = heat_lplq_on_grid(f, p, q, &current)?;
        change = (refined - value).abs() / refined.abs().max(f64::MIN_POSITIVE);
        value = refined;
        if change < REFINEMENT_TOL {
            return Ok(value);
        }
    }
    Err(HeatError::UnconvergedQuadrature {
        doublings: MAX_DOUBLINGS,
        change,
        tolerance: REFINEMENT_TOL,
    })
}

/// One row of a space-time norm table.
#[derive(Debug, Clone, PartialEq)]
pub struct NormRow {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub horizon: f64,
    pub seed: u64,
    pub value: f64,
}

/// Sampled `‖g‖_{L^p_t L^q_x}` values with their provenance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NormTable {
    pub rows: Vec<NormRow>,
}

impl NormTable {
    pub const HEADER: [&'static str; 6] = ["alpha", "p", "q", "T", "seed", "value"];
}

/// One row of the `J`/`K` table.
#[derive(Debug, Clone, PartialEq)]
pub struct JkRow {
    pub alpha: f64,
    pub p: f64,
    pub horizon: f64,
    pub j: f64,
    pub k: f64,
    pub sigma: f64,
}

impl JkRow {
    pub const HEADER: [&'static str; 6] = ["alpha", "p", "T", "J", "K", "sigma"];

    pub fn compute(alpha: f64, p: f64, horizon: f64) -> Result<Self, HeatError> {
        Ok(Self {
            alpha,
            p,
            horizon,
            j: compute_j(horizon, alpha, p)?,
            k: compute_k(alpha, p)?,
            sigma: sigma_exponent(p, alpha),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;

    fn single_mode(grid: GridSpec, n: [i64; 3], c: f64) -> SpectralField {
        let mut f = SpectralField::zeros(grid);
        f.set_pair(1, n, Complex64::new(c, 0.0));
        f
    }

    #[test]
    fn evolve_identity_and_multiplier() {
        let grid = GridSpec::new(8).unwrap();
        let f = single_mode(grid, [2, 0, 0], 1.0);
        assert_eq!(heat_evolve(&f, 0.0).unwrap(), f);
        let g = heat_evolve(&f, 0.25).unwrap();
        assert!((g.get(1, [2, 0, 0]).re - (-1f64).exp()).abs() < 1e-15);
        assert!(matches!(heat_evolve(&f, -1.0), Err(HeatError::NegativeTime(_))));
    }

    #[test]
    fn semigroup_law() {
        let grid = GridSpec::new(8).unwrap();
        let mut f = SpectralField::zeros(grid);
        for (k, n) in [[1, 0, 0], [1, 2, 3], [0, -3, 1]].iter().enumerate() {
            f.set_pair(k % 3, *n, Complex64::new(1.0 + k as f64, 0.5));
        }
        let a = heat_evolve(&heat_evolve(&f, 0.03).unwrap(), 0.07).unwrap();
        let b = heat_evolve(&f, 0.1).unwrap();
        assert!(a.sub(&b).unwrap().l2_norm() <= 1e-12 * f.l2_norm());
    }

    #[test]
    fn mode_constant_matches_grid_search() {
        for s in [0.25, 0.5, 1.25, 1.5] {
            let brute = (1..200_000)
                .map(|i| {
                    let y = i as f64 * 2e-5;
                    y.powf(s) * (-y * y).exp()
                })
                .fold(0.0, f64::max);
            assert!((mode_constant(s) - brute).abs() < 1e-9, "s={s}");
        }
    }

    #[test]
    fn decay_ratio_is_shell_independent() {
        let grid = GridSpec::new(16).unwrap();
        let times = TimeGrid::log_spaced(10.0, 4000, 1e-5).unwrap();
        let a = deterministic_decay_ratio(&single_mode(grid, [1, 0, 0], 1.0), 0.5, 0, &times).unwrap();
        let b = deterministic_decay_ratio(&single_mode(grid, [0, 3, 0], 2.0), 0.5, 0, &times).unwrap();
        assert!((a - b).abs() < 1e-5);
    }

    #[test]
    fn decay_ratio_rejects_zero() {
        let grid = GridSpec::new(8).unwrap();
        let times = TimeGrid::uniform(1.0, 16).unwrap();
        assert!(matches!(
            deterministic_decay_ratio(&SpectralField::zeros(grid), 0.5, 0, &times),
            Err(HeatError::ZeroField)
        ));
    }

    #[test]
    fn lplq_single_mode_closed_form() {
        let grid = GridSpec::new(8).unwrap();
        let n = [1, 1, 0];
        let f = single_mode(grid, n, 0.8);
        let nn = 2.0;
        for (p, horizon) in [(2.0, 1.0), (3.0, 0.5), (4.0, 2.0)] {
            let times = TimeGrid::log_spaced(horizon, 64, horizon / 1000.0).unwrap();
            let got = heat_lplq(&f, p, 2.0, &times).unwrap();
            let want = ((1.0 - (-p * horizon * nn).exp()) / (p * nn)).powf(1.0 / p) * f.l2_norm();
            assert!((got - want).abs() < 5e-3 * want, "p={p}: {got} vs {want}");
        }
    }

    #[test]
    fn lplq_zero_and_monotone_in_horizon() {
        let grid = GridSpec::new(8).unwrap();
        let times = TimeGrid::log_spaced(1.0, 32, 1e-3).unwrap();
        assert_eq!(heat_lplq(&SpectralField::zeros(grid), 4.0, 4.0, &times).unwrap(), 0.0);
        let f = single_mode(grid, [1, 2, 0], 1.0);
        let mut last = 0.0;
        for horizon in [0.25, 0.5, 1.0, 2.0] {
            let g = TimeGrid::log_spaced(horizon, 48, horizon / 500.0).unwrap();
            let v = heat_lplq(&f, 4.0, 4.0, &g).unwrap();
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn lplq_rejects_infinite_exponents() {
        let grid = GridSpec::new(8).unwrap();
        let f = single_mode(grid, [1, 0, 0], 1.0);
        let times = TimeGrid::uniform(1.0, 16).unwrap();
        assert!(heat_lplq(&f, f64::INFINITY, 2.0, &times).is_err());
        assert!(heat_lplq(&f, 4.0, 1.5, &times).is_err());
    }

    #[test]
    fn l2_shortcut_agrees_with_quadrature() {
        let grid = GridSpec::new(8).unwrap();
        let f = crate::randomizer::make_data(
            grid,
            &crate::randomizer::DataFamily::BandLimited { support_radius: 2.0, amplitude: 1.0 },
            0.5,
            2,
        )
        .unwrap()
        .field;
        let mut ev = HeatNormEvaluator::new(&f);
        let spectral = ev.lq_norm(0.1, Exponent::Finite(2.0)).unwrap();
        let physical = ev.lq_norm(0.1, Exponent::Finite(2.0 + 1e-15)).unwrap();
        assert!((spectral - physical).abs() < 1e-10 * spectral);
    }
}
