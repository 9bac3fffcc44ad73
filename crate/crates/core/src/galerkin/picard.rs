use num_complex::Complex64;

use super::solver::Solver;
use super::{GalerkinError, SolverConfig};
use crate::heat::trapezoid;
use crate::spectral::SpectralField;

/// Default number of uniform quadrature intervals on `[0, t₁]`.
pub const PICARD_INTERVALS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct PicardHistory {
    pub nodes: Vec<f64>,
    /// `‖v^{k+1} − v^k‖_{X_{t₁}}` for `k = 0..iters`.
    pub differences: Vec<f64>,
    /// Successive ratios of nonzero differences.
    pub ratios: Vec<f64>,
    /// Set when some ratio exceeds 1.
    pub non_contraction: bool,
    /// Final iterate at `t₁`.
    pub limit: SpectralField,
}

/// `sup_t ‖h‖_{L²} + ‖|n| h‖_{L²_t L²}` on the node series.
fn x_norm(nodes: &[f64], series: &[Vec<Complex64>], nsq: &[f64]) -> f64 {
    let len = nsq.len();
    let sup = series
        .iter()
        .map(|h| h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let grad: Vec<f64> = series
        .iter()
        .map(|h| h.iter().enumerate().map(|(k, z)| nsq[k % len] * z.norm_sqr()).sum())
        .collect();
    sup + trapezoid(nodes, &grad).sqrt()
}

/// Iterates the Duhamel map `I(v)(t) = ∫₀ᵗ F(v(s), s) ds` from `v ≡ 0`,
/// with the trapezoid rule on [`PICARD_INTERVALS`] uniform intervals.
pub fn picard_iterate(cfg: &SolverConfig, t1: f64, iters: usize) -> Result<PicardHistory, GalerkinError> {
    picard_iterate_with(cfg, t1, iters, PICARD_INTERVALS)
}

pub fn picard_iterate_with(
    cfg: &SolverConfig,
    t1: f64,
    iters: usize,
    intervals: usize,
) -> Result<PicardHistory, GalerkinError> {
    if iters < 3 {
        return Err(GalerkinError::InvalidConfig(format!("need at least 3 iterations, got {iters}")));
    }
    if !(t1 > 0.0 && t1.is_finite()) || intervals == 0 {
        return Err(GalerkinError::InvalidConfig(format!("invalid Picard horizon {t1}")));
    }
    let mut solver = Solver::new(cfg.clone())?;
    let n3 = 3 * cfg.grid.len();
    let nodes: Vec<f64> = (0..=intervals).map(|k| t1 * k as f64 / intervals as f64).collect();
    let mut current: Vec<Vec<Complex64>> = vec![vec![Complex64::default(); n3]; nodes.len()];
    let mut differences = Vec::with_capacity(iters);
    for _ in 0..iters {
        let integrand: Vec<Vec<Complex64>> = nodes
            .iter()
            .zip(&current)
            .map(|(&t, v)| solver.tendency(v, t))
            .collect();
        let mut next = vec![vec![Complex64::default(); n3]; nodes.len()];
        for m in 1..nodes.len() {
            let h = 0.5 * (nodes[m] - nodes[m - 1]);
            let (done, rest) = next.split_at_mut(m);
            for k in 0..n3 {
                rest[0][k] = done[m - 1][k] + h * (integrand[m - 1][k] + integrand[m][k]);
            }
        }
        let diff: Vec<Vec<Complex64>> = next
            .iter()
            .zip(&current)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        differences.push(x_norm(&nodes, &diff, solver.nsq()));
        current = next;
        if current.last().unwrap().iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(GalerkinError::NonFiniteState { step: differences.len(), t: t1 });
        }
    }
    let ratios: Vec<f64> = differences
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .collect();
    let non_contraction = ratios.iter().any(|&r| r > 1.0);
    if non_contraction {
        log::warn!("Picard differences grow: ratios {ratios:?}");
    }
    let limit = SpectralField::from_coeffs(cfg.grid, current.pop().unwrap())?;
    Ok(PicardHistory {
        nodes,
        differences,
        ratios,
        non_contraction,
        limit,
    })
}
