//! Deterministic divergence-free test data and its Gaussian randomization.

mod data;
pub mod rng;

use thiserror::Error;

pub use data::{make_data, DataFamily, DataRealization};

use crate::spectral::{GridSpec, SpectralError, SpectralField};

#[derive(Debug, Error)]
pub enum RandomizerError {
    #[error("invalid data family: {0}")]
    InvalidFamily(String),
    #[error("draw built for grid {draw}, field lives on grid {field}")]
    GridMismatch { draw: usize, field: usize },
    #[error("base field must be conjugate-symmetric with zero mean")]
    InvalidBase,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Assignment of a conjugate-pair index to every nonzero mode.
///
/// Pairs are numbered by the FFT-order position of their lexicographically
/// positive member; `n` and `−n` share an index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairIndex {
    grid: GridSpec,
    of_mode: Vec<u32>,
    count: usize,
}

impl PairIndex {
    pub const NONE: u32 = u32::MAX;

    pub fn new(grid: GridSpec) -> Self {
        let mut of_mode = vec![Self::NONE; grid.len()];
        let mut count = 0usize;
        for idx in 1..grid.len() {
            if grid.is_pair_representative(idx) {
                of_mode[idx] = count as u32;
                of_mode[grid.conj_index(idx)] = count as u32;
                count += 1;
            }
        }
        Self { grid, of_mode, count }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// Number of conjugate pairs (self-conjugate modes count once).
    pub fn count(&self) -> usize {
        self.count
    }

    /// Pair index of mode `idx`, or `None` for the mean mode.
    pub fn of_mode(&self, idx: usize) -> Option<usize> {
        match self.of_mode[idx] {
            Self::NONE => None,
            k => Some(k as usize),
        }
    }
}

/// One Gaussian scalar per conjugate pair, reproducible from the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomDraw {
    grid: GridSpec,
    master_seed: u64,
    values: Vec<f64>,
}

impl RandomDraw {
    /// A draw whose every value is `h`; `h = 1` is the identity draw.
    pub fn constant(grid: GridSpec, h: f64) -> Self {
        let count = PairIndex::new(grid).count();
        Self {
            grid,
            master_seed: 0,
            values: vec![h; count],
        }
    }

    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Self {
        Self {
            grid,
            master_seed: 0,
            values,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `h_k`; indices beyond the stored range are generated on demand from
    /// the same counter stream.
    pub fn value(&self, k: usize) -> f64 {
        match self.values.get(k) {
            Some(&v) => v,
            None => rng::gaussian(self.master_seed, k as u64),
        }
    }
}

/// Draws one `N(0, 1)` value per conjugate pair of `grid`.
pub fn draw_gaussians(grid: GridSpec, master_seed: u64) -> RandomDraw {
    let count = PairIndex::new(grid).count();
    RandomDraw {
        grid,
        master_seed,
        values: (0..count as u64).map(|k| rng::gaussian(master_seed, k)).collect(),
    }
}

/// Base data together with its randomization.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedData {
    pub base: SpectralField,
    pub draw: RandomDraw,
    pub randomized: SpectralField,
}

/// `f̂^ω(n) = h_{pair(n)} f̂(n)`.
pub fn randomize(f: &SpectralField, draw: &RandomDraw) -> Result<RandomizedData, RandomizerError> {
    let randomized = randomize_field(f, draw, &PairIndex::new(f.grid()))?;
    Ok(RandomizedData {
        base: f.clone(),
        draw: draw.clone(),
        randomized,
    })
}

/// Randomization reusing a precomputed pair table (ensemble hot path).
pub fn randomize_field(
    f: &SpectralField,
    draw: &RandomDraw,
    pairs: &PairIndex,
) -> Result<SpectralField, RandomizerError> {
    if draw.grid() != f.grid() || pairs.grid() != f.grid() {
        return Err(RandomizerError::GridMismatch {
            draw: draw.grid().size(),
            field: f.grid().size(),
        });
    }
    if !f.is_hermitian() || !f.is_mean_zero() {
        return Err(RandomizerError::InvalidBase);
    }
    Ok(f.apply_multiplier(|idx| match pairs.of_mode(idx) {
        Some(k) => draw.value(k),
        None => 0.0,
    }))
}

/// `Σ c_i h_i(ω)` for a finitely supported real sequence.
pub fn weighted_gaussian_sum(c: &[f64], draw: &RandomDraw) -> f64 {
    c.iter().enumerate().map(|(i, ci)| ci * draw.value(i)).sum()
}

/// Conjugate-symmetric, mean-zero field with independent complex Gaussian
/// coefficients on every non-Nyquist mode. Not divergence-free.
pub fn gaussian_field(grid: GridSpec, seed: u64) -> SpectralField {
    let mut f = SpectralField::zeros(grid);
    let mut k = 0;
    for idx in 1..grid.len() {
        if !grid.is_pair_representative(idx) || grid.is_nyquist(idx) {
            continue;
        }
        let n = grid.mode(idx);
        for c in 0..3 {
            f.set_pair(c, n, num_complex::Complex64::new(rng::gaussian(seed, k), rng::gaussian(seed, k + 1)));
            k += 2;
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;

    #[test]
    fn same_seed_same_draw() {
        let grid = GridSpec::new(8).unwrap();
        assert_eq!(draw_gaussians(grid, 11), draw_gaussians(grid, 11));
        assert_ne!(draw_gaussians(grid, 11), draw_gaussians(grid, 12));
    }

    #[test]
    fn pair_count_for_small_grid() {
        // (M³ − 1 − 7 self-conjugate) / 2 + 7
        let grid = GridSpec::new(4).unwrap();
        assert_eq!(PairIndex::new(grid).count(), (64 - 8) / 2 + 7);
    }

    #[test]
    fn draw_moments_at_five_sigma() {
        let grid = GridSpec::new(64).unwrap();
        let d = draw_gaussians(grid, 2024);
        let n = 100_000usize;
        let vals: Vec<f64> = (0..n).map(|k| d.value(k)).collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 5.0 / (n as f64).sqrt(), "mean {mean}");
        // Var of the sample variance is 2/n for a Gaussian
        assert!((var - 1.0).abs() < 5.0 * (2.0 / n as f64).sqrt(), "var {var}");
    }

    #[test]
    fn identity_draw_is_identity() {
        let grid = GridSpec::new(8).unwrap();
        let f = make_data(grid, &DataFamily::PowerLaw { gamma: 1.5, amplitude: 1.0 }, 0.5, 3)
            .unwrap()
            .field;
        let out = randomize(&f, &RandomDraw::constant(grid, 1.0)).unwrap();
        assert_eq!(out.randomized, f);
    }

    #[test]
    fn weighted_sum_basics() {
        let grid = GridSpec::new(4).unwrap();
        let d = draw_gaussians(grid, 5);
        assert_eq!(weighted_gaussian_sum(&[1.0], &d), d.value(0));
        assert_eq!(weighted_gaussian_sum(&[0.0, 0.0, 0.0], &d), 0.0);
        assert_eq!(weighted_gaussian_sum(&[], &d), 0.0);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let g8 = GridSpec::new(8).unwrap();
        let g4 = GridSpec::new(4).unwrap();
        let mut f = SpectralField::zeros(g8);
        f.set_pair(0, [0, 1, 0], Complex64::new(1.0, 0.0));
        assert!(matches!(
            randomize(&f, &draw_gaussians(g4, 1)),
            Err(RandomizerError::GridMismatch { .. })
        ));
    }
}
