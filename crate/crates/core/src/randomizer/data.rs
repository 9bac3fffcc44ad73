use std::f64::consts::PI;

use num_complex::Complex64;

use super::{rng, RandomizerError};
use crate::spectral::{leray_project, sobolev_norm, GridSpec, SpectralField};

/// Deterministic mean-zero, divergence-free test data.
#[derive(Debug, Clone, PartialEq)]
pub enum DataFamily {
    /// Unit-magnitude modes on `0 < |n| ≤ support_radius`.
    BandLimited { support_radius: f64, amplitude: f64 },
    /// Magnitude `|n|^{−γ}` on every mode with `0 < |n| < M/2`.
    PowerLaw { gamma: f64, amplitude: f64 },
}

impl DataFamily {
    fn amplitude(&self) -> f64 {
        match *self {
            DataFamily::BandLimited { amplitude, .. } | DataFamily::PowerLaw { amplitude, .. } => amplitude,
        }
    }

    /// Whether the untruncated family lies in `Ḣ^{−α}`.
    pub fn in_negative_sobolev(&self, alpha: f64) -> bool {
        match *self {
            DataFamily::BandLimited { .. } => true,
            DataFamily::PowerLaw { gamma, .. } => 2.0 * (alpha + gamma) > 3.0,
        }
    }
}

/// Output of [`make_data`].
#[derive(Debug, Clone, PartialEq)]
pub struct DataRealization {
    pub field: SpectralField,
    /// `‖f‖_{Ḣ^{−α}}` of the truncated realization.
    pub norm: f64,
    /// False when the untruncated family would not belong to `Ḣ^{−α}`.
    pub representative: bool,
}

/// Unit vector `n × e_a` with `a` the axis where `|n_a|` is smallest.
fn transverse_direction(n: [i64; 3]) -> [f64; 3] {
    let a = (0..3).min_by_key(|&i| n[i].abs()).unwrap();
    let mut e = [0.0; 3];
    e[a] = 1.0;
    let nf = [n[0] as f64, n[1] as f64, n[2] as f64];
    let d = [
        nf[1] * e[2] - nf[2] * e[1],
        nf[2] * e[0] - nf[0] * e[2],
        nf[0] * e[1] - nf[1] * e[0],
    ];
    let len = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    [d[0] / len, d[1] / len, d[2] / len]
}

/// Builds a conjugate-symmetric, mean-zero, divergence-free field from
/// `family`. Phases come from a counter stream keyed by `seed`.
pub fn make_data(
    grid: GridSpec,
    family: &DataFamily,
    alpha: f64,
    seed: u64,
) -> Result<DataRealization, RandomizerError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(RandomizerError::InvalidFamily(format!("alpha = {alpha} outside (0, 1]")));
    }
    let amplitude = family.amplitude();
    if !amplitude.is_finite() || amplitude < 0.0 {
        return Err(RandomizerError::InvalidFamily(format!("amplitude = {amplitude}")));
    }
    let half = (grid.size() / 2) as f64;
    let (radius, gamma) = match *family {
        DataFamily::BandLimited { support_radius, .. } => {
            if !(support_radius >= 1.0 && support_radius < half) {
                return Err(RandomizerError::InvalidFamily(format!(
                    "support radius {support_radius} must lie in [1, {half})"
                )));
            }
            (support_radius, 0.0)
        }
        DataFamily::PowerLaw { gamma, .. } => {
            if !gamma.is_finite() {
                return Err(RandomizerError::InvalidFamily(format!("gamma = {gamma}")));
            }
            (half - 1e-9, gamma)
        }
    };
    let representative = family.in_negative_sobolev(alpha);
    if !representative {
        log::warn!(
            "power-law data with 2(alpha + gamma) <= 3 is not in the negative Sobolev space; \
             the truncated field is finite but not representative"
        );
    }

    let phases = rng::phase_seed(seed);
    let mut f = SpectralField::zeros(grid);
    for idx in 1..grid.len() {
        if !grid.is_pair_representative(idx) || grid.is_nyquist(idx) {
            continue;
        }
        let r = grid.norm(idx);
        if r > radius {
            continue;
        }
        let n = grid.mode(idx);
        let mag = amplitude * r.powf(-gamma);
        let theta = 2.0 * PI * rng::uniform(phases, idx as u64);
        let z = Complex64::from_polar(mag, theta);
        let d = transverse_direction(n);
        for (c, dc) in d.iter().enumerate() {
            f.set_pair(c, n, z * dc);
        }
    }
    let field = leray_project(&f);
    let norm = sobolev_norm(&field, -alpha)?;
    Ok(DataRealization {
        field,
        norm,
        representative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::relative_divergence;

    #[test]
    fn lowest_shell() {
        let grid = GridSpec::new(8).unwrap();
        let d = make_data(
            grid,
            &DataFamily::BandLimited { support_radius: 1.0, amplitude: 1.0 },
            0.5,
            1,
        )
        .unwrap();
        let active = (0..grid.len())
            .filter(|&i| d.field.vector_at(i).iter().any(|c| c.norm() > 0.0))
            .count();
        assert_eq!(active, 6);
        assert!(relative_divergence(&d.field) <= 1e-12);
        assert!(d.field.is_hermitian() && d.field.is_mean_zero());
        assert!(d.representative);
    }

    #[test]
    fn hdot_norm_matches_brute_force_sum() {
        let grid = GridSpec::new(16).unwrap();
        let d = make_data(grid, &DataFamily::PowerLaw { gamma: 2.0, amplitude: 1.0 }, 0.5, 9).unwrap();
        let mut acc = 0.0;
        for i in 0..16i64 {
            for j in 0..16i64 {
                for k in 0..16i64 {
                    let n = [if i > 8 { i - 16 } else { i }, if j > 8 { j - 16 } else { j }, if k > 8 { k - 16 } else { k }];
                    let nn = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]) as f64;
                    if nn == 0.0 {
                        continue;
                    }
                    for c in 0..3 {
                        acc += d.field.get(c, n).norm_sqr() / nn.sqrt();
                    }
                }
            }
        }
        assert!((d.norm * d.norm - acc).abs() < 1e-12 * acc);
        assert!(relative_divergence(&d.field) <= 1e-12);
    }

    #[test]
    fn power_law_magnitudes() {
        let grid = GridSpec::new(8).unwrap();
        let gamma = 1.5;
        let d = make_data(grid, &DataFamily::PowerLaw { gamma, amplitude: 2.0 }, 0.5, 4).unwrap();
        for n in [[1, 0, 0], [1, 2, -1], [0, 3, 0]] {
            let v = d.field.vector_at(grid.index(n));
            let mag = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let r = ((n[0] * n[0] + n[1] * n[1] + n[2] * n[2]) as f64).sqrt();
            assert!((mag - 2.0 * r.powf(-gamma)).abs() < 1e-13);
        }
        assert_eq!(d.field.vector_at(grid.index([4, 0, 0])), [Complex64::default(); 3]);
    }

    #[test]
    fn zero_amplitude_gives_zero_field() {
        let grid = GridSpec::new(8).unwrap();
        let d = make_data(grid, &DataFamily::PowerLaw { gamma: 1.5, amplitude: 0.0 }, 0.5, 1).unwrap();
        assert_eq!(d.field.l2_norm(), 0.0);
    }

    #[test]
    fn non_representative_power_law_is_flagged() {
        let grid = GridSpec::new(8).unwrap();
        let d = make_data(grid, &DataFamily::PowerLaw { gamma: 0.5, amplitude: 1.0 }, 0.5, 1).unwrap();
        assert!(!d.representative);
        assert!(d.norm.is_finite());
    }

    #[test]
    fn rejects_bad_parameters() {
        let grid = GridSpec::new(8).unwrap();
        let bl = DataFamily::BandLimited { support_radius: 4.0, amplitude: 1.0 };
        assert!(make_data(grid, &bl, 0.5, 1).is_err());
        let pl = DataFamily::PowerLaw { gamma: 1.5, amplitude: 1.0 };
        assert!(make_data(grid, &pl, 0.0, 1).is_err());
        assert!(make_data(grid, &pl, 1.5, 1).is_err());
    }
}
