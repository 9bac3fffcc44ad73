//! Fourier multipliers: Leray projection, divergence and the smooth
//! Littlewood-Paley cutoffs.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{ScalarSpectrum, SpectralError, SpectralField};

/// Cutoff profile: 1 on `[0, 1]`, 0 on `[2, ∞)`, `cos²(π(r−1)/2)` between.
#[inline]
pub fn ramp(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let c = (0.5 * PI * (r - 1.0)).cos();
        c * c
    }
}

/// Applies `I − n nᵀ/|n|²` to the vector `v` at frequency `n ≠ 0`.
#[inline]
pub(crate) fn leray_vector(n: [i64; 3], v: [Complex64; 3]) -> [Complex64; 3] {
    let nf = [n[0] as f64, n[1] as f64, n[2] as f64];
    let nn = nf[0] * nf[0] + nf[1] * nf[1] + nf[2] * nf[2];
    if nn == 0.0 {
        return v;
    }
    let dot = v[0] * nf[0] + v[1] * nf[1] + v[2] * nf[2];
    let s = dot / nn;
    [v[0] - s * nf[0], v[1] - s * nf[1], v[2] - s * nf[2]]
}

/// Projects onto divergence-free fields; the mean mode passes through.
pub fn leray_project(f: &SpectralField) -> SpectralField {
    let grid = f.grid();
    let mut out = f.clone();
    for idx in 1..grid.len() {
        let v = leray_vector(grid.mode(idx), f.vector_at(idx));
        out.set_vector(idx, v);
    }
    SpectralField::from_parts(grid, out.into_coeffs(), f.is_hermitian())
}

/// Per-mode `i n·û(n)`.
pub fn divergence(f: &SpectralField) -> ScalarSpectrum {
    let grid = f.grid();
    let coeffs = (0..grid.len())
        .map(|idx| {
            let n = grid.mode(idx);
            let v = f.vector_at(idx);
            let dot = v[0] * n[0] as f64 + v[1] * n[1] as f64 + v[2] * n[2] as f64;
            Complex64::i() * dot
        })
        .collect();
    ScalarSpectrum { grid, coeffs }
}

/// Largest divergence coefficient relative to the field norm.
pub fn relative_divergence(f: &SpectralField) -> f64 {
    let norm = f.l2_norm();
    if norm == 0.0 {
        0.0
    } else {
        divergence(f).max_abs() / norm
    }
}

fn check_scale(scale: f64, min: f64) -> Result<(), SpectralError> {
    if scale.is_finite() && scale >= min {
        Ok(())
    } else {
        Err(SpectralError::InvalidScale(scale))
    }
}

/// Smooth low-pass `P_{≤N}`: multiplier `ρ(|n|/N)`.
pub fn smooth_cutoff(f: &SpectralField, scale: f64) -> Result<SpectralField, SpectralError> {
    check_scale(scale, 1.0)?;
    let grid = f.grid();
    Ok(f.apply_multiplier(|idx| ramp(grid.norm(idx) / scale)))
}

/// Smooth band-pass `P_M`: multiplier `ρ(|n|/M) − ρ(2|n|/M)`.
pub fn band_projector(f: &SpectralField, scale: f64) -> Result<SpectralField, SpectralError> {
    check_scale(scale, 2.0)?;
    let grid = f.grid();
    Ok(f.apply_multiplier(|idx| {
        let r = grid.norm(idx) / scale;
        ramp(r) - ramp(2.0 * r)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;

    fn single(grid: GridSpec, n: [i64; 3], v: [Complex64; 3]) -> SpectralField {
        let mut f = SpectralField::zeros(grid);
        for (c, val) in v.iter().enumerate() {
            f.set_pair(c, n, *val);
        }
        f
    }

    #[test]
    fn ramp_regions() {
        assert_eq!(ramp(0.0), 1.0);
        assert_eq!(ramp(1.0), 1.0);
        assert_eq!(ramp(2.0), 0.0);
        assert_eq!(ramp(7.0), 0.0);
        assert!((ramp(1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn leray_by_hand() {
        let grid = GridSpec::new(8).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let z = Complex64::default();
        let f = single(grid, [1, 1, 0], [one, z, z]);
        let p = leray_project(&f);
        let v = p.vector_at(grid.index([1, 1, 0]));
        assert!((v[0] - 0.5).norm() < 1e-15);
        assert!((v[1] + 0.5).norm() < 1e-15);
        assert!(v[2].norm() < 1e-15);
    }

    #[test]
    fn gradient_is_annihilated() {
        let grid = GridSpec::new(8).unwrap();
        let mut f = SpectralField::zeros(grid);
        for (k, n) in [[1, 2, 0], [0, -1, 3], [2, 2, 2]].iter().enumerate() {
            let phi = Complex64::new(0.3 + k as f64, -0.2);
            let g = Complex64::i() * phi;
            f.set_pair(0, *n, g * n[0] as f64);
            f.set_pair(1, *n, g * n[1] as f64);
            f.set_pair(2, *n, g * n[2] as f64);
        }
        let p = leray_project(&f);
        assert!(p.l2_norm() < 1e-14 * f.l2_norm());
    }

    #[test]
    fn divergence_direct_formula() {
        let grid = GridSpec::new(8).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let z = Complex64::default();
        let f = single(grid, [2, 0, 0], [one, z, z]);
        let d = divergence(&f);
        assert!((d.coeffs[grid.index([2, 0, 0])] - Complex64::new(0.0, 2.0)).norm() < 1e-15);
        assert_eq!(divergence(&SpectralField::zeros(grid)).max_abs(), 0.0);
    }

    #[test]
    fn cutoff_regions() {
        let grid = GridSpec::new(16).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let z = Complex64::default();
        let n_scale = 2.0;
        let keep = single(grid, [2, 0, 0], [z, one, z]);
        assert_eq!(smooth_cutoff(&keep, n_scale).unwrap(), keep);
        let kill = single(grid, [4, 0, 0], [z, one, z]);
        assert_eq!(smooth_cutoff(&kill, n_scale).unwrap().l2_norm(), 0.0);
        let half = single(grid, [3, 0, 0], [z, one, z]);
        let out = smooth_cutoff(&half, n_scale).unwrap();
        assert!((out.get(1, [3, 0, 0]) - 0.5).norm() < 1e-15);
        assert!(smooth_cutoff(&half, 0.5).is_err());
    }

    #[test]
    fn band_projector_regions() {
        let grid = GridSpec::new(16).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let z = Complex64::default();
        let at_scale = single(grid, [0, 4, 0], [one, z, z]);
        assert_eq!(band_projector(&at_scale, 4.0).unwrap(), at_scale);
        let low = single(grid, [0, 1, 0], [one, z, z]);
        assert_eq!(band_projector(&low, 4.0).unwrap().l2_norm(), 0.0);
    }
}
