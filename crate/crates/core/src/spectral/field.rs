use std::f64::consts::PI;

use num_complex::Complex64;

use super::fft::Fft3;
use super::{GridSpec, SpectralError};

/// Relative tolerance used for the conjugate-symmetry invariant.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Three-component Fourier coefficients on the lattice of a [`GridSpec`],
/// stored component-major in FFT order.
///
/// Coefficients are taken against the orthonormal basis
/// `e_n(x) = (2π)^{−3/2} e^{i n·x}`, so the ℓ² norm of the coefficients is
/// the L² norm of the physical field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
    hermitian: bool,
}

/// Point values of a real vector field on the physical grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: GridSpec,
    values: Vec<f64>,
}

/// Scalar Fourier coefficients, e.g. a divergence.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSpectrum {
    pub grid: GridSpec,
    pub coeffs: Vec<Complex64>,
}

impl ScalarSpectrum {
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::default(); 3 * grid.len()],
            hermitian: true,
        }
    }

    /// Wraps raw coefficients; the hermitian flag is computed from the data.
    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self, SpectralError> {
        if coeffs.len() != 3 * grid.len() {
            return Err(SpectralError::LengthMismatch {
                expected: 3 * grid.len(),
                got: coeffs.len(),
            });
        }
        let mut f = Self {
            grid,
            coeffs,
            hermitian: false,
        };
        f.hermitian = f.hermitian_defect() <= HERMITIAN_TOL;
        Ok(f)
    }

    pub(crate) fn from_parts(grid: GridSpec, coeffs: Vec<Complex64>, hermitian: bool) -> Self {
        debug_assert_eq!(coeffs.len(), 3 * grid.len());
        Self {
            grid,
            coeffs,
            hermitian,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Mutable access; clears the hermitian flag, call
    /// [`SpectralField::refresh_hermitian`] afterwards if it matters.
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        self.hermitian = false;
        &mut self.coeffs
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let n = self.grid.len();
        &self.coeffs[c * n..(c + 1) * n]
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn get(&self, c: usize, n: [i64; 3]) -> Complex64 {
        self.coeffs[c * self.grid.len() + self.grid.index(n)]
    }

    /// Sets the coefficient at `n` and its conjugate partner at `−n`.
    pub fn set_pair(&mut self, c: usize, n: [i64; 3], value: Complex64) {
        let len = self.grid.len();
        let idx = self.grid.index(n);
        let cj = self.grid.conj_index(idx);
        self.coeffs[c * len + idx] = value;
        self.coeffs[c * len + cj] = value.conj();
        if idx == cj {
            self.coeffs[c * len + idx] = Complex64::new(value.re, 0.0);
        }
    }

    /// Vector `û(n)` stored at flat mode index `idx`.
    #[inline]
    pub fn vector_at(&self, idx: usize) -> [Complex64; 3] {
        let n = self.grid.len();
        [self.coeffs[idx], self.coeffs[n + idx], self.coeffs[2 * n + idx]]
    }

    #[inline]
    pub(crate) fn set_vector(&mut self, idx: usize, v: [Complex64; 3]) {
        let n = self.grid.len();
        self.coeffs[idx] = v[0];
        self.coeffs[n + idx] = v[1];
        self.coeffs[2 * n + idx] = v[2];
    }

    /// Largest `|û(n) − conj(û(−n))|`, relative to the ℓ² norm of the field.
    pub fn hermitian_defect(&self) -> f64 {
        let len = self.grid.len();
        let norm = self.l2_norm();
        if norm == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for c in 0..3 {
            let comp = &self.coeffs[c * len..(c + 1) * len];
            for idx in 0..len {
                let d = (comp[idx] - comp[self.grid.conj_index(idx)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst / norm
    }

    pub fn refresh_hermitian(&mut self) -> bool {
        self.hermitian = self.hermitian_defect() <= HERMITIAN_TOL;
        self.hermitian
    }

    /// ℓ² norm of all coefficients (equal to the L² norm of the field).
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Whether the mean mode vanishes exactly.
    pub fn is_mean_zero(&self) -> bool {
        let n = self.grid.len();
        (0..3).all(|c| self.coeffs[c * n] == Complex64::default())
    }

    /// Multiplies every mode by a real scalar depending only on the mode
    /// index. Real even multipliers preserve the hermitian flag.
    pub fn apply_multiplier<F: Fn(usize) -> f64>(&self, mult: F) -> Self {
        let len = self.grid.len();
        let mut out = self.coeffs.clone();
        for idx in 0..len {
            let s = mult(idx);
            for c in 0..3 {
                out[c * len + idx] *= s;
            }
        }
        Self::from_parts(self.grid, out, self.hermitian)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_parts(
            self.grid,
            self.coeffs.iter().map(|c| c * s).collect(),
            self.hermitian,
        )
    }

    pub fn add(&self, other: &Self) -> Result<Self, SpectralError> {
        self.check_grid(other)?;
        Ok(Self::from_parts(
            self.grid,
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
            self.hermitian && other.hermitian,
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SpectralError> {
        self.check_grid(other)?;
        Ok(Self::from_parts(
            self.grid,
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
            self.hermitian && other.hermitian,
        ))
    }

    pub(crate) fn check_grid(&self, other: &Self) -> Result<(), SpectralError> {
        if self.grid != other.grid {
            return Err(SpectralError::GridMismatch {
                left: self.grid.size(),
                right: other.grid.size(),
            });
        }
        Ok(())
    }

    /// Largest per-axis frequency carrying a nonzero coefficient.
    pub fn support_radius(&self) -> f64 {
        let len = self.grid.len();
        let mut r: f64 = 0.0;
        for idx in 0..len {
            if (0..3).any(|c| self.coeffs[c * len + idx] != Complex64::default()) {
                r = r.max(self.grid.norm(idx));
            }
        }
        r
    }
}

impl RealField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![0.0; 3 * grid.len()],
        }
    }

    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self, SpectralError> {
        if values.len() != 3 * grid.len() {
            return Err(SpectralError::LengthMismatch {
                expected: 3 * grid.len(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(x)` at every grid point.
    pub fn from_fn<F: Fn([f64; 3]) -> [f64; 3]>(grid: GridSpec, f: F) -> Self {
        let len = grid.len();
        let mut values = vec![0.0; 3 * len];
        for idx in 0..len {
            let v = f(grid.point(idx));
            for c in 0..3 {
                values[c * len + idx] = v[c];
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let n = self.grid.len();
        &self.values[c * n..(c + 1) * n]
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> Vec<f64> {
        let n = self.grid.len();
        (0..n)
            .map(|i| {
                let (a, b, c) = (self.values[i], self.values[n + i], self.values[2 * n + i]);
                (a * a + b * b + c * c).sqrt()
            })
            .collect()
    }
}

/// Coefficient scale of the forward transform, `(2π)^{3/2} / M³`.
fn forward_scale(grid: GridSpec) -> f64 {
    (2.0 * PI).powf(1.5) / grid.len() as f64
}

/// Coefficient scale of the inverse transform, `(2π)^{−3/2}`.
fn inverse_scale() -> f64 {
    (2.0 * PI).powf(-1.5)
}

/// Forward transform of one scalar component held as complex values.
pub(crate) fn forward_scalar(grid: GridSpec, data: &mut [Complex64]) {
    Fft3::for_size(grid.size()).forward(data);
    let s = forward_scale(grid);
    data.iter_mut().for_each(|c| *c *= s);
}

/// Inverse transform of one scalar component; the result keeps its
/// (roundoff-level) imaginary part.
pub(crate) fn inverse_scalar(grid: GridSpec, data: &mut [Complex64]) {
    Fft3::for_size(grid.size()).inverse(data);
    let s = inverse_scale();
    data.iter_mut().for_each(|c| *c *= s);
}

/// Transforms point values to spectral coefficients.
pub fn forward_transform(f: &RealField) -> SpectralField {
    let grid = f.grid;
    let len = grid.len();
    let mut coeffs = Vec::with_capacity(3 * len);
    for c in 0..3 {
        let mut buf: Vec<Complex64> = f.component(c).iter().map(|&x| Complex64::new(x, 0.0)).collect();
        forward_scalar(grid, &mut buf);
        coeffs.extend(buf);
    }
    SpectralField::from_parts(grid, coeffs, true)
}

/// Transforms spectral coefficients back to point values.
pub fn inverse_transform(f: &SpectralField) -> Result<RealField, SpectralError> {
    let defect = f.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(SpectralError::NonHermitianInput { defect });
    }
    Ok(inverse_transform_unchecked(f))
}

/// Inverse transform that drops imaginary parts without checking symmetry.
pub(crate) fn inverse_transform_unchecked(f: &SpectralField) -> RealField {
    let grid = f.grid;
    let len = grid.len();
    let mut values = Vec::with_capacity(3 * len);
    for c in 0..3 {
        let mut buf = f.component(c).to_vec();
        inverse_scalar(grid, &mut buf);
        values.extend(buf.iter().map(|z| z.re));
    }
    RealField { grid, values }
}
