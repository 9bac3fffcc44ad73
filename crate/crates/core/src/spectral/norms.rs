use super::field::inverse_transform_unchecked;
use super::{RealField, SpectralError, SpectralField};

/// Lebesgue exponent `q ∈ [1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(q) => 1.0 / q,
            Exponent::Infinity => 0.0,
        }
    }
}

impl From<f64> for Exponent {
    fn from(q: f64) -> Self {
        if q.is_infinite() {
            Exponent::Infinity
        } else {
            Exponent::Finite(q)
        }
    }
}

/// Homogeneous Sobolev norm `(Σ_{n≠0} |n|^{2s} |û(n)|²)^{1/2}`.
///
/// Negative orders require a vanishing mean mode.
pub fn sobolev_norm(f: &SpectralField, s: f64) -> Result<f64, SpectralError> {
    if s < 0.0 && !f.is_mean_zero() {
        return Err(SpectralError::NegativeOrderOnNonzeroMean);
    }
    Ok(sobolev_norm_sq_unchecked(f, s).sqrt())
}

pub(crate) fn sobolev_norm_sq_unchecked(f: &SpectralField, s: f64) -> f64 {
    let grid = f.grid();
    let len = grid.len();
    let coeffs = f.coeffs();
    let mut acc = 0.0;
    for idx in 1..len {
        let e = coeffs[idx].norm_sqr() + coeffs[len + idx].norm_sqr() + coeffs[2 * len + idx].norm_sqr();
        if e == 0.0 {
            continue;
        }
        let w = if s == 0.0 {
            1.0
        } else if s == 1.0 {
            grid.norm_sq(idx)
        } else {
            grid.norm_sq(idx).powf(s)
        };
        acc += w * e;
    }
    acc
}

/// Grid-quadrature `L^q` norm of the pointwise vector magnitude.
pub fn lebesgue_norm(f: &RealField, q: impl Into<Exponent>) -> Result<f64, SpectralError> {
    let mag = f.magnitude();
    lebesgue_norm_of_magnitude(&mag, f.grid().cell_volume(), q.into())
}

pub(crate) fn lebesgue_norm_of_magnitude(mag: &[f64], cell: f64, q: Exponent) -> Result<f64, SpectralError> {
    match q {
        Exponent::Infinity => Ok(mag.iter().copied().fold(0.0, f64::max)),
        Exponent::Finite(q) if q >= 1.0 && q.is_finite() => {
            let sum: f64 = if q == 2.0 {
                mag.iter().map(|m| m * m).sum()
            } else {
                mag.iter().map(|m| m.powf(q)).sum()
            };
            Ok((sum * cell).powf(1.0 / q))
        }
        Exponent::Finite(q) => Err(SpectralError::InvalidExponent(q)),
    }
}

/// Bernstein ratio `‖F‖_{L^q} / (N^{3(1/p−1/q)} ‖F‖_{L^p})` where `N` is
/// the spectral support radius of `F`.
pub fn bernstein_ratio(
    f: &SpectralField,
    p: impl Into<Exponent>,
    q: impl Into<Exponent>,
) -> Result<f64, SpectralError> {
    let (p, q) = (p.into(), q.into());
    if p.reciprocal() < q.reciprocal() {
        return Err(SpectralError::InvalidExponent(1.0 / q.reciprocal()));
    }
    let radius = f.support_radius();
    if radius == 0.0 && f.l2_norm() == 0.0 {
        return Err(SpectralError::ZeroField);
    }
    let real = inverse_transform_unchecked(f);
    let lq = lebesgue_norm(&real, q)?;
    let lp = lebesgue_norm(&real, p)?;
    if lp == 0.0 {
        return Err(SpectralError::ZeroField);
    }
    let n = radius.max(1.0);
    Ok(lq / (n.powf(3.0 * (p.reciprocal() - q.reciprocal())) * lp))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use num_complex::Complex64;

    use super::*;
    use crate::spectral::{forward_transform, inverse_transform, GridSpec};

    #[test]
    fn one_term_sobolev() {
        let grid = GridSpec::new(8).unwrap();
        let mut f = SpectralField::zeros(grid);
        f.coeffs_mut()[grid.index([2, 0, 0])] = Complex64::new(1.0, 0.0);
        assert!((sobolev_norm(&f, -0.5).unwrap() - 2f64.powf(-0.5)).abs() < 1e-15);
    }

    #[test]
    fn two_term_sobolev() {
        let grid = GridSpec::new(8).unwrap();
        let mut f = SpectralField::zeros(grid);
        f.coeffs_mut()[grid.index([1, 0, 0])] = Complex64::new(1.0, 0.0);
        f.coeffs_mut()[grid.len() + grid.index([0, 3, 0])] = Complex64::new(0.0, 1.0);
        assert!((sobolev_norm(&f, 1.0).unwrap() - 10f64.sqrt()).abs() < 1e-14);
        assert!((sobolev_norm(&f, 0.0).unwrap() - f.l2_norm()).abs() < 1e-15);
    }

    #[test]
    fn negative_order_needs_zero_mean() {
        let grid = GridSpec::new(4).unwrap();
        let mut f = SpectralField::zeros(grid);
        f.coeffs_mut()[0] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            sobolev_norm(&f, -0.25),
            Err(SpectralError::NegativeOrderOnNonzeroMean)
        ));
        assert!(sobolev_norm(&f, 0.5).is_ok());
    }

    #[test]
    fn constant_field_l2() {
        let grid = GridSpec::new(4).unwrap();
        let c = -1.7;
        let f = RealField::from_fn(grid, |_| [c, 0.0, 0.0]);
        let got = lebesgue_norm(&f, 2.0).unwrap();
        assert!((got - c.abs() * (2.0 * PI).powf(1.5)).abs() < 1e-12);
        assert_eq!(lebesgue_norm(&f, f64::INFINITY).unwrap(), c.abs());
        assert!(lebesgue_norm(&f, 0.5).is_err());
    }

    #[test]
    fn cos_fourth_power_against_closed_form() {
        // ∫_{T³} cos⁴x₁ = (3π/4)·(2π)²
        let grid = GridSpec::new(8).unwrap();
        let f = RealField::from_fn(grid, |x| [x[0].cos(), 0.0, 0.0]);
        let expected = (0.75 * PI * (2.0 * PI).powi(2)).powf(0.25);
        assert!((lebesgue_norm(&f, 4.0).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn plancherel_on_band_limited_field() {
        let grid = GridSpec::new(8).unwrap();
        let f = RealField::from_fn(grid, |x| {
            [(x[0] + 2.0 * x[1]).sin(), (x[2]).cos() - 0.3 * (x[0] - x[2]).sin(), 0.1 * (3.0 * x[1]).cos()]
        });
        let fh = forward_transform(&f);
        let back = inverse_transform(&fh).unwrap();
        let l2 = lebesgue_norm(&back, 2.0).unwrap();
        assert!((l2 - sobolev_norm(&fh, 0.0).unwrap()).abs() < 1e-10 * fh.l2_norm());
    }

    #[test]
    fn bernstein_single_mode_closed_form() {
        for n in [1i64, 2, 4] {
            let grid = GridSpec::new(16).unwrap();
            let mut f = SpectralField::zeros(grid);
            f.set_pair(0, [0, 0, n], Complex64::new(1.3, 0.0));
            let got = bernstein_ratio(&f, 2.0, f64::INFINITY).unwrap();
            let want = 2f64.sqrt() * (2.0 * PI).powf(-1.5) / (n as f64).powf(1.5);
            assert!((got - want).abs() < 1e-12 * want, "N={n}");
            let same = bernstein_ratio(&f, 3.0, 3.0).unwrap();
            assert!((same - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn bernstein_rejects_zero_and_bad_order() {
        let grid = GridSpec::new(4).unwrap();
        let z = SpectralField::zeros(grid);
        assert!(matches!(bernstein_ratio(&z, 2.0, 4.0), Err(SpectralError::ZeroField)));
        let mut f = SpectralField::zeros(grid);
        f.set_pair(0, [1, 0, 0], Complex64::new(1.0, 0.0));
        assert!(bernstein_ratio(&f, 4.0, 2.0).is_err());
    }
}
