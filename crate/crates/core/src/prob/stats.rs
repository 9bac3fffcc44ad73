//! Small statistics helpers shared by the Monte Carlo experiments.

use statrs::function::erf::{erf, erfc};
use statrs::function::gamma::ln_gamma;

/// `E|Z|^r = 2^{r/2} Γ((r+1)/2) / √π` for a standard normal `Z`.
pub fn gaussian_abs_moment(r: f64) -> f64 {
    (0.5 * r * 2f64.ln() + ln_gamma(0.5 * (r + 1.0)) - 0.5 * std::f64::consts::PI.ln()).exp()
}

/// `(E|Z|^r)^{1/r}`.
pub fn gaussian_moment_norm(r: f64) -> f64 {
    gaussian_abs_moment(r).powf(1.0 / r)
}

/// `P(|Z| > z)` for a standard normal `Z`.
pub fn two_sided_tail(z: f64) -> f64 {
    erfc(z / std::f64::consts::SQRT_2)
}

/// `P(|Z| < z)` for a standard normal `Z`.
pub fn two_sided_mass(z: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else {
        erf(z / std::f64::consts::SQRT_2)
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// 95% Wilson score interval for `k` successes out of `n`.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    const Z: f64 = 1.959_963_984_540_054;
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let denom = 1.0 + Z * Z / n_f;
    let centre = (p + Z * Z / (2.0 * n_f)) / denom;
    let half = Z * ((p * (1.0 - p) + Z * Z / (4.0 * n_f)) / n_f).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Weighted least-squares line `y ≈ a + b x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    /// Weighted coefficient of determination.
    pub r_squared: f64,
}

pub fn weighted_line_fit(x: &[f64], y: &[f64], w: &[f64]) -> Option<LineFit> {
    if x.len() < 2 {
        return None;
    }
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for ((&xi, &yi), &wi) in x.iter().zip(y).zip(w) {
        sxx += wi * (xi - mx) * (xi - mx);
        sxy += wi * (xi - mx) * (yi - my);
        syy += wi * (yi - my) * (yi - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LineFit {
        intercept,
        slope,
        r_squared,
    })
}

/// Two-sided Kolmogorov-Smirnov statistic of `sample` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_moments() {
        assert!((gaussian_abs_moment(2.0) - 1.0).abs() < 1e-12);
        assert!((gaussian_abs_moment(4.0) - 3.0).abs() < 1e-12);
        assert!((gaussian_abs_moment(6.0) - 15.0).abs() < 1e-11);
        assert!((gaussian_moment_norm(4.0) - 3f64.powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn tails() {
        assert!((two_sided_tail(0.0) - 1.0).abs() < 1e-15);
        assert!((two_sided_tail(1.959_963_984_540_054) - 0.05).abs() < 1e-10);
        assert!((two_sided_mass(1.0) + two_sided_tail(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let f = weighted_line_fit(&x, &y, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-14);
        assert!((f.intercept - 2.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
        assert!(weighted_line_fit(&[1.0], &[1.0], &[1.0]).is_none());
    }

    #[test]
    fn wilson_contains_estimate() {
        let (lo, hi) = wilson_interval(30, 100);
        assert!(lo < 0.3 && 0.3 < hi);
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0);
    }
}
