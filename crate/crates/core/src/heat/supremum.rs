//! The supremum `J(T) = sup_y y^{α−2/p} (1 − e^{−p y² T})^{1/p}` and its
//! scale-free constant `K(α, p)`, with `J(T) = K · T^{1/p − α/2}`.

use super::HeatError;
use crate::spectral::GridSpec;

const COARSE_POINTS: usize = 4000;
const GOLDEN_TOL: f64 = 1e-10;
const CRITICAL_TOL: f64 = 1e-12;

/// Time exponent `σ = 1/p − α/2`.
pub fn sigma_exponent(p: f64, alpha: f64) -> f64 {
    1.0 / p - alpha / 2.0
}

fn check_domain(alpha: f64, p: f64) -> Result<bool, HeatError> {
    if !(alpha > 0.0 && alpha < 1.0) || !(p >= 2.0) || !p.is_finite() {
        return Err(HeatError::Domain(format!("need 0 < alpha < 1 and 2 <= p < inf (alpha={alpha}, p={p})")));
    }
    let ap = alpha * p;
    if ap > 2.0 + CRITICAL_TOL {
        return Err(HeatError::Domain(format!("alpha * p = {ap} exceeds 2")));
    }
    Ok((ap - 2.0).abs() <= CRITICAL_TOL)
}

/// Maximizer and maximum of a unimodal `f` on `[a, b]` by golden section.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a) > tol * (1.0 + c.abs()) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Maximizes `f` over `(0, upper]`: log-spaced coarse scan, unimodality
/// check by sign changes of the scan differences, golden-section polish.
fn maximize_on_half_line<F: Fn(f64) -> f64>(f: F, upper: f64) -> Result<(f64, f64), HeatError> {
    let lower = upper * 1e-9;
    let step = (upper / lower).ln() / (COARSE_POINTS - 1) as f64;
    let xs: Vec<f64> = (0..COARSE_POINTS).map(|i| lower * (step * i as f64).exp()).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();

    let mut sign_changes = 0;
    let mut prev = 0i8;
    for w in ys.windows(2) {
        let s = if w[1] > w[0] {
            1
        } else if w[1] < w[0] {
            -1
        } else {
            0
        };
        if s != 0 {
            if prev != 0 && s != prev {
                sign_changes += 1;
            }
            prev = s;
        }
    }
    if sign_changes > 1 {
        return Err(HeatError::NotUnimodal(sign_changes));
    }

    let best = ys
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    if best == 0 || best == COARSE_POINTS - 1 {
        return Err(HeatError::Bracket {
            at: xs[best],
            lower,
            upper,
        });
    }
    Ok(golden_section_max(&f, xs[best - 1], xs[best + 1], GOLDEN_TOL))
}

fn bracket_upper(p: f64) -> f64 {
    50.0 * 1f64.max(1.0 / p)
}

/// `K(α, p) = sup_{u>0} u^{(α−2/p)/2} (1 − e^{−pu})^{1/p}`; equals 1 when
/// `αp = 2`.
pub fn compute_k(alpha: f64, p: f64) -> Result<f64, HeatError> {
    if check_domain(alpha, p)? {
        return Ok(1.0);
    }
    let a = 0.5 * (alpha - 2.0 / p);
    let log_phi = |u: f64| a * u.ln() + (-(-p * u).exp_m1()).ln() / p;
    let (_, best) = maximize_on_half_line(log_phi, bracket_upper(p))?;
    Ok(best.exp())
}

/// `J(T)` maximized directly in `y = |ξ|`, independently of [`compute_k`].
pub fn compute_j(horizon: f64, alpha: f64, p: f64) -> Result<f64, HeatError> {
    let critical = check_domain(alpha, p)?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(HeatError::Domain(format!("horizon {horizon} must be positive")));
    }
    if critical {
        return Ok(1.0);
    }
    let b = alpha - 2.0 / p;
    let log_i = |y: f64| b * y.ln() + (-(-p * y * y * horizon).exp_m1()).ln() / p;
    let upper = (bracket_upper(p) / horizon).sqrt();
    let (_, best) = maximize_on_half_line(log_i, upper)?;
    Ok(best.exp())
}

/// The supremum of `I(|n|)` restricted to nonzero lattice modes of `grid`.
pub fn lattice_j(horizon: f64, alpha: f64, p: f64, grid: GridSpec) -> Result<f64, HeatError> {
    check_domain(alpha, p)?;
    let b = alpha - 2.0 / p;
    let mut best: f64 = 0.0;
    let mut seen = std::collections::HashSet::new();
    for idx in 1..grid.len() {
        let nn = grid.norm_sq(idx);
        if !seen.insert(nn as u64) {
            continue;
        }
        let y = nn.sqrt();
        let v = y.powf(b) * (-(-p * nn * horizon).exp_m1()).powf(1.0 / p);
        best = best.max(v);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_values() {
        assert_eq!(sigma_exponent(4.0, 0.5), 0.0);
        assert!((sigma_exponent(3.0, 0.5) - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn critical_case_is_one() {
        for t in [0.01, 1.0, 100.0] {
            assert_eq!(compute_j(t, 0.5, 4.0).unwrap(), 1.0);
        }
        assert_eq!(compute_k(0.5, 4.0).unwrap(), 1.0);
    }

    #[test]
    fn supercritical_product_is_rejected() {
        assert!(matches!(compute_k(0.75, 4.0), Err(HeatError::Domain(_))));
        assert!(matches!(compute_j(1.0, 0.9, 3.0), Err(HeatError::Domain(_))));
    }

    #[test]
    fn golden_section_on_parabola() {
        let (x, fx) = golden_section_max(|x| -(x - 0.3).powi(2) + 2.0, 0.0, 1.0, 1e-12);
        // the argmax is only determined to ~sqrt(eps)
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 2.0).abs() < 1e-15);
    }

    #[test]
    fn lattice_sup_below_continuous_sup() {
        let grid = GridSpec::new(16).unwrap();
        for t in [0.01, 0.1, 1.0] {
            let lat = lattice_j(t, 0.5, 3.0, grid).unwrap();
            let cont = compute_j(t, 0.5, 3.0).unwrap();
            assert!(lat <= cont * (1.0 + 1e-12));
        }
    }
}
