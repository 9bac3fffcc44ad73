use num_complex::Complex64;

use super::bilinear::Bilinear;
use super::ledger::EnergyLedger;
use super::{GalerkinError, Snapshot, Trajectory};
use crate::spectral::{inverse_transform, lebesgue_norm, leray_vector, sobolev_norm, GridSpec, SpectralField};

/// Relative slack allowed in the exact inequalities.
pub const INEQUALITY_SLACK: f64 = 1e-10;

/// Outcome of an interpolation inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub passed: bool,
}

impl InterpolationCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            passed: lhs <= rhs * (1.0 + INEQUALITY_SLACK),
        }
    }

    /// `rhs − lhs`, relative to `rhs`.
    pub fn margin(&self) -> f64 {
        if self.rhs == 0.0 {
            0.0
        } else {
            (self.rhs - self.lhs) / self.rhs
        }
    }
}

/// `‖v‖_{L^{18/7}} ≤ ‖v‖_{L²}^{2/3} ‖v‖_{L⁶}^{1/3}`.
pub fn holder_interpolation_check(v: &SpectralField) -> Result<InterpolationCheck, GalerkinError> {
    let real = inverse_transform(v)?;
    let lhs = lebesgue_norm(&real, 18.0 / 7.0)?;
    let l2 = lebesgue_norm(&real, 2.0)?;
    let l6 = lebesgue_norm(&real, 6.0)?;
    Ok(InterpolationCheck::new(lhs, l2.powf(2.0 / 3.0) * l6.powf(1.0 / 3.0)))
}

/// `‖w‖_{L²} ≤ ‖w‖_{Ḣ^{−2}}^{1/3} ‖w‖_{Ḣ¹}^{2/3}` for mean-zero `w`.
pub fn negative_interpolation_check(w: &SpectralField) -> Result<InterpolationCheck, GalerkinError> {
    let lhs = sobolev_norm(w, 0.0)?;
    let rhs = sobolev_norm(w, -2.0)?.powf(1.0 / 3.0) * sobolev_norm(w, 1.0)?.powf(2.0 / 3.0);
    Ok(InterpolationCheck::new(lhs, rhs))
}

/// `Σ_n conj(â(n))·ℙ b̂(n)`, i.e. `∫ a·ℙb dx` for real fields.
fn pairing_with_leray(grid: GridSpec, a: &SpectralField, b: &[Complex64]) -> f64 {
    let len = grid.len();
    let mut acc = 0.0;
    for idx in 1..len {
        let p = leray_vector(grid.mode(idx), [b[idx], b[len + idx], b[2 * len + idx]]);
        let av = a.vector_at(idx);
        acc += (0..3).map(|c| (av[c].conj() * p[c]).re).sum::<f64>();
    }
    acc
}

fn physical(bil: &mut Bilinear, f: &SpectralField) -> Vec<f64> {
    let mut out = vec![0.0; f.coeffs().len()];
    bil.synthesize_into(f.coeffs(), 3, &mut out);
    out
}

/// `|∫ v·ℙ∇·(v ⊗ v) dx| / (‖v‖_{L²} ‖∇v‖²_{L²})` for dealiased,
/// divergence-free `v`; zero for `v = 0`.
pub fn cancellation_check(v: &SpectralField) -> f64 {
    let grid = v.grid();
    let scale = v.l2_norm() * sobolev_norm_sq(v, 1.0);
    if scale == 0.0 {
        return 0.0;
    }
    let mut bil = Bilinear::new(grid);
    let pv = physical(&mut bil, v);
    let mut div = vec![Complex64::default(); 3 * grid.len()];
    bil.divergence_of_product(&pv, &pv, true, &mut div);
    pairing_with_leray(grid, v, &div).abs() / scale
}

/// `|∫ v·ℙ∇·(v ⊗ g) dx| / (‖v‖_{L²} ‖∇v‖_{L²} ‖∇g‖_{L²})`, where
/// `(∇·(v⊗g))_i = ∂_j(v_i g_j)`; vanishes for divergence-free `g`.
pub fn transport_cancellation_check(v: &SpectralField, g: &SpectralField) -> Result<f64, GalerkinError> {
    let grid = v.grid();
    if g.grid() != grid {
        return Err(GalerkinError::InvalidConfig("fields live on different grids".into()));
    }
    let scale = v.l2_norm() * sobolev_norm_sq(v, 1.0).sqrt() * sobolev_norm_sq(g, 1.0).sqrt();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let mut bil = Bilinear::new(grid);
    let (pv, pg) = (physical(&mut bil, v), physical(&mut bil, g));
    let mut div = vec![Complex64::default(); 3 * grid.len()];
    bil.divergence_of_product(&pv, &pg, false, &mut div);
    Ok(pairing_with_leray(grid, v, &div).abs() / scale)
}

fn sobolev_norm_sq(f: &SpectralField, s: f64) -> f64 {
    crate::spectral::sobolev_norm_sq_unchecked(f, s)
}

/// `û_λ(λm, t/λ²) = λ û(m, t)` on `target`: the Navier-Stokes scaling
/// `u_λ(x, t) = λ u(λx, λ²t)` for integer `λ`.
pub fn scaling_transform(
    trajectory: &Trajectory,
    lambda: u32,
    target: GridSpec,
) -> Result<Trajectory, GalerkinError> {
    if lambda == 0 {
        return Err(GalerkinError::InvalidConfig("scale factor must be a positive integer".into()));
    }
    let l = lambda as i64;
    let lf = lambda as f64;
    let available = target.dealias_cutoff();
    let mut snapshots = Vec::with_capacity(trajectory.snapshots.len());
    for snap in &trajectory.snapshots {
        let src = snap.v.grid();
        let mut out = SpectralField::zeros(target);
        for idx in 0..src.len() {
            let u = snap.v.vector_at(idx);
            if u.iter().all(|z| *z == Complex64::default()) {
                continue;
            }
            let m = src.mode(idx);
            let n = [l * m[0], l * m[1], l * m[2]];
            let needed = n.iter().map(|v| v.abs()).max().unwrap();
            if needed > available {
                return Err(GalerkinError::FrequencyOverflow { needed, available });
            }
            let coeffs = out.coeffs_mut();
            let tl = target.len();
            let t_idx = target.index(n);
            for c in 0..3 {
                coeffs[c * tl + t_idx] = lf * u[c];
            }
        }
        out.refresh_hermitian();
        snapshots.push(Snapshot {
            t: snap.t / (lf * lf),
            v: out,
        });
    }
    Ok(Trajectory {
        snapshots,
        ledger: EnergyLedger::default(),
        steps: trajectory.steps,
        dt: trajectory.dt / (lf * lf),
    })
}

/// Relative residual of `∂_t u − Δu + ℙ∇·(u ⊗ u) = 0` at interior
/// snapshots, with a centred time difference.
pub fn nse_residual(trajectory: &Trajectory) -> Result<Vec<f64>, GalerkinError> {
    let snaps = &trajectory.snapshots;
    let Some(first) = snaps.first() else {
        return Ok(Vec::new());
    };
    let grid = first.v.grid();
    let len = grid.len();
    let mut bil = Bilinear::new(grid);
    let mut out = Vec::new();
    for w in snaps.windows(3) {
        let (a, b, c) = (&w[0], &w[1], &w[2]);
        let h = c.t - a.t;
        let pu = physical(&mut bil, &b.v);
        let mut div = vec![Complex64::default(); 3 * len];
        bil.divergence_of_product(&pu, &pu, true, &mut div);
        let (mut res, mut scale_lin, mut scale_nl) = (0.0, 0.0, 0.0);
        for idx in 1..len {
            let nsq = grid.norm_sq(idx);
            let p = leray_vector(grid.mode(idx), [div[idx], div[len + idx], div[2 * len + idx]]);
            let ub = b.v.vector_at(idx);
            let (ua, uc) = (a.v.vector_at(idx), c.v.vector_at(idx));
            for k in 0..3 {
                let dt = (uc[k] - ua[k]) / h;
                res += (dt + nsq * ub[k] + p[k]).norm_sqr();
                scale_lin += (nsq * ub[k]).norm_sqr();
                scale_nl += p[k].norm_sqr();
            }
        }
        let scale = scale_lin.sqrt() + scale_nl.sqrt();
        out.push(if scale == 0.0 { 0.0 } else { res.sqrt() / scale });
    }
    Ok(out)
}
