//! Invariant suite: fast, deterministic checks of the exact identities and
//! inequalities the rest of the crate relies on.

use num_complex::Complex64;

use crate::galerkin::{
    cancellation_check, energy_identity_residual, holder_interpolation_check, negative_interpolation_check,
    restart_full_nse, solve, transport_cancellation_check, SolverConfig,
};
use crate::heat::{compute_j, heat_evolve, mode_constant, sigma_exponent};
use crate::prob::event_membership;
use crate::prob::stats::gaussian_abs_moment;
use crate::randomizer::{draw_gaussians, gaussian_field, make_data, randomize, DataFamily};
use crate::spectral::{
    forward_transform, inverse_transform, leray_project, ramp, read_snapshot, relative_divergence, write_snapshot,
    GridSpec, SpectralField,
};

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn() -> Result<String, String>;

fn expect(ok: bool, detail: String) -> Result<String, String> {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: &SpectralField, b: &SpectralField) -> f64 {
    a.sub(b).expect("same grid").l2_norm() / b.l2_norm().max(f64::MIN_POSITIVE)
}

/// Divergence-free band field on `grid`, smoothly cut at `scale`.
fn smooth_band_field(grid: GridSpec, seed: u64, scale: f64) -> SpectralField {
    let f = gaussian_field(grid, seed);
    leray_project(&f.apply_multiplier(|i| {
        if grid.in_dealiased_band(i) {
            ramp(grid.norm(i) / scale)
        } else {
            0.0
        }
    }))
}

fn leray_idempotent() -> Result<String, String> {
    let f = gaussian_field(GridSpec::new(32).unwrap(), 1);
    let p = leray_project(&f);
    let err = rel(&leray_project(&p), &p);
    expect(err <= 1e-12, format!("relative change {err:.2e}"))
}

fn projection_divergence_free() -> Result<String, String> {
    let p = leray_project(&gaussian_field(GridSpec::new(32).unwrap(), 2));
    let d = relative_divergence(&p);
    expect(d <= 1e-12, format!("relative divergence {d:.2e}"))
}

fn transform_round_trip() -> Result<String, String> {
    let f = gaussian_field(GridSpec::new(32).unwrap(), 3);
    let back = forward_transform(&inverse_transform(&f).map_err(|e| e.to_string())?);
    let err = rel(&back, &f);
    expect(err <= 1e-12, format!("relative error {err:.2e}"))
}

fn heat_mode_decay() -> Result<String, String> {
    let grid = GridSpec::new(16).unwrap();
    let mut f = SpectralField::zeros(grid);
    f.set_pair(0, [0, 2, 3], Complex64::new(0.3, -1.1));
    let t = 0.37;
    let g = heat_evolve(&f, t).map_err(|e| e.to_string())?;
    let expect_v = f.get(0, [0, 2, 3]) * (-13.0 * t).exp();
    let err = (g.get(0, [0, 2, 3]) - expect_v).norm();
    expect(err <= 1e-13, format!("mode error {err:.2e}"))
}

fn heat_semigroup() -> Result<String, String> {
    let f = gaussian_field(GridSpec::new(16).unwrap(), 4);
    let ab = heat_evolve(&heat_evolve(&f, 0.013).unwrap(), 0.029).unwrap();
    let direct = heat_evolve(&f, 0.042).unwrap();
    let err = rel(&ab, &direct);
    expect(err <= 1e-12, format!("relative error {err:.2e}"))
}

fn sup_scaling_law() -> Result<String, String> {
    let (alpha, p) = (0.5, 3.0);
    let sigma = sigma_exponent(p, alpha);
    let vals: Vec<f64> = [1e-2, 1.0, 1e2]
        .iter()
        .map(|&t| compute_j(t, alpha, p).map(|j| j / t.powf(sigma)))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let spread = vals.iter().map(|v| (v / vals[0] - 1.0).abs()).fold(0.0, f64::max);
    expect(spread <= 1e-6, format!("relative spread of J/T^sigma {spread:.2e}"))
}

fn critical_sup_is_one() -> Result<String, String> {
    let j = compute_j(0.7, 0.5, 4.0).map_err(|e| e.to_string())?;
    expect((j - 1.0).abs() <= 1e-10, format!("J = {j}"))
}

fn mode_constant_is_the_maximum() -> Result<String, String> {
    let s = 0.75;
    let brute = (1..200_000)
        .map(|k| {
            let y = k as f64 * 1e-5;
            y.powf(s) * (-y * y).exp()
        })
        .fold(0.0, f64::max);
    let c = mode_constant(s);
    expect(c >= brute && c - brute <= 1e-8, format!("closed form {c}, grid max {brute}"))
}

fn event_boundary_excluded() -> Result<String, String> {
    let ok = !event_membership(2.0, 1.0, 2.0) && event_membership(0.0, 1e-9, 1.0);
    expect(ok, "membership uses a strict inequality".into())
}

fn gaussian_fourth_moment() -> Result<String, String> {
    let m = gaussian_abs_moment(4.0);
    expect((m - 3.0).abs() <= 1e-12, format!("E|Z|^4 = {m}"))
}

fn draws_are_reproducible() -> Result<String, String> {
    let grid = GridSpec::new(8).unwrap();
    let ok = draw_gaussians(grid, 9) == draw_gaussians(grid, 9) && draw_gaussians(grid, 9) != draw_gaussians(grid, 10);
    expect(ok, "identical seeds give identical draws".into())
}

fn snapshot_round_trip() -> Result<String, String> {
    let f = gaussian_field(GridSpec::new(8).unwrap(), 5);
    let mut bytes = Vec::new();
    write_snapshot(&f, &mut bytes).map_err(|e| e.to_string())?;
    let back = read_snapshot(bytes.as_slice()).map_err(|e| e.to_string())?;
    expect(back == f, format!("{} bytes", bytes.len()))
}

fn trilinear_cancellation() -> Result<String, String> {
    let v = smooth_band_field(GridSpec::new(16).unwrap(), 6, 3.0);
    let c = cancellation_check(&v);
    expect(c <= 1e-10, format!("normalized integral {c:.2e}"))
}

fn transport_cancellation() -> Result<String, String> {
    let grid = GridSpec::new(16).unwrap();
    let v = smooth_band_field(grid, 7, 3.0);
    let g = smooth_band_field(grid, 8, 4.0);
    let c = transport_cancellation_check(&v, &g).map_err(|e| e.to_string())?;
    expect(c <= 1e-10, format!("normalized integral {c:.2e}"))
}

fn holder_interpolation() -> Result<String, String> {
    let v = smooth_band_field(GridSpec::new(16).unwrap(), 9, 3.0);
    let c = holder_interpolation_check(&v).map_err(|e| e.to_string())?;
    expect(c.passed, format!("lhs {:.6e} rhs {:.6e}", c.lhs, c.rhs))
}

fn negative_sobolev_interpolation() -> Result<String, String> {
    let v = smooth_band_field(GridSpec::new(16).unwrap(), 10, 3.0);
    let c = negative_interpolation_check(&v).map_err(|e| e.to_string())?;
    expect(c.passed, format!("lhs {:.6e} rhs {:.6e}", c.lhs, c.rhs))
}

fn zero_forcing_fixed_point() -> Result<String, String> {
    let grid = GridSpec::new(8).unwrap();
    let cfg = SolverConfig::new(SpectralField::zeros(grid), 2.0, 0.01, 0.05, 0.5);
    let traj = solve(&cfg).map_err(|e| e.to_string())?;
    let max = traj.snapshots.iter().map(|s| s.v.l2_norm()).fold(0.0, f64::max);
    expect(max == 0.0, format!("max |v| = {max:e}"))
}

fn small_run(dt: f64) -> Result<crate::galerkin::Trajectory, String> {
    let grid = GridSpec::new(8).unwrap();
    let data = make_data(grid, &DataFamily::PowerLaw { gamma: 1.5, amplitude: 1.0 }, 0.5, 1).map_err(|e| e.to_string())?;
    let f = randomize(&data.field, &draw_gaussians(grid, 2)).map_err(|e| e.to_string())?.randomized;
    solve(&SolverConfig::new(f, 2.0, dt, 0.2, 0.5)).map_err(|e| e.to_string())
}

fn energy_identity_second_order() -> Result<String, String> {
    let a = *energy_identity_residual(&small_run(0.01)?).last().unwrap();
    let b = *energy_identity_residual(&small_run(0.005)?).last().unwrap();
    let ratio = a.abs() / b.abs();
    expect((3.0..5.0).contains(&ratio), format!("residual ratio under dt halving {ratio:.3}"))
}

fn energy_starts_at_zero() -> Result<String, String> {
    let traj = small_run(0.01)?;
    let ev = traj.ledger.e_v();
    let finite = ev.iter().all(|e| e.is_finite());
    expect(ev[0] == 0.0 && finite, format!("E(v,0) = {}, all finite: {finite}", ev[0]))
}

fn restart_energy_inequality() -> Result<String, String> {
    let traj = small_run(0.01)?;
    let grid = traj.last().v.grid();
    let data = make_data(grid, &DataFamily::PowerLaw { gamma: 1.5, amplitude: 1.0 }, 0.5, 1).unwrap();
    let f = randomize(&data.field, &draw_gaussians(grid, 2)).unwrap().randomized;
    let u = heat_evolve(&f, 0.2).unwrap().add(&traj.last().v).unwrap();
    let cfg = SolverConfig::new(f, 2.0, 0.01, 0.2, 0.5);
    let r = restart_full_nse(&u, &cfg).map_err(|e| e.to_string())?;
    let worst = r.ledger.leray_ratio().into_iter().fold(f64::MIN, f64::max);
    expect(worst <= 1.0 + 1e-6, format!("max (|u|^2 + 2 int |grad u|^2)/|u(0)|^2 = {worst:.9}"))
}

/// Every invariant in the suite, by name.
pub fn invariant_suite() -> Vec<(&'static str, Check)> {
    vec![
        ("leray projection is idempotent", leray_idempotent as Check),
        ("leray projection is divergence free", projection_divergence_free),
        ("transform round trip", transform_round_trip),
        ("heat flow decays each mode exactly", heat_mode_decay),
        ("heat flow is a semigroup", heat_semigroup),
        ("time supremum scales as a power of T", sup_scaling_law),
        ("time supremum is 1 at alpha*p = 2", critical_sup_is_one),
        ("mode-wise decay constant is the maximum", mode_constant_is_the_maximum),
        ("event membership is strict", event_boundary_excluded),
        ("gaussian absolute moments", gaussian_fourth_moment),
        ("random draws are reproducible", draws_are_reproducible),
        ("snapshot round trip", snapshot_round_trip),
        ("trilinear cancellation", trilinear_cancellation),
        ("transport cancellation", transport_cancellation),
        ("hoelder interpolation", holder_interpolation),
        ("negative sobolev interpolation", negative_sobolev_interpolation),
        ("zero forcing is a fixed point", zero_forcing_fixed_point),
        ("energy starts at zero and stays finite", energy_starts_at_zero),
        ("energy identity residual is second order", energy_identity_second_order),
        ("restart obeys the energy inequality", restart_energy_inequality),
    ]
}

pub fn run_invariant_suite() -> Vec<InvariantResult> {
    invariant_suite()
        .into_iter()
        .map(|(name, check)| {
            let (passed, detail) = match check() {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            InvariantResult { name, passed, detail }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        for r in run_invariant_suite() {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }
}
