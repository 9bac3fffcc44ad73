use num_complex::Complex64;

use super::bilinear::Bilinear;
use super::ledger::{EnergyLedger, LedgerSample};
use super::{GalerkinError, Integrator, SolverConfig, Truncation};
use crate::spectral::{leray_vector, ramp, relative_divergence, GridSpec, SpectralField};

/// Invariant tolerance for states handed to the solver.
const STATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub t: f64,
    pub step: usize,
    pub vhat: SpectralField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub v: SpectralField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub ledger: EnergyLedger,
    pub steps: usize,
    pub dt: f64,
}

impl Trajectory {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectories start with the initial snapshot")
    }

    /// Snapshot at time `t`, if one was stored.
    pub fn at(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| (s.t - t).abs() <= 1e-12 * t.abs().max(1.0))
    }
}

/// Integrating-factor RK4 integrator with reusable transform buffers.
pub struct Solver {
    cfg: SolverConfig,
    bil: Bilinear,
    /// `ρ(|n|/N)` on the dealiased band, 0 outside.
    rho: Vec<f64>,
    nsq: Vec<f64>,
    /// Linear decay rate `|n|² ρ²`.
    rate: Vec<f64>,
    e_full: Vec<f64>,
    e_half: Vec<f64>,
    /// Exponentially fitted trapezoid weights for `∫ |n|²|v̂|²` over a step.
    fit_w0: Vec<f64>,
    fit_w1: Vec<f64>,
    /// Band part of `f^ω`, the data of the forcing inside the products.
    forcing_band: Vec<Complex64>,
    checked_dt: bool,
}

/// Weights `(w₀, w₁)` with `∫₀^{dt} e^{−as/dt}(φ₀ + (φ₁e^{a} − φ₀)s/dt) ds =
/// dt (w₀φ₀ + w₁φ₁)`, exact for pure exponential decay at rate `a/dt`.
fn fitted_weights(a: f64) -> (f64, f64) {
    if a < 1e-3 {
        (0.5 - a / 6.0 + a * a / 24.0, 0.5 + a / 6.0 + a * a / 24.0)
    } else {
        let em = (-a).exp();
        let c2 = (1.0 - (1.0 + a) * em) / (a * a);
        ((1.0 - em) / a - c2, (a.exp_m1() - a) / (a * a))
    }
}

impl Solver {
    pub fn new(cfg: SolverConfig) -> Result<Self, GalerkinError> {
        cfg.validate()?;
        let grid = cfg.grid;
        let len = grid.len();
        let bil = Bilinear::new(grid);
        let rho: Vec<f64> = (0..len)
            .map(|i| {
                if !bil.band[i] {
                    0.0
                } else {
                    match cfg.truncation {
                        Truncation::Smooth(n) => ramp(grid.norm(i) / n),
                        Truncation::BandOnly => 1.0,
                    }
                }
            })
            .collect();
        let nsq: Vec<f64> = (0..len).map(|i| grid.norm_sq(i)).collect();
        let rate: Vec<f64> = nsq.iter().zip(&rho).map(|(n, r)| n * r * r).collect();
        let dt = cfg.dt;
        let (fit_w0, fit_w1) = rate.iter().map(|&r| fitted_weights(2.0 * r * dt)).unzip();
        let mut forcing_band = cfg.forcing.coeffs().to_vec();
        for c in 0..3 {
            for i in 0..len {
                if !bil.band[i] {
                    forcing_band[c * len + i] = Complex64::default();
                }
            }
        }
        Ok(Self {
            e_full: rate.iter().map(|r| (-dt * r).exp()).collect(),
            e_half: rate.iter().map(|r| (-0.5 * dt * r).exp()).collect(),
            bil,
            rho,
            nsq,
            rate,
            fit_w0,
            fit_w1,
            forcing_band,
            cfg,
            checked_dt: false,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn grid(&self) -> GridSpec {
        self.cfg.grid
    }

    /// `v = 0` at `t = 0`.
    pub fn initial_state(&self) -> SolverState {
        SolverState {
            t: 0.0,
            step: 0,
            vhat: SpectralField::zeros(self.cfg.grid),
        }
    }

    /// State from given coefficients, restricted to the evolved band.
    pub fn state_from(&self, v: &SpectralField, t: f64) -> Result<SolverState, GalerkinError> {
        check_state(v)?;
        let len = self.cfg.grid.len();
        let band = &self.bil.band;
        Ok(SolverState {
            t,
            step: 0,
            vhat: v.apply_multiplier(|i| if band[i % len] { 1.0 } else { 0.0 }),
        })
    }

    /// `g` restricted to the band at time `t`.
    fn forcing_at(&self, t: f64) -> Vec<Complex64> {
        let len = self.cfg.grid.len();
        let decay: Vec<f64> = self.nsq.iter().map(|n| (-t * n).exp()).collect();
        self.forcing_band
            .iter()
            .enumerate()
            .map(|(k, z)| z * decay[k % len])
            .collect()
    }

    /// Quadratic part `−ℙ ρ ∇·(U ⊗ U)` with `U = P_{≤N} v + g`; returns
    /// `max |U|` over the grid.
    fn nonlinear(&mut self, v: &[Complex64], t: f64, out: &mut [Complex64]) -> f64 {
        let len = self.cfg.grid.len();
        if !self.cfg.nonlinear {
            out.iter_mut().for_each(|z| *z = Complex64::default());
            return 0.0;
        }
        let mut u_hat = self.forcing_at(t);
        for (k, z) in u_hat.iter_mut().enumerate() {
            *z += v[k] * self.rho[k % len];
        }
        let mut u = vec![0.0; 3 * len];
        self.bil.synthesize_into(&u_hat, 3, &mut u);
        let speed = (0..len)
            .map(|i| (u[i] * u[i] + u[len + i] * u[len + i] + u[2 * len + i] * u[2 * len + i]).sqrt())
            .fold(0.0, f64::max);
        let mut div = vec![Complex64::default(); 3 * len];
        self.bil.divergence_of_product(&u, &u, true, &mut div);
        let grid = self.cfg.grid;
        for i in 0..len {
            let r = self.rho[i];
            if r == 0.0 || i == 0 {
                for c in 0..3 {
                    out[c * len + i] = Complex64::default();
                }
                continue;
            }
            let p = leray_vector(grid.mode(i), [div[i], div[len + i], div[2 * len + i]]);
            for c in 0..3 {
                out[c * len + i] = -r * p[c];
            }
        }
        speed
    }

    /// Full tendency `−|n|²ρ² v + nonlinear`.
    pub(crate) fn tendency(&mut self, v: &[Complex64], t: f64) -> Vec<Complex64> {
        let len = self.cfg.grid.len();
        let mut out = vec![Complex64::default(); v.len()];
        self.nonlinear(v, t, &mut out);
        for (k, z) in out.iter_mut().enumerate() {
            *z -= v[k] * self.rate[k % len];
        }
        out
    }

    pub(crate) fn nsq(&self) -> &[f64] {
        &self.nsq
    }

    pub fn step(&mut self, state: &mut SolverState) -> Result<(), GalerkinError> {
        let len = self.cfg.grid.len();
        let dt = self.cfg.dt;
        let t = state.t;
        let v = state.vhat.coeffs().to_vec();
        let n3 = v.len();
        let (e, eh) = (&self.e_full.clone(), &self.e_half.clone());
        let mut k1 = vec![Complex64::default(); n3];
        let speed = self.nonlinear(&v, t, &mut k1);
        if !self.checked_dt {
            self.checked_dt = true;
            self.check_dt(speed);
        }
        let a: Vec<Complex64> = (0..n3).map(|k| eh[k % len] * (v[k] + 0.5 * dt * k1[k])).collect();
        let mut k2 = vec![Complex64::default(); n3];
        self.nonlinear(&a, t + 0.5 * dt, &mut k2);
        let b: Vec<Complex64> = (0..n3).map(|k| eh[k % len] * v[k] + 0.5 * dt * k2[k]).collect();
        let mut k3 = vec![Complex64::default(); n3];
        self.nonlinear(&b, t + 0.5 * dt, &mut k3);
        let c: Vec<Complex64> = (0..n3).map(|k| e[k % len] * v[k] + dt * eh[k % len] * k3[k]).collect();
        let mut k4 = vec![Complex64::default(); n3];
        self.nonlinear(&c, t + dt, &mut k4);
        let new: Vec<Complex64> = (0..n3)
            .map(|k| {
                let m = k % len;
                e[m] * v[k] + dt / 6.0 * (e[m] * k1[k] + 2.0 * eh[m] * (k2[k] + k3[k]) + k4[k])
            })
            .collect();
        state.step += 1;
        state.t = t + dt;
        if new.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(GalerkinError::NonFiniteState {
                step: state.step,
                t: state.t,
            });
        }
        state.vhat = SpectralField::from_coeffs(self.cfg.grid, new)?;
        Ok(())
    }

    fn check_dt(&self, speed: f64) {
        let kmax = (0..self.cfg.grid.len())
            .filter(|&i| self.rho[i] > 0.0)
            .map(|i| self.nsq[i].sqrt())
            .fold(0.0, f64::max);
        let limit = 1.0 / (kmax * speed).max(f64::MIN_POSITIVE);
        if self.cfg.nonlinear && self.cfg.dt > limit {
            log::warn!(
                "dt = {} exceeds the advective estimate {limit:.3e} (max |n| = {kmax}, max |U| = {speed:.3e})",
                self.cfg.dt
            );
        }
    }

    /// `∫_{t}^{t+dt} ‖∇v‖²` by the exponentially fitted trapezoid.
    fn fitted_dissipation(&self, old: &SpectralField, new: &SpectralField) -> f64 {
        let len = self.cfg.grid.len();
        let (a, b) = (old.coeffs(), new.coeffs());
        let mut s = 0.0;
        for k in 0..a.len() {
            let m = k % len;
            s += self.nsq[m] * (self.fit_w0[m] * a[k].norm_sqr() + self.fit_w1[m] * b[k].norm_sqr());
        }
        s * self.cfg.dt
    }

    /// Energy bookkeeping for `v` at time `t`.
    fn sample(&mut self, v: &SpectralField, t: f64) -> LedgerSample {
        let len = self.cfg.grid.len();
        let vc = v.coeffs();
        let f = self.cfg.forcing.coeffs();
        let mut s = LedgerSample {
            t,
            ..Default::default()
        };
        for k in 0..vc.len() {
            let m = k % len;
            let nsq = self.nsq[m];
            let g = f[k] * (-t * nsq).exp();
            let vsq = vc[k].norm_sqr();
            s.l2sq_v += vsq;
            s.grad_sq_v += nsq * vsq;
            s.grad_sq_w += nsq * self.rho[m] * self.rho[m] * vsq;
            s.l2sq_u += (g + vc[k]).norm_sqr();
            s.grad_cross += 2.0 * nsq * (g.conj() * vc[k]).re;
            s.g_dissipation += 0.5 * f[k].norm_sqr() * -(-2.0 * t * nsq).exp_m1();
        }
        s.rhs_density = self.identity_density(vc, t);
        s
    }

    /// `2∫ ∂_j w_i g_i U_j dx` with `w = P_{≤N} v`, `U = w + g`, evaluated
    /// in physical space independently of the tendency.
    fn identity_density(&mut self, v: &[Complex64], t: f64) -> f64 {
        if !self.cfg.nonlinear || self.forcing_band.iter().all(|z| *z == Complex64::default()) {
            return 0.0;
        }
        let len = self.cfg.grid.len();
        let w_hat: Vec<Complex64> = v.iter().enumerate().map(|(k, z)| z * self.rho[k % len]).collect();
        let mut grad_hat = vec![Complex64::default(); 9 * len];
        for i in 0..3 {
            for j in 0..3 {
                for m in 0..len {
                    let n = self.bil.modes[m];
                    grad_hat[(3 * i + j) * len + m] = Complex64::i() * n[j] * w_hat[i * len + m];
                }
            }
        }
        let mut grad = vec![0.0; 9 * len];
        self.bil.synthesize_into(&grad_hat, 9, &mut grad);
        let g_hat = self.forcing_at(t);
        let mut gw_hat = g_hat.clone();
        gw_hat.extend_from_slice(&w_hat);
        let mut gw = vec![0.0; 6 * len];
        self.bil.synthesize_into(&gw_hat, 6, &mut gw);
        let (g, w) = gw.split_at(3 * len);
        let mut acc = 0.0;
        for x in 0..len {
            for i in 0..3 {
                let gi = g[i * len + x];
                for j in 0..3 {
                    let uj = w[j * len + x] + g[j * len + x];
                    acc += grad[(3 * i + j) * len + x] * gi * uj;
                }
            }
        }
        2.0 * acc * self.cfg.grid.cell_volume()
    }

    /// Integrates from `state` to the configured horizon.
    pub fn run(&mut self, mut state: SolverState) -> Result<Trajectory, GalerkinError> {
        let steps = self.cfg.steps();
        let mut ledger = EnergyLedger::default();
        let first = self.sample(&state.vhat, state.t);
        ledger.push(first, 0.0);
        let mut snapshots = vec![Snapshot {
            t: state.t,
            v: state.vhat.clone(),
        }];
        for k in 1..=steps {
            let old = state.vhat.clone();
            self.step(&mut state)?;
            let fitted = self.fitted_dissipation(&old, &state.vhat);
            let sample = self.sample(&state.vhat, state.t);
            ledger.push(sample, fitted);
            if k % self.cfg.snapshot_every == 0 || k == steps {
                snapshots.push(Snapshot {
                    t: state.t,
                    v: state.vhat.clone(),
                });
            }
        }
        Ok(Trajectory {
            snapshots,
            ledger,
            steps,
            dt: self.cfg.dt,
        })
    }
}

fn check_state(v: &SpectralField) -> Result<(), GalerkinError> {
    let defect = v.hermitian_defect();
    if defect > STATE_TOL {
        return Err(GalerkinError::StateInvariantViolation(format!("hermitian defect {defect:e}")));
    }
    if !v.is_mean_zero() {
        return Err(GalerkinError::StateInvariantViolation("nonzero mean mode".into()));
    }
    let div = relative_divergence(v);
    if div > STATE_TOL {
        return Err(GalerkinError::StateInvariantViolation(format!("relative divergence {div:e}")));
    }
    Ok(())
}

/// Right-hand side of the smoothed system at `(vhat, t)`.
pub fn assemble_rhs(vhat: &SpectralField, t: f64, cfg: &SolverConfig) -> Result<SpectralField, GalerkinError> {
    check_state(vhat)?;
    if vhat.grid() != cfg.grid {
        return Err(GalerkinError::InvalidConfig("state and configuration grids differ".into()));
    }
    let mut solver = Solver::new(cfg.clone())?;
    let out = solver.tendency(vhat.coeffs(), t);
    Ok(SpectralField::from_coeffs(cfg.grid, out)?)
}

/// Integrates the smoothed system from `v = 0`.
pub fn solve(cfg: &SolverConfig) -> Result<Trajectory, GalerkinError> {
    if let Integrator::Picard { .. } = cfg.integrator {
        return Err(GalerkinError::InvalidConfig(
            "the Picard map is a diagnostic; use picard_iterate".into(),
        ));
    }
    let mut solver = Solver::new(cfg.clone())?;
    let state = solver.initial_state();
    solver.run(state)
}

/// Plain Navier-Stokes from `u_tau` (dealiased, no forcing, no smooth
/// cutoff). Times in the trajectory are measured from the restart.
pub fn restart_full_nse(u_tau: &SpectralField, cfg: &SolverConfig) -> Result<Trajectory, GalerkinError> {
    let mut plain = cfg.clone();
    plain.truncation = Truncation::BandOnly;
    plain.forcing = SpectralField::zeros(cfg.grid);
    plain.integrator = Integrator::IfRk4;
    let mut solver = Solver::new(plain)?;
    let state = solver.state_from(u_tau, 0.0)?;
    solver.run(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin::bilinear::tests::{band_field, dense_divergence};
    use crate::spectral::{leray_project, GridSpec};

    fn single_pair(grid: GridSpec, amp: f64) -> SpectralField {
        let mut f = SpectralField::zeros(grid);
        f.set_pair(2, [1, 0, 0], Complex64::new(amp, 0.0));
        f.set_pair(0, [0, 1, 0], Complex64::new(0.0, amp));
        f
    }

    #[test]
    fn fitted_weights_limits() {
        let (a, b) = fitted_weights(0.0);
        assert_eq!((a, b), (0.5, 0.5));
        let (a1, b1) = fitted_weights(1e-3 * 0.999);
        let (a2, b2) = fitted_weights(1e-3 * 1.001);
        assert!((a1 - a2).abs() < 1e-6 && (b1 - b2).abs() < 1e-6);
        // exact for pure decay: ∫₀¹ e^{−as} ds with φ₀ = 1, φ₁ = e^{−a}
        let a = 3.0f64;
        let (w0, w1) = fitted_weights(a);
        assert!((w0 + w1 * (-a).exp() - (1.0 - (-a).exp()) / a).abs() < 1e-14);
    }

    #[test]
    fn zero_forcing_keeps_zero() {
        let grid = GridSpec::new(8).unwrap();
        let cfg = SolverConfig::new(SpectralField::zeros(grid), 2.0, 0.01, 0.05, 0.5);
        let rhs = assemble_rhs(&SpectralField::zeros(grid), 0.0, &cfg).unwrap();
        assert_eq!(rhs.l2_norm(), 0.0);
        let traj = solve(&cfg).unwrap();
        assert!(traj.snapshots.iter().all(|s| s.v.l2_norm() == 0.0));
        assert!(traj.ledger.e_v().iter().all(|&e| e == 0.0));
    }

    #[test]
    fn forcing_only_rhs_matches_dense_oracle() {
        let grid = GridSpec::new(4).unwrap();
        let f = single_pair(grid, 0.3);
        let cfg = SolverConfig::new(f.clone(), 1.0, 0.01, 0.01, 0.5);
        let t = 0.2;
        let rhs = assemble_rhs(&SpectralField::zeros(grid), t, &cfg).unwrap();
        let g = f.apply_multiplier(|i| (-t * grid.norm_sq(i)).exp());
        let dense = dense_divergence(&g, &g);
        let dense = SpectralField::from_coeffs(grid, dense).unwrap();
        let expect = leray_project(&dense).apply_multiplier(|i| {
            if grid.in_dealiased_band(i) && i != 0 {
                -ramp(grid.norm(i))
            } else {
                0.0
            }
        });
        let err = rhs.sub(&expect).unwrap().l2_norm();
        assert!(err <= 1e-14 * expect.l2_norm().max(1e-300), "{err}");
        assert!(relative_divergence(&rhs) < 1e-12);
    }

    #[test]
    fn rhs_is_divergence_free() {
        let grid = GridSpec::new(8).unwrap();
        let f = band_field(grid, 3);
        let cfg = SolverConfig::new(f, 2.0, 0.01, 0.01, 0.5);
        let v = band_field(grid, 4).apply_multiplier(|i| ramp(grid.norm(i) / 2.0));
        let rhs = assemble_rhs(&v, 0.1, &cfg).unwrap();
        assert!(relative_divergence(&rhs) < 1e-12);
        assert!(rhs.hermitian_defect() < 1e-12);
    }

    #[test]
    fn linear_mode_decays_exactly() {
        let grid = GridSpec::new(8).unwrap();
        let mut cfg = SolverConfig::new(SpectralField::zeros(grid), 2.0, 0.01, 0.1, 0.5);
        cfg.nonlinear = false;
        let mut solver = Solver::new(cfg).unwrap();
        let v0 = single_pair(grid, 1.0).apply_multiplier(|i| if grid.norm_sq(i) == 1.0 { 1.0 } else { 0.0 });
        let mut state = solver.state_from(&v0, 0.0).unwrap();
        let before = state.vhat.get(2, [1, 0, 0]);
        solver.step(&mut state).unwrap();
        let after = state.vhat.get(2, [1, 0, 0]);
        let r = ramp(0.5);
        assert!((after - before * (-0.01 * r * r).exp()).norm() < 1e-13);
    }

    #[test]
    fn rejects_bad_states_and_configs() {
        let grid = GridSpec::new(8).unwrap();
        let cfg = SolverConfig::new(SpectralField::zeros(grid), 2.0, 0.01, 0.05, 0.5);
        let mut bad = SpectralField::zeros(grid);
        bad.set_pair(0, [1, 0, 0], Complex64::new(1.0, 0.0));
        assert!(matches!(
            assemble_rhs(&bad, 0.0, &cfg),
            Err(GalerkinError::StateInvariantViolation(_))
        ));
        let mut c = cfg.clone();
        c.truncation = Truncation::Smooth(3.0);
        assert!(c.validate().is_err());
        let mut c = cfg.clone();
        c.dt = 0.0;
        assert!(c.validate().is_err());
        let mut c = cfg;
        c.horizon = 0.055;
        assert!(c.validate().is_err());
    }

    #[test]
    fn fourth_order_in_dt() {
        let grid = GridSpec::new(8).unwrap();
        let f = single_pair(grid, 2.0).add(&band_field(grid, 9).scaled(0.3)).unwrap();
        let run = |dt: f64| {
            let cfg = SolverConfig::new(f.clone(), 2.0, dt, 0.2, 0.5);
            solve(&cfg).unwrap().last().v.clone()
        };
        let (a, b, c) = (run(0.02), run(0.01), run(0.005));
        let e1 = a.sub(&c).unwrap().l2_norm();
        let e2 = b.sub(&c).unwrap().l2_norm();
        // with the dt/4 reference the error ratio of a 4th-order scheme is (1 − 1/256)/(1/16 − 1/256) = 17
        let ratio = e1 / e2;
        assert!(ratio > 12.0 && ratio < 22.0, "ratio {ratio}");
    }
}
