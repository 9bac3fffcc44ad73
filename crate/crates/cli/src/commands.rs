//! Subcommand pipelines.

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::Path;

use log::{info, warn};
use num_complex::Complex64;
use rns_core::galerkin::{
    cancellation_check, holder_interpolation_check, negative_interpolation_check, picard_iterate, restart_full_nse,
    transport_cancellation_check, EnergyLedger, GalerkinError, Solver, SolverConfig, Trajectory,
};
use rns_core::heat::{
    deterministic_decay_ratio, heat_evolve, heat_lplq, lattice_j, mode_constant, JkRow, NormTable, TimeGrid,
};
use rns_core::prob::{
    coverage_study, run_moment_experiment, run_tail_experiment, CoverageConfig, EnsembleConfig, Ladder, ProbError,
};
use rns_core::randomizer::rng::member_seed;
use rns_core::randomizer::{draw_gaussians, make_data, randomize, PairIndex};
use rns_core::spectral::{read_snapshot, sobolev_norm};
use rns_core::verify::run_invariant_suite;
use rns_core::{DataFamily, GridSpec, HeatError, RandomizerError, SpectralError, SpectralField};
use serde_json::json;
use thiserror::Error;

use crate::config::{ConfigError, Family, IntegratorKind, RunConfig};
use crate::output::{Axis, RunOutput, Status};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::Subcommand)]
pub enum Command {
    /// Build the data and its randomization; write snapshots and spectra
    Gen,
    /// Space-time norms of the heat flow and the deterministic decay table
    HeatNorms,
    /// Time supremum J(T), its constant K and exponent
    JtTable,
    /// Monte Carlo tail of the heat-flow norm
    McTail,
    /// Monte Carlo moments of a Gaussian sum
    McMoments,
    /// Coverage of the dyadic event unions
    Coverage,
    /// Integrate the smoothed system (or the Picard diagnostic)
    Solve,
    /// Restart plain Navier-Stokes from u(tau)
    Restart,
    /// Energy ledger, dt-halving and exact checks on every snapshot
    EnergyReport,
    /// Run the invariant suite
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Gen => "gen",
            Command::HeatNorms => "heat-norms",
            Command::JtTable => "jt-table",
            Command::McTail => "mc-tail",
            Command::McMoments => "mc-moments",
            Command::Coverage => "coverage",
            Command::Solve => "solve",
            Command::Restart => "restart",
            Command::EnergyReport => "energy-report",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// A module rejected its inputs.
    #[error("invalid input: {0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{failed} of {total} invariant checks failed")]
    Invariant { failed: usize, total: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Input(_) => EXIT_CONFIG,
            RunError::Numerical(_) => EXIT_NUMERICAL,
            RunError::Invariant { .. } => EXIT_INVARIANT,
            RunError::Io(_) => EXIT_IO,
        }
    }

    pub fn status(&self) -> Status {
        match self.exit_code() {
            EXIT_CONFIG => Status::ConfigError,
            EXIT_INVARIANT => Status::InvariantFailure,
            _ => Status::NumericalFailure,
        }
    }
}

impl From<SpectralError> for RunError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::Io(io) => RunError::Io(io),
            SpectralError::InvalidGrid(_) | SpectralError::Snapshot(_) | SpectralError::GridMismatch { .. } => {
                RunError::Input(e.to_string())
            }
            other => RunError::Numerical(other.to_string()),
        }
    }
}

impl From<HeatError> for RunError {
    fn from(e: HeatError) -> Self {
        match e {
            HeatError::Domain(_) | HeatError::InvalidTimeGrid(_) | HeatError::ZeroField | HeatError::NegativeTime(_) => {
                RunError::Input(e.to_string())
            }
            HeatError::Spectral(s) => s.into(),
            other => RunError::Numerical(other.to_string()),
        }
    }
}

impl From<RandomizerError> for RunError {
    fn from(e: RandomizerError) -> Self {
        match e {
            RandomizerError::Spectral(s) => s.into(),
            other => RunError::Input(other.to_string()),
        }
    }
}

impl From<ProbError> for RunError {
    fn from(e: ProbError) -> Self {
        match e {
            ProbError::Heat(h) => h.into(),
            ProbError::Randomizer(r) => r.into(),
            ProbError::DegenerateTail => RunError::Numerical(e.to_string()),
            other => RunError::Input(other.to_string()),
        }
    }
}

impl From<GalerkinError> for RunError {
    fn from(e: GalerkinError) -> Self {
        match e {
            GalerkinError::InvalidConfig(_) | GalerkinError::FrequencyOverflow { .. } => RunError::Input(e.to_string()),
            GalerkinError::Spectral(s) => s.into(),
            GalerkinError::Heat(h) => h.into(),
            other => RunError::Numerical(other.to_string()),
        }
    }
}

/// Runs `cmd`, writing its outputs and manifest under `root/<cmd>`.
pub fn dispatch(cmd: Command, cfg: Option<&RunConfig>, root: &Path) -> Result<(), RunError> {
    let mut out = RunOutput::create(root, cmd.name())?;
    let result = match (cmd, cfg) {
        (Command::Verify, _) => verify(&mut out),
        (_, None) => Err(RunError::Input(format!("{} needs a configuration", cmd.name()))),
        (Command::Gen, Some(c)) => gen(c, &mut out),
        (Command::HeatNorms, Some(c)) => heat_norms(c, &mut out),
        (Command::JtTable, Some(c)) => jt_table(c, &mut out),
        (Command::McTail, Some(c)) => mc_tail(c, &mut out),
        (Command::McMoments, Some(c)) => mc_moments(c, &mut out),
        (Command::Coverage, Some(c)) => coverage(c, &mut out),
        (Command::Solve, Some(c)) => solve(c, &mut out),
        (Command::Restart, Some(c)) => restart(c, &mut out),
        (Command::EnergyReport, Some(c)) => energy_report(c, &mut out),
    };
    match &result {
        Ok(()) => out.finish(cfg, Status::Ok, None)?,
        Err(e) => out.finish(cfg, e.status(), Some(&e.to_string()))?,
    }
    result
}

fn grid_of(cfg: &RunConfig) -> Result<GridSpec, RunError> {
    Ok(GridSpec::new(cfg.grid.size)?)
}

/// Unrandomized data `f`.
pub fn base_field(cfg: &RunConfig) -> Result<SpectralField, RunError> {
    let grid = grid_of(cfg)?;
    let d = &cfg.data;
    let family = match d.family {
        Family::PowerLaw => DataFamily::PowerLaw {
            gamma: d.gamma,
            amplitude: d.amplitude,
        },
        Family::BandLimited => DataFamily::BandLimited {
            support_radius: d.support_radius,
            amplitude: d.amplitude,
        },
        Family::SingleMode => {
            let mut f = SpectralField::zeros(grid);
            f.set_pair(d.component, d.mode, Complex64::new(d.amplitude, 0.0));
            return Ok(f);
        }
    };
    let data = make_data(grid, &family, cfg.alpha, cfg.seed)?;
    if !data.representative {
        warn!("the untruncated family is not in the negative Sobolev space for alpha = {}", cfg.alpha);
    }
    Ok(data.field)
}

/// `f^ω` for the configured draw.
pub fn randomized_field(cfg: &RunConfig) -> Result<SpectralField, RunError> {
    let f = base_field(cfg)?;
    let draw = draw_gaussians(f.grid(), cfg.draw_seed());
    Ok(randomize(&f, &draw)?.randomized)
}

fn resolving(f: &SpectralField, horizon: f64, nodes: usize) -> Result<TimeGrid, RunError> {
    let r = f.support_radius();
    Ok(TimeGrid::resolving(horizon, nodes, r * r)?)
}

/// Energy per integer shell `round(|n|)`.
fn shell_spectrum(f: &SpectralField) -> Vec<f64> {
    let grid = f.grid();
    let len = grid.len();
    let shells = (3f64.sqrt() * grid.size() as f64 / 2.0).ceil() as usize + 1;
    let mut e = vec![0.0; shells];
    for idx in 0..len {
        let s = grid.norm(idx).round() as usize;
        e[s] += (0..3).map(|c| f.coeffs()[c * len + idx].norm_sqr()).sum::<f64>();
    }
    e
}

fn gen(cfg: &RunConfig, out: &mut RunOutput) -> Result<(), RunError> {
    let f = base_field(cfg)?;
    let draw = draw_gaussians(f.grid(), cfg.draw_seed());
    let fw = randomize(&f, &draw)?.randomized;
    out.snapshot("base.rns1", &f)?;
    out.snapshot("randomized.rns1", &fw)?;
    let (eb, er) = (shell_spectrum(&f), shell_spectrum(&fw));
    out.csv(
        "spectrum.csv",
        &["shell", "base", "randomized"],
        eb.iter().zip(&er).enumerate().skip(1).map(|(k, (b, r))| vec![k as f64, *b, *r]),
    )?;
    out.plot(
        "spectrum.plot.json",
        "shell energy of the data",
        "spectrum.csv",
        Axis { column: "shell", label: "|n|", log: true },
        &[
            Axis { column: "base", label: "f", log: true },
            Axis { column: "randomized", label: "randomized f", log: true },
        ],
        None,
    )?;
    out.json(
        "summary.json",
        &json!({
            "grid": cfg.grid.size,
            "alpha": cfg.alpha,
            "pairs": PairIndex::new(f.grid()).count(),
            "base_negative_sobolev_norm": sobolev_norm(&f, -cfg.alpha)?,
            "randomized_negative_sobolev_norm": sobolev_norm(&fw, -cfg.alpha)?,
            "base_l2": f.l2_norm(),
            "randomized_l2": fw.l2_norm(),
        }),
    )?;
    Ok(())
}

fn heat_norms(cfg: &RunConfig, out: &mut RunOutput) -> Result<(), RunError> {
    let f = base_field(cfg)?;
    let grid = f.grid();
    let pairs = PairIndex::new(grid);
    let h = &cfg.heat;
    let mut table = NormTable::default();
    for s in 0..h.draws as u64 {
        let seed = member_seed(cfg.draw_seed(), s);
        let fw = rns_core::randomizer::randomize_field(&f, &draw_gaussians(grid, seed), &pairs)?;
        for &p in &h.p {
            for &q in &h.q {
                for &t in &h.horizons {
                    let tg = resolving(&fw, t, cfg.ensemble.time_nodes)?;
                    table.rows.push(rns_core::heat::NormRow {
                        alpha: cfg.alpha,
                        p,
                        q,
                        horizon: t,
                        seed,
                        value: heat_lplq(&fw, p, q, &tg)?,
                    });
                }
            }
        }
    }
    out.csv_text(
        "heat_norms.csv",
        &NormTable::HEADER,
        table.rows.iter().map(|r| {
            vec![
                r.alpha.to_string(),
                r.p.to_string(),
                r.q.to_string(),
                r.horizon.to_string(),
                r.seed.to_string(),
                r.value.to_string(),
            ]
        }),
    )?;

    let fw = randomized_field(cfg)?;
    let r = fw.support_radius();
    let first = (1e-5f64).min(0.05 / (r * r).max(1.0));
    let times = TimeGrid::log_spaced(10.0, 400, first)?;
    let mut decay = Vec::new();
    for &k in &h.k {
        let ratio = deterministic_decay_ratio(&fw, cfg.alpha, k, &times)?;
        decay.push(vec![cfg.alpha, k as f64, ratio, mode_constant(cfg.alpha + k as f64)]);
    }
    out.csv("decay.csv", &["alpha", "k", "ratio", "constant"], decay)?;
    out.plot(
        "heat_norms.plot.json",
        "space-time norms of the heat flow",
        "heat_norms.csv",
        Axis { column: "T", label: "T", log: true },
        &[Axis { column: "value", label: "norm", log: true }],
        Some("p"),
    )?;
    Ok(())
}

fn jt_table(cfg: &RunConfig, out: &mut RunOutput) -> Result<(), RunError> {
    let grid = grid_of(cfg)?;
    let j = &cfg.jt;
    let (mut rows, mut lattice) = (Vec::new(), Vec::new());
    for &alpha in &j.alphas {
        for &p in &j.p {
            if alpha * p > 2.0 + 1e-12 {
                warn!("skipping alpha = {alpha}, p = {p}: alpha * p exceeds 2");
                continue;
            }
            for &t in &j.horizons {
                let row = JkRow::compute(alpha, p, t)?;
                rows.push(vec![row.alpha, row.p, row.horizon, row.j, row.k, row.sigma]);
                lattice.push(vec![alpha, p, t, row.j, lattice_j(t, alpha, p, grid)?]);
            }
        }
    }
    out.csv("jt.csv", &JkRow::HEADER, rows)?;
    out.csv("jt_lattice.csv", &["alpha", "p", "T", "J", "lattice_J"], lattice)?;
    out.plot(
        "jt.plot.json",
        "time supremum J(T)",
        "jt.csv",
        Axis { column: "T", label: "T", log: true },
        &[Axis { column: "J", label: "J(T)", log: true }],
        Some("alpha"),
    )?;
    Ok(())
}

fn ensemble(cfg: &RunConfig) -> EnsembleConfig {
    let mut e = EnsembleConfig::new(cfg.ensemble.samples, cfg.seed, cfg.alpha);
    e.time_nodes = cfg.ensemble.time_nodes;
    e
}

fn mc_tail(cfg: &RunConfig, out: &mut RunOutput) -> Result<(), RunError> {
    let f = base_field(cfg)?;
    let t = &cfg.tail;
    let rep = run_tail_experiment(&f, t.p, t.q, t.horizon, &t.lambdas, &ensemble(cfg))?;
    out.csv(
        "tail.csv",
        &rns_core::prob::TailReport::HEADER,
        rep.rows.iter().map(|r| vec![r.p, r.q, r.horizon, r.lambda, r.freq, r.ci_lo, r.ci_hi]),
    )?;
    out.csv("tail_norms.csv", &["member", "ratio"], rep.norms.iter().enumerate().map(|(k, n)| vec![k as f64, n / rep.f_norm]))?;
    let fit = rep.fit.map(|f| json!({"beta": f.beta, "intercept": f.intercept, "r_squared": f.r_squared, "points": f.points}));
    out.json("tail_fit.json", &json!({"f_norm": rep.f_norm, "samples": rep.norms.len(), "fit": fit}))?;
    out.plot(
        "tail.plot.json",
        "exceedance frequency against lambda squared",
        "tail.csv",
        Axis { column: "lambda", label: "lambda", log: false },
        &[Axis { column: "freq", label: "P(norm >= lambda |f|)", log: true }],
        None,
    )?;
    info!("tail fit: {fit:?}");
    Ok(())
}

fn mc_moments(cfg: &RunConfig, out: &mut RunOutput) -> Result<(), RunError> {
    let m = &cfg.moments;
    let mut e = ensemble(cfg);
    e.samples = m.samples;
    let table = run_moment_experiment(&m.coefficients, &m.r, &e)?;
    out.csv(
        "moments.csv",
        &rns_core::prob::MomentTable::HEADER,
        table.rows.iter().map(|r| vec![r.r, r.estimate, r.oracle]),
    )?;
    out.csv(
        "moments_bound.csv",
        &["r", "std_error", "bound", "within_bound"],
        table.rows.iter().map(|r| vec![r.r, r.std_error, r.bound, if r.within_bound { 1.0 } else { 0.0 }]),
    )?;
    out.json(
        "summary.json",
        &json!({"c_norm": table.c_norm, "constant": table.constant, "samples": e.samples}),
    )?;
    out.plot(
        "moments.plot.json",
        "L^r moments of a Gaussian sum",
        "moments.csv",
        Axis { column: "r", label: "r", log: false },
        &[
            Axis { column: "estimate", label: "Monte Carlo", log: false },
            Axis { column: "oracle", label: "closed form", log: false },
        ],
        None,
    )?;
    Ok(())
}

fn coverage(cfg: &RunConfig, out: &mut RunOutput) -> Result<(), RunError> {
    let f = base_field(cfg)?;
    let c = &cfg.coverage;
    let ccfg = CoverageConfig {
        ensemble: ensemble(cfg),
        p1: c.p1,
        q1: c.q1,
        p2: c.p2,
        q2: c.q2,
        delta: c.delta,
        lambda: c.lambda,
        max_rung: c.max_rung,
    };
    let rep = coverage_study(&f, &ccfg)?;
    out.csv_text(
        "coverage.csv",
        &rns_core::prob::CoverageReport::HEADER,
        rep.rows.iter().map(|r| vec![r.ladder.name().to_string(), r.rung.to_string(), r.fraction.to_string()]),
    )?;
    if rep.rows.iter().all(|r| r.predicted.is_some()) {
        out.csv_text(
            "coverage_predicted.csv",
            &["ladder", "J", "predicted"],
            rep.rows
                .iter()
                .map(|r| vec![r.ladder.name().to_string(), r.rung.to_string(), r.predicted.unwrap().to_string()]),
        )?;
    }
    for ladder in [Ladder::Amplitude, Ladder::Horizon, Ladder::Joint] {
        if rep.fractions(ladder).windows(2).any(|w| w[0] > w[1]) {
            return Err(RunError::Numerical(format!("{} ladder is not monotone", ladder.name())));
        }
    }
    out.plot(
        "coverage.plot.json",
        "coverage of the dyadic unions",
        "coverage.csv",
        Axis { column: "J", label: "J", log: false },
        &[Axis { column: "fraction", label: "coverage", log: false }],
        Some("ladder"),
    )?;
    Ok(())
}

fn solver_config(cfg: &RunConfig, forcing: SpectralField) -> SolverConfig {
    let s = &cfg.solver;
    let mut sc = SolverConfig::new(forcing, s.cutoff, s.dt, s.horizon, cfg.alpha);
    sc.snapshot_every = s.snapshot_every;
    sc.nonlinear = s.nonlinear;
    sc
}

/// Integrates the smoothed system; on a blow-up the last finite state is
/// archived before the error is returned.
fn run_smoothed(sc: &SolverConfig, out: &mut RunOutput) -> Result<Trajectory, RunError> {
    let mut solver = Solver::new(sc.clone())?;
    let state = solver.initial_state();
    match solver.run(state) {
        Ok(t) => Ok(t),
        Err(GalerkinError::NonFiniteState { step, t }) => {
            // the integrator is deterministic, so replaying reproduces the last finite state
            let mut replay = Solver::new(sc.clone())?;
            let mut state = replay.initial_state();
            while state.step + 1 < step {
                replay.step(&mut state)?;
            }
            out.snapshot("last_finite.rns1", &state.vhat)?;
            out.json("failure.json", &json!({"failed_step": step, "t": t, "last_finite_t": state.t}))?;
            Err(GalerkinError::NonFiniteState { step, t }.into())
        }
        Err(e) => Err(e.into()),
    }
}

fn ledger_csv(out: &mut RunOutput, name: &str, ledger: &EnergyLedger) -> io::Result<()> {
    out.csv(
        name,
        &EnergyLedger::HEADER,
        ledger
            .rows()
            .iter()
            .map(|r| vec![r.t, r.l2sq_v, r.cum_dissipation, r.e_v, r.e_u, r.rhs_identity, r.residual]),
    )
}

/// Both bookkeeping conventions for the dissipation coefficient.
fn conventions_csv(out: &mut RunOutput, ledger: &EnergyLedger) -> io::Result<()> {
    let (t, l2, d) = (ledger.times(), ledger.l2sq_v(), ledger.cum_dissipation());
    out.csv(
        "energy_conventions.csv",
        &["t", "E_single", "E_double"],
        (0..t.len()).map(|k| vec![t[k], l2[k] + d[k], l2[k] + 2.0 * d[k]]),
    )
}

fn snapshots(out: &mut RunOutput, dir: &str, traj: &Trajectory) -> io::Result<()> {
    let mut index = Vec::new();
    for (k, s) in traj.snapshots.iter().enumerate() {
        let name = format!("{dir}/v_{k:04}.rns1");
        out.snapshot(&name, &s.v)?;
        index.push(vec![k as f64, s.t]);
    }
    out.csv(&format!("{dir}/index.csv"), &["snapshot", "t"], index)
}

fn solve(cfg: &RunConfig, out: &mut RunOutput) -> Result<(), RunError> {
    let fw = randomized_field(cfg)?;
    let sc = solver_config(cfg, fw.clone());
    sc.validate()?;
    if cfg.solver.integrator == IntegratorKind::Picard {
        let t1 = cfg.solver.picard_horizon;
        let hist = picard_iterate(&sc, t1, cfg.solver.picard_iterations)?;
        out.csv(
            "picard.csv",
            &["iteration", "difference", "ratio"],
            hist.differences.iter().enumerate().map(|(k, d)| {
                let ratio = if k == 0 { f64::NAN } else { hist.ratios.get(k - 1).copied().unwrap_or(f64::NAN) };
                vec![k as f64, *d, ratio]
            }),
        )?;
        out.snapshot("picard_limit.rns1", &hist.limit)?;
        if hist.non_contraction {
            return Err(RunError::Numerical(format!("Picard map does not contract on [0, {t1}]")));
        }
        return Ok(());
    }
    let traj = run_smoothed(&sc, out)?;
    snapshots(out, "snapshots", &traj)?;
    ledger_csv(out, "ledger.csv", &traj.ledger)?;
    conventions_csv(out, &traj.ledger)?;
    out.plot(
        "ledger.plot.json",
        "energy of the perturbation",
        "ledger.csv",
        Axis { column: "t", label: "t", log: false },
        &[
            Axis { column: "E_v", label: "E(v,t)", log: false },
            Axis { column: "E_u", label: "E(u,t)", log: false },
        ],
        None,
    )?;
    let f_norm = sobolev_norm(&fw, -cfg.alpha)?;
    let g_norm = heat_lplq(&fw, 3.0, 9.0, &resolving(&fw, cfg.solver.horizon, cfg.ensemble.time_nodes)?)?;
    let residual = traj.ledger.residual();
    out.json(
        "summary.json",
        &json!({
            "steps": traj.steps,
            "dt": traj.dt,
            "final_l2sq_v": traj.ledger.l2sq_v().last(),
            "final_E_v": traj.ledger.e_v().last(),
            "final_residual": residual.last(),
            "g_L3_L9": g_norm,
            "f_negative_sobolev": f_norm,
            "g_L3_L9_over_f": g_norm / f_norm,
        }),
    )?;
    Ok(())
}

fn restart(cfg: &RunConfig, out: &mut RunOutput) -> Result<(), RunError> {
    let grid = grid_of(cfg)?;
    let (u_tau, tau) = match &cfg.restart.from {
        Some(path) => {
            let u = read_snapshot(BufReader::new(File::open(path)?))?;
            if u.grid() != grid {
                return Err(RunError::Input(format!(
                    "restart.from holds a {}^3 field, grid.size is {}",
                    u.grid().size(),
                    grid.size()
                )));
            }
            (u, f64::NAN)
        }
        None => {
            let fw = randomized_field(cfg)?;
            let sc = solver_config(cfg, fw.clone());
            let traj = run_smoothed(&sc, out)?;
            let tau = cfg.solver.horizon;
            (heat_evolve(&fw, tau)?.add(&traj.last().v)?, tau)
        }
    };
    out.snapshot("u_tau.rns1", &u_tau)?;
    let r = &cfg.restart;
    let mut sc = SolverConfig::new(SpectralField::zeros(grid), cfg.solver.cutoff.min(grid.size() as f64 / 3.0), r.dt, r.horizon, cfg.alpha);
    sc.snapshot_every = r.snapshot_every;
    let traj = restart_full_nse(&u_tau, &sc)?;
    snapshots(out, "snapshots", &traj)?;
    let (t, l2, fitted, ratio) = (
        traj.ledger.times(),
        traj.ledger.l2sq_v(),
        traj.ledger.fitted_dissipation().to_vec(),
        traj.ledger.leray_ratio(),
    );
    out.csv(
        "restart_ledger.csv",
        &["t", "l2sq_u", "cum_dissipation", "leray_ratio"],
        (0..t.len()).map(|k| vec![t[k], l2[k], fitted[k], ratio[k]]),
    )?;
    out.plot(
        "restart.plot.json",
        "energy inequality after the restart",
        "restart_ledger.csv",
        Axis { column: "t", label: "t - tau", log: false },
        &[Axis { column: "leray_ratio", label: "(|u|^2 + 2 int |grad u|^2) / |u(tau)|^2", log: false }],
        None,
    )?;
    let worst = ratio.iter().copied().fold(f64::MIN, f64::max);
    out.json("summary.json", &json!({"tau": if tau.is_nan() { None } else { Some(tau) }, "max_leray_ratio": worst}))?;
    if worst > 1.0 + 1e-6 {
        return Err(RunError::Numerical(format!("energy inequality violated: ratio {worst}")));
    }
    Ok(())
}

fn energy_report(cfg: &RunConfig, out: &mut RunOutput) -> Result<(), RunError> {
    let fw = randomized_field(cfg)?;
    let grid = fw.grid();
    let mut sc = solver_config(cfg, fw.clone());
    sc.snapshot_every = 1;
    let coarse = run_smoothed(&sc, out)?;
    let mut half = sc.clone();
    half.dt = sc.dt / 2.0;
    let fine = run_smoothed(&half, out)?;
    ledger_csv(out, "energy.csv", &coarse.ledger)?;
    conventions_csv(out, &coarse.ledger)?;

    let (rc, rf) = (coarse.ledger.residual(), fine.ledger.residual());
    let times = coarse.ledger.times();
    out.csv(
        "residual_convergence.csv",
        &["t", "residual_dt", "residual_dt_half"],
        (0..times.len()).map(|k| vec![times[k], rc[k], rf[2 * k]]),
    )?;

    let mut rows = Vec::new();
    let mut violations = 0usize;
    for s in coarse.snapshots.iter().filter(|s| s.v.l2_norm() > 0.0) {
        let h = holder_interpolation_check(&s.v)?;
        let n = negative_interpolation_check(&s.v)?;
        let c = cancellation_check(&s.v);
        let g = heat_evolve(&fw, s.t)?.apply_multiplier(|i| if grid.in_dealiased_band(i) { 1.0 } else { 0.0 });
        let tr = transport_cancellation_check(&s.v, &g)?;
        violations += usize::from(!h.passed) + usize::from(!n.passed) + usize::from(c > 1e-10) + usize::from(tr > 1e-10);
        rows.push(vec![s.t, h.lhs, h.rhs, n.lhs, n.rhs, c, tr]);
    }
    out.csv(
        "checks.csv",
        &["t", "hoelder_lhs", "hoelder_rhs", "negative_lhs", "negative_rhs", "cancellation", "transport"],
        rows,
    )?;
    let (last_c, last_f) = (rc.last().copied().unwrap_or(0.0), rf.last().copied().unwrap_or(0.0));
    out.json(
        "summary.json",
        &json!({
            "residual_dt": last_c,
            "residual_dt_half": last_f,
            "halving_ratio": last_c.abs() / last_f.abs(),
            "E_v_at_zero": coarse.ledger.e_v().first(),
            "check_violations": violations,
        }),
    )?;
    out.plot(
        "energy.plot.json",
        "energy identity residual",
        "residual_convergence.csv",
        Axis { column: "t", label: "t", log: false },
        &[
            Axis { column: "residual_dt", label: "dt", log: false },
            Axis { column: "residual_dt_half", label: "dt/2", log: false },
        ],
        None,
    )?;
    if violations > 0 {
        return Err(RunError::Invariant {
            failed: violations,
            total: 4 * coarse.snapshots.len(),
        });
    }
    Ok(())
}

fn verify(out: &mut RunOutput) -> Result<(), RunError> {
    let results = run_invariant_suite();
    let stdout = io::stdout();
    let mut w = stdout.lock();
    for r in &results {
        writeln!(w, "{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail)?;
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    writeln!(w, "{} of {} invariants passed", results.len() - failed, results.len())?;
    out.csv_text(
        "verify.csv",
        &["invariant", "passed", "detail"],
        results.iter().map(|r| vec![r.name.to_string(), r.passed.to_string(), r.detail.clone()]),
    )?;
    if failed > 0 {
        return Err(RunError::Invariant {
            failed,
            total: results.len(),
        });
    }
    Ok(())
}
