//! TOML run configuration.
//!
//! `seed`, `alpha` and `grid.size` are required; every other key has a
//! default (see [`RunConfig::minimal`] and the README). Unknown and
//! duplicate keys are rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{key} {message}")]
    Validation { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed of every random stream in the run.
    pub seed: u64,
    pub alpha: f64,
    /// Falls back to `RNS_OUT_DIR`, then `rns-out`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub grid: GridSection,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub heat: HeatSection,
    #[serde(default)]
    pub jt: JtSection,
    #[serde(default)]
    pub tail: TailSection,
    #[serde(default)]
    pub moments: MomentsSection,
    #[serde(default)]
    pub coverage: CoverageSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub restart: RestartSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    PowerLaw,
    BandLimited,
    /// One conjugate pair `amplitude · e_component · e^{i mode·x}` + c.c.
    SingleMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    pub family: Family,
    pub gamma: f64,
    pub support_radius: f64,
    pub amplitude: f64,
    pub mode: [i64; 3],
    pub component: usize,
    /// Seed of the Gaussian draw for single-realization commands;
    /// defaults to the master seed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draw_seed: Option<u64>,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            family: Family::PowerLaw,
            gamma: 1.5,
            support_radius: 3.0,
            amplitude: 1.0,
            mode: [1, 0, 0],
            component: 2,
            draw_seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub samples: usize,
    pub time_nodes: usize,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self {
            samples: 1000,
            time_nodes: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeatSection {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub horizons: Vec<f64>,
    /// Independent draws tabulated per `(p, q, T)`.
    pub draws: usize,
    /// Derivative orders of the deterministic decay table.
    pub k: Vec<u32>,
}

impl Default for HeatSection {
    fn default() -> Self {
        Self {
            p: vec![3.0, 4.0],
            q: vec![4.0, 6.0],
            horizons: vec![0.1, 1.0],
            draws: 4,
            k: vec![0, 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JtSection {
    pub alphas: Vec<f64>,
    pub p: Vec<f64>,
    pub horizons: Vec<f64>,
}

impl Default for JtSection {
    fn default() -> Self {
        Self {
            alphas: vec![0.1, 0.2, 0.3, 0.4, 0.5],
            p: vec![3.0, 4.0],
            horizons: vec![0.01, 0.1, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TailSection {
    pub p: f64,
    pub q: f64,
    pub horizon: f64,
    pub lambdas: Vec<f64>,
}

impl Default for TailSection {
    fn default() -> Self {
        Self {
            p: 3.0,
            q: 4.0,
            horizon: 1.0,
            lambdas: (0..12).map(|k| 0.16 + 0.0125 * k as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MomentsSection {
    pub coefficients: Vec<f64>,
    pub r: Vec<f64>,
    /// Overrides `ensemble.samples`; the sums are cheap.
    pub samples: usize,
}

impl Default for MomentsSection {
    fn default() -> Self {
        Self {
            coefficients: vec![1.0],
            r: vec![2.0, 3.0, 4.0, 6.0, 8.0],
            samples: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoverageSection {
    pub p1: f64,
    pub q1: f64,
    pub p2: f64,
    pub q2: f64,
    pub delta: f64,
    pub lambda: f64,
    pub max_rung: usize,
}

impl Default for CoverageSection {
    fn default() -> Self {
        Self {
            p1: 4.0,
            q1: 4.0,
            p2: 3.0,
            q2: 4.0,
            delta: 1.0,
            lambda: 0.5,
            max_rung: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorKind {
    Ifrk4,
    Picard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub cutoff: f64,
    pub dt: f64,
    pub horizon: f64,
    pub snapshot_every: usize,
    pub integrator: IntegratorKind,
    /// Iterations of the Picard diagnostic.
    pub picard_iterations: usize,
    /// Horizon of the Picard diagnostic.
    pub picard_horizon: f64,
    pub nonlinear: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            cutoff: 4.0,
            dt: 0.01,
            horizon: 0.25,
            snapshot_every: 5,
            integrator: IntegratorKind::Ifrk4,
            picard_iterations: 6,
            picard_horizon: 1e-3,
            nonlinear: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RestartSection {
    pub dt: f64,
    pub horizon: f64,
    pub snapshot_every: usize,
    /// RNS1 file holding `u(τ)`; when absent the smoothed system is solved
    /// first and restarted from `g(T) + v(T)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub from: Option<PathBuf>,
}

impl Default for RestartSection {
    fn default() -> Self {
        Self {
            dt: 0.01,
            horizon: 0.25,
            snapshot_every: 5,
            from: None,
        }
    }
}

/// Parses and validates configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let de = toml::Deserializer::parse(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        let inner = inner.trim_end();
        if path == "." {
            ConfigError::Parse(inner.to_string())
        } else {
            ConfigError::Parse(format!("at `{path}`: {inner}"))
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be positive and finite, got {v}")))
    }
}

fn non_empty<T>(key: &str, v: &[T]) -> Result<(), ConfigError> {
    if v.is_empty() {
        Err(invalid(key, "must not be empty"))
    } else {
        Ok(())
    }
}

fn whole_steps(key: &str, horizon: f64, dt: f64) -> Result<(), ConfigError> {
    let steps = horizon / dt;
    if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) || steps.round() < 1.0 {
        return Err(invalid(key, format!("{horizon} is not a whole number of steps of {dt}")));
    }
    Ok(())
}

fn time_exponent(key: &str, p: f64) -> Result<(), ConfigError> {
    if p >= 2.0 && p.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must satisfy 2 <= p < inf, got {p}")))
    }
}

fn space_exponent(key: &str, q: f64) -> Result<(), ConfigError> {
    if q >= 1.0 && q.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must satisfy 1 <= q < inf, got {q}")))
    }
}

impl RunConfig {
    /// Required keys set, everything else at its default.
    pub fn minimal(size: usize, alpha: f64, seed: u64) -> Self {
        Self {
            seed,
            alpha,
            output_dir: None,
            grid: GridSection { size },
            data: DataSection::default(),
            ensemble: EnsembleSection::default(),
            heat: HeatSection::default(),
            jt: JtSection::default(),
            tail: TailSection::default(),
            moments: MomentsSection::default(),
            coverage: CoverageSection::default(),
            solver: SolverSection::default(),
            restart: RestartSection::default(),
        }
    }

    pub fn draw_seed(&self) -> u64 {
        self.data.draw_seed.unwrap_or(self.seed)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let m = self.grid.size;
        if m % 2 != 0 {
            return Err(invalid("grid.size", "must be even"));
        }
        if m < 4 {
            return Err(invalid("grid.size", format!("must be at least 4, got {m}")));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid("alpha", format!("must lie in (0, 1), got {}", self.alpha)));
        }

        let d = &self.data;
        if !(d.amplitude >= 0.0 && d.amplitude.is_finite()) {
            return Err(invalid("data.amplitude", format!("must be finite and non-negative, got {}", d.amplitude)));
        }
        match d.family {
            Family::PowerLaw => positive("data.gamma", d.gamma)?,
            Family::BandLimited => {
                let half = (m / 2) as f64;
                if !(d.support_radius >= 1.0 && d.support_radius < half) {
                    return Err(invalid("data.support_radius", format!("must lie in [1, {half})")));
                }
            }
            Family::SingleMode => {
                let half = (m / 2) as i64;
                if d.mode == [0, 0, 0] || d.mode.iter().any(|n| n.abs() >= half) {
                    return Err(invalid("data.mode", format!("must be nonzero with |n_i| < {half}")));
                }
                if d.component > 2 {
                    return Err(invalid("data.component", "must be 0, 1 or 2"));
                }
                if d.mode[d.component] != 0 {
                    return Err(invalid("data.component", "must be orthogonal to data.mode (divergence-free)"));
                }
            }
        }

        if self.ensemble.samples < 100 {
            return Err(invalid("ensemble.samples", "must be at least 100"));
        }
        if self.ensemble.time_nodes < 16 {
            return Err(invalid("ensemble.time_nodes", "must be at least 16"));
        }

        let h = &self.heat;
        non_empty("heat.p", &h.p)?;
        non_empty("heat.q", &h.q)?;
        non_empty("heat.horizons", &h.horizons)?;
        for &p in &h.p {
            time_exponent("heat.p", p)?;
        }
        for &q in &h.q {
            space_exponent("heat.q", q)?;
        }
        for &t in &h.horizons {
            positive("heat.horizons", t)?;
        }
        if h.draws == 0 {
            return Err(invalid("heat.draws", "must be at least 1"));
        }

        let j = &self.jt;
        non_empty("jt.alphas", &j.alphas)?;
        non_empty("jt.p", &j.p)?;
        non_empty("jt.horizons", &j.horizons)?;
        for &a in &j.alphas {
            if !(a > 0.0 && a < 1.0) {
                return Err(invalid("jt.alphas", format!("entries must lie in (0, 1), got {a}")));
            }
        }
        for &p in &j.p {
            time_exponent("jt.p", p)?;
        }
        for &t in &j.horizons {
            positive("jt.horizons", t)?;
        }

        let t = &self.tail;
        time_exponent("tail.p", t.p)?;
        space_exponent("tail.q", t.q)?;
        positive("tail.horizon", t.horizon)?;
        if self.alpha * t.p > 2.0 {
            return Err(invalid("tail.p", format!("alpha * p = {} exceeds 2", self.alpha * t.p)));
        }
        non_empty("tail.lambdas", &t.lambdas)?;
        if t.lambdas.iter().any(|l| !(*l > 0.0)) || t.lambdas.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("tail.lambdas", "must be positive and strictly increasing"));
        }

        let mo = &self.moments;
        non_empty("moments.coefficients", &mo.coefficients)?;
        non_empty("moments.r", &mo.r)?;
        if mo.r.iter().any(|r| !(*r >= 1.0 && r.is_finite())) {
            return Err(invalid("moments.r", "entries must satisfy 1 <= r < inf"));
        }
        if mo.samples < 100 {
            return Err(invalid("moments.samples", "must be at least 100"));
        }

        let c = &self.coverage;
        time_exponent("coverage.p1", c.p1)?;
        time_exponent("coverage.p2", c.p2)?;
        space_exponent("coverage.q1", c.q1)?;
        space_exponent("coverage.q2", c.q2)?;
        positive("coverage.delta", c.delta)?;
        positive("coverage.lambda", c.lambda)?;
        if self.alpha * c.p1 > 2.0 {
            return Err(invalid("coverage.p1", format!("alpha * p1 = {} exceeds 2", self.alpha * c.p1)));
        }
        if self.alpha * c.p2 >= 2.0 {
            return Err(invalid("coverage.p2", format!("alpha * p2 = {} must be below 2", self.alpha * c.p2)));
        }
        if c.max_rung > 30 {
            return Err(invalid("coverage.max_rung", "must be at most 30"));
        }

        let s = &self.solver;
        positive("solver.dt", s.dt)?;
        positive("solver.horizon", s.horizon)?;
        whole_steps("solver.horizon", s.horizon, s.dt)?;
        let limit = m as f64 / 3.0;
        if !(s.cutoff >= 1.0 && s.cutoff <= limit) {
            return Err(invalid("solver.cutoff", format!("must lie in [1, grid.size/3 = {limit:.3}]")));
        }
        if s.snapshot_every == 0 {
            return Err(invalid("solver.snapshot_every", "must be at least 1"));
        }
        if s.picard_iterations < 3 {
            return Err(invalid("solver.picard_iterations", "must be at least 3"));
        }
        positive("solver.picard_horizon", s.picard_horizon)?;

        let r = &self.restart;
        positive("restart.dt", r.dt)?;
        positive("restart.horizon", r.horizon)?;
        whole_steps("restart.horizon", r.horizon, r.dt)?;
        if r.snapshot_every == 0 {
            return Err(invalid("restart.snapshot_every", "must be at least 1"));
        }
        Ok(())
    }
}
