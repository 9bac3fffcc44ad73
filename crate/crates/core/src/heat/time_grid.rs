use super::HeatError;

/// Node placement of a [`TimeGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeScheme {
    LogSpaced,
    Uniform,
}

impl TimeScheme {
    pub fn name(self) -> &'static str {
        match self {
            TimeScheme::LogSpaced => "log_spaced",
            TimeScheme::Uniform => "uniform",
        }
    }
}

/// Strictly increasing positive nodes in `(0, T]`, ending at `T`.
///
/// Quadratures over `[0, T]` add the left endpoint `t = 0` themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
    scheme: TimeScheme,
    horizon: f64,
}

pub const MIN_NODES: usize = 16;

impl TimeGrid {
    /// Geometric nodes from `first` to `horizon`.
    pub fn log_spaced(horizon: f64, count: usize, first: f64) -> Result<Self, HeatError> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(HeatError::InvalidTimeGrid(format!("horizon {horizon}")));
        }
        if count < MIN_NODES {
            return Err(HeatError::InvalidTimeGrid(format!("{count} nodes, need at least {MIN_NODES}")));
        }
        if !(first > 0.0 && first <= horizon / 100.0) {
            return Err(HeatError::InvalidTimeGrid(format!(
                "first node {first} must lie in (0, T/100]"
            )));
        }
        let ratio = (horizon / first).ln() / (count - 1) as f64;
        let mut nodes: Vec<f64> = (0..count).map(|k| first * (ratio * k as f64).exp()).collect();
        *nodes.last_mut().unwrap() = horizon;
        Ok(Self {
            nodes,
            scheme: TimeScheme::LogSpaced,
            horizon,
        })
    }

    /// Equally spaced nodes `kT/count`, `k = 1..=count`.
    pub fn uniform(horizon: f64, count: usize) -> Result<Self, HeatError> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(HeatError::InvalidTimeGrid(format!("horizon {horizon}")));
        }
        if count < MIN_NODES {
            return Err(HeatError::InvalidTimeGrid(format!("{count} nodes, need at least {MIN_NODES}")));
        }
        let nodes = (1..=count).map(|k| horizon * k as f64 / count as f64).collect();
        Ok(Self {
            nodes,
            scheme: TimeScheme::Uniform,
            horizon,
        })
    }

    /// Log-spaced grid whose first node resolves the fastest heat decay
    /// `e^{−t|n|²}` present on a lattice with maximal `|n|² = max_norm_sq`.
    pub fn resolving(horizon: f64, count: usize, max_norm_sq: f64) -> Result<Self, HeatError> {
        let first = (horizon / 100.0).min(0.05 / max_norm_sq.max(1.0));
        Self::log_spaced(horizon, count, first)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn scheme(&self) -> TimeScheme {
        self.scheme
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Grid with twice the nodes; log-spaced grids also halve the first node.
    pub fn refined(&self) -> Self {
        let count = 2 * self.nodes.len();
        match self.scheme {
            TimeScheme::LogSpaced => Self::log_spaced(self.horizon, count, self.nodes[0] / 2.0),
            TimeScheme::Uniform => Self::uniform(self.horizon, count),
        }
        .expect("refinement of a valid grid is valid")
    }

    /// `0` followed by the nodes: the abscissae of `[0, T]` quadratures.
    pub fn with_origin(&self) -> Vec<f64> {
        std::iter::once(0.0).chain(self.nodes.iter().copied()).collect()
    }
}

/// Composite trapezoid rule on arbitrary abscissae.
pub fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(t.len(), y.len());
    t.windows(2)
        .zip(y.windows(2))
        .map(|(tt, yy)| 0.5 * (tt[1] - tt[0]) * (yy[0] + yy[1]))
        .sum()
}

/// Running trapezoid integrals `∫_{t_0}^{t_k}`, starting with 0.
pub fn cumulative_trapezoid(t: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len());
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..t.len() {
        acc += 0.5 * (t[k] - t[k - 1]) * (y[k] + y[k - 1]);
        out.push(acc);
    }
    out
}
