use super::Trajectory;
use crate::heat::cumulative_trapezoid;

/// Instantaneous energy quantities at one ledger time.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct LedgerSample {
    pub t: f64,
    pub l2sq_v: f64,
    pub grad_sq_v: f64,
    /// `‖∇P_{≤N}v‖²`.
    pub grad_sq_w: f64,
    /// `2∫ ∂_j w_i g_i U_j dx`.
    pub rhs_density: f64,
    pub l2sq_u: f64,
    /// `2⟨∇g, ∇v⟩`.
    pub grad_cross: f64,
    /// Closed-form `∫₀ᵗ ‖∇g‖²`.
    pub g_dissipation: f64,
}

/// Time series of the energy bookkeeping of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyLedger {
    samples: Vec<LedgerSample>,
    /// Running `∫ ‖∇v‖²` by the exponentially fitted trapezoid.
    fitted: Vec<f64>,
}

/// One CSV row of the ledger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRow {
    pub t: f64,
    pub l2sq_v: f64,
    pub cum_dissipation: f64,
    pub e_v: f64,
    pub e_u: f64,
    pub rhs_identity: f64,
    pub residual: f64,
}

impl EnergyLedger {
    pub const HEADER: [&'static str; 7] = ["t", "l2sq_v", "cum_dissipation", "E_v", "E_u", "rhs_identity", "residual"];

    pub(crate) fn push(&mut self, s: LedgerSample, fitted_increment: f64) {
        let prev = self.fitted.last().copied().unwrap_or(0.0);
        self.fitted.push(prev + fitted_increment);
        self.samples.push(s);
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn l2sq_v(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.l2sq_v).collect()
    }

    fn cumulative(&self, f: impl Fn(&LedgerSample) -> f64) -> Vec<f64> {
        let y: Vec<f64> = self.samples.iter().map(f).collect();
        cumulative_trapezoid(&self.times(), &y)
    }

    /// `∫₀ᵗ ‖∇v‖²` by the trapezoid rule.
    pub fn cum_dissipation(&self) -> Vec<f64> {
        self.cumulative(|s| s.grad_sq_v)
    }

    /// `∫₀ᵗ ‖∇v‖²` integrating the linear decay of each mode exactly.
    pub fn fitted_dissipation(&self) -> &[f64] {
        &self.fitted
    }

    /// `E(v, t) = ‖v(t)‖² + ∫₀ᵗ ‖∇v‖²`.
    pub fn e_v(&self) -> Vec<f64> {
        self.samples
            .iter()
            .zip(self.cum_dissipation())
            .map(|(s, d)| s.l2sq_v + d)
            .collect()
    }

    /// `E(u, t)` for `u = g + v`.
    pub fn e_u(&self) -> Vec<f64> {
        self.samples
            .iter()
            .zip(self.cumulative(|s| s.grad_sq_v + s.grad_cross))
            .map(|(s, d)| s.l2sq_u + s.g_dissipation + d)
            .collect()
    }

    /// `∫₀ᵗ 2∫ ∂_j w_i g_i U_j dx ds`.
    pub fn rhs_identity(&self) -> Vec<f64> {
        self.cumulative(|s| s.rhs_density)
    }

    /// `‖v(t)‖² + 2∫₀ᵗ‖∇P_{≤N}v‖² − rhs`, relative to `max(E(v,t), ε)`.
    pub fn residual(&self) -> Vec<f64> {
        let diss = self.cumulative(|s| s.grad_sq_w);
        let rhs = self.rhs_identity();
        self.samples
            .iter()
            .zip(self.e_v())
            .enumerate()
            .map(|(k, (s, e))| (s.l2sq_v + 2.0 * diss[k] - rhs[k]) / e.max(f64::MIN_POSITIVE))
            .collect()
    }

    /// `‖v(t)‖² + 2∫‖∇v‖²` with the fitted integral, relative to `‖v(t₀)‖²`;
    /// for unforced runs this is at most 1 (Leray energy inequality).
    pub fn leray_ratio(&self) -> Vec<f64> {
        let e0 = self.samples.first().map_or(0.0, |s| s.l2sq_v);
        self.samples
            .iter()
            .zip(&self.fitted)
            .map(|(s, d)| (s.l2sq_v + 2.0 * d) / e0.max(f64::MIN_POSITIVE))
            .collect()
    }

    pub fn rows(&self) -> Vec<LedgerRow> {
        let (diss, ev, eu, rhs, res) = (self.cum_dissipation(), self.e_v(), self.e_u(), self.rhs_identity(), self.residual());
        self.samples
            .iter()
            .enumerate()
            .map(|(k, s)| LedgerRow {
                t: s.t,
                l2sq_v: s.l2sq_v,
                cum_dissipation: diss[k],
                e_v: ev[k],
                e_u: eu[k],
                rhs_identity: rhs[k],
                residual: res[k],
            })
            .collect()
    }
}

/// Relative energy-identity residual at every ledger time.
pub fn energy_identity_residual(trajectory: &Trajectory) -> Vec<f64> {
    trajectory.ledger.residual()
}
