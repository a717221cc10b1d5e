use super::{Algorithm, Regime};
use crate::error::{invalid, Error, Result};

/// What a regret bound is expressed in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundMode {
    /// Number of trials `T`.
    Horizon(f64),
    /// Upper bound `B` on the comparator's compression loss.
    Budget(f64),
    /// Upper bound `G` on the comparator's gain.
    GainBudget(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSpec {
    pub algorithm: Algorithm,
    pub regime: Regime,
    pub mode: BoundMode,
    pub n: usize,
    pub k: usize,
}

impl BoundSpec {
    pub fn m(&self) -> usize {
        self.n - self.k
    }

    fn validate(&self) -> Result<()> {
        if self.k < 1 || self.k >= self.n {
            return invalid(format!("need 1 <= k < n, got n = {}, k = {}", self.n, self.k));
        }
        match self.mode {
            BoundMode::Horizon(t) if !(t >= 1.0) => invalid(format!("horizon {t} must be >= 1")),
            BoundMode::Budget(b) | BoundMode::GainBudget(b) if !(b >= 0.0) || !b.is_finite() => {
                invalid(format!("budget {b} must be finite and >= 0"))
            }
            _ => Ok(()),
        }
    }

    /// Loss budget implied by a horizon: `Tm/n` for dyads (the spectrum of
    /// `C` sums to at most `T`), `Tm` for dense instances.
    fn loss_budget(&self) -> Option<f64> {
        let (n, m) = (self.n as f64, self.m() as f64);
        match self.mode {
            BoundMode::Budget(b) => Some(b),
            BoundMode::Horizon(t) => Some(match self.regime {
                Regime::Sparse => t * m / n,
                Regime::Dense => t * m,
            }),
            BoundMode::GainBudget(_) => None,
        }
    }

    /// Gain budget implied by a horizon: `T` for dyads, `kT` for dense.
    fn gain_budget(&self) -> Option<f64> {
        match self.mode {
            BoundMode::GainBudget(g) => Some(g),
            BoundMode::Horizon(t) => Some(match self.regime {
                Regime::Sparse => t,
                Regime::Dense => self.k as f64 * t,
            }),
            BoundMode::Budget(_) => None,
        }
    }

    /// Largest Frobenius norm an instance of the regime can have.
    fn frobenius_cap(&self) -> f64 {
        match self.regime {
            Regime::Sparse => 1.0,
            Regime::Dense => (self.n as f64).sqrt(),
        }
    }

    fn unsupported(&self) -> Error {
        Error::UnsupportedSpec(format!("{} with {:?}", self.algorithm, self.mode))
    }
}

fn meg_rate(rank: f64, n: f64, budget: f64) -> f64 {
    (1.0 + (2.0 * rank * (n / rank).ln() / budget.max(1.0)).sqrt()).ln()
}

/// Default learning rate for `spec`.
///
/// MEG variants use `ln(1 + sqrt(2 r ln(n/r) / max(B, 1)))` with `r = m`
/// and the loss budget (Loss MEG) or `r = k` and the gain budget (Gain
/// MEG); horizons are first converted to budgets. GD uses
/// `sqrt(mk/n) / (F sqrt(T))` with `F` the regime's Frobenius cap. These
/// are defaults; every entry point also takes an explicit rate.
pub fn tune_eta(spec: &BoundSpec) -> Result<f64> {
    spec.validate()?;
    if let BoundMode::Budget(b) | BoundMode::GainBudget(b) = spec.mode {
        if b <= 0.0 {
            return invalid("learning-rate tuning needs a positive budget");
        }
    }
    let (n, m, k) = (spec.n as f64, spec.m() as f64, spec.k as f64);
    match spec.algorithm {
        Algorithm::LossMeg => {
            let b = spec.loss_budget().ok_or_else(|| spec.unsupported())?;
            Ok(meg_rate(m, n, b))
        }
        Algorithm::GainMeg => {
            let g = spec.gain_budget().ok_or_else(|| spec.unsupported())?;
            Ok(meg_rate(k, n, g))
        }
        Algorithm::Gd => match spec.mode {
            BoundMode::Horizon(t) => Ok((m * k / n).sqrt() / (spec.frobenius_cap() * t.sqrt())),
            _ => Err(spec.unsupported()),
        },
    }
}

/// Closed-form regret bound for `spec`.
///
/// * Loss MEG, budget `B`: `sqrt(2 B m ln(n/m)) + m ln(n/m)`; horizon
///   bounds follow by `B = Tm/n` (sparse) or `B = Tm` (dense).
/// * Gain MEG, gain budget `G`: `sqrt(2 k G ln(n/k))`; horizon bounds via
///   `G = T` (sparse) or `G = kT` (dense).
/// * GD, horizon `T`: `F sqrt(mkT/n)` with `F = 1` (sparse) or `sqrt(n)`.
pub fn regret_bound_value(spec: &BoundSpec) -> Result<f64> {
    spec.validate()?;
    let (n, m, k) = (spec.n as f64, spec.m() as f64, spec.k as f64);
    match spec.algorithm {
        Algorithm::LossMeg => {
            let b = spec.loss_budget().ok_or_else(|| spec.unsupported())?;
            let c = m * (n / m).ln();
            Ok((2.0 * b * c).sqrt() + c)
        }
        Algorithm::GainMeg => {
            let g = spec.gain_budget().ok_or_else(|| spec.unsupported())?;
            Ok((2.0 * k * g * (n / k).ln()).sqrt())
        }
        Algorithm::Gd => match spec.mode {
            BoundMode::Horizon(t) => Ok(spec.frobenius_cap() * (m * k * t / n).sqrt()),
            _ => Err(spec.unsupported()),
        },
    }
}
