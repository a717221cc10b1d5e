//! The online learners and their closed-form guarantees.
//!
//! Three mirror-descent learners are provided, each in matrix form (online
//! PCA over generalized density matrices) and vector form (the m-set
//! problem over the capped simplex):
//!
//! * Loss MEG: relative-entropy regularization, trace `m = n - k`,
//!   minimizes compression loss.
//! * Gain MEG: relative-entropy regularization, trace `k`, maximizes the
//!   captured variance `tr(W X)`.
//! * GD: squared Frobenius regularization, trace `m`. The loss and gain
//!   versions coincide.
//!
//! Each step is a pure state-in, state-out transition.
//!
//! Follow-the-perturbed-leader and incremental off-line variants of GD are
//! not provided; [`LearnerState`] is plain data, so such a learner can be
//! added as another [`Algorithm`] without touching the harness protocol.

mod bounds;
mod learner;

pub use bounds::{regret_bound_value, tune_eta, BoundMode, BoundSpec};
pub use learner::{
    gain_meg_step, gd_step, loss_meg_step, vec_gain_meg_step, vec_gd_step, vec_loss_meg_step,
    Algorithm, LearnerState, Parameter, EIGENVALUE_FLOOR,
};

/// Instance regime: dyads of unit vectors (trace one) or dense PSD
/// matrices with spectrum in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Sparse,
    Dense,
}

impl std::str::FromStr for Regime {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "sparse" => Ok(Regime::Sparse),
            "dense" => Ok(Regime::Dense),
            other => crate::error::invalid(format!("unknown regime '{other}'")),
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Sparse => "sparse",
            Regime::Dense => "dense",
        })
    }
}
