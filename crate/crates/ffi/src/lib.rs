//! C ABI over `online_pca`.
//!
//! Every function returns an [`OpcaStatus`]. On failure the message is kept
//! per thread and can be read with [`opca_last_error_message`]. Panics are
//! caught at the boundary and reported as `OPCA_STATUS_PANIC`.
//!
//! Enumerations cross the boundary as `uint32_t` values of the `OpcaAlgorithm`,
//! `OpcaRegime`, `OpcaBoundMode` and `OpcaAdversary` constants, so an
//! out-of-range value is an ordinary invalid-argument error.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use online_pca::adversaries::AdversaryKind;
use online_pca::algorithms::{regret_bound_value, tune_eta, Algorithm, BoundMode, BoundSpec, LearnerState, Regime};
use online_pca::capped_simplex::{entropic_project, euclidean_project};
use online_pca::harness::{run_game, EtaChoice, GameConfig, GameMode, LossMode, Representation};
use online_pca::matrix::Instance;
use online_pca::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpcaStatus {
    Ok = 0,
    InvalidArgument = 1,
    NumericFailure = 2,
    Unsupported = 3,
    SequenceExhausted = 4,
    NullPointer = 5,
    Panic = 6,
}

#[repr(u32)]
#[derive(Debug, Clone, Copy)]
pub enum OpcaAlgorithm {
    LossMeg = 0,
    GainMeg = 1,
    Gd = 2,
}

#[repr(u32)]
#[derive(Debug, Clone, Copy)]
pub enum OpcaRegime {
    Sparse = 0,
    Dense = 1,
    /// Infer from the adversary (game configs only).
    Infer = 2,
}

#[repr(u32)]
#[derive(Debug, Clone, Copy)]
pub enum OpcaBoundMode {
    Horizon = 0,
    Budget = 1,
    GainBudget = 2,
}

#[repr(u32)]
#[derive(Debug, Clone, Copy)]
pub enum OpcaAdversary {
    First2k = 0,
    Uniform = 1,
    DenseBernoulli = 2,
    GdKiller = 3,
    Zero = 4,
}

/// Opaque learner handle.
pub struct OpcaLearner {
    state: LearnerState,
}

/// Game description for [`opca_run_game`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct OpcaGameConfig {
    pub n: usize,
    pub k: usize,
    /// Non-zero: play to `budget`; zero: play `horizon` trials.
    pub use_budget: u32,
    pub horizon: usize,
    pub budget: f64,
    pub algorithm: u32,
    pub adversary: u32,
    pub regime: u32,
    /// Learning rate; zero or negative selects the tuned rate.
    pub eta: f64,
    /// Non-zero charges sampled instead of expected losses.
    pub sampled: u32,
    /// Non-zero plays the matrix learner on rotated instances.
    pub matrix: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct OpcaGameSummary {
    pub trials: usize,
    pub eta: f64,
    pub alg_loss: f64,
    pub comp_loss: f64,
    pub regret: f64,
    /// NaN when no closed-form bound applies.
    pub bound: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> OpcaStatus {
    match err {
        Error::InvalidArgument(_) => OpcaStatus::InvalidArgument,
        Error::NumericFailure(_) | Error::PhaseCapExceeded { .. } => OpcaStatus::NumericFailure,
        Error::UnsupportedSpec(_) => OpcaStatus::Unsupported,
        Error::SequenceExhausted => OpcaStatus::SequenceExhausted,
    }
}

enum Failure {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> OpcaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OpcaStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            OpcaStatus::NullPointer
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            OpcaStatus::Panic
        }
    }
}

fn bad(msg: impl Into<String>) -> Failure {
    Failure::Lib(Error::InvalidArgument(msg.into()))
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize, what: &'static str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

fn algorithm(v: u32) -> Result<Algorithm, Failure> {
    Ok(match v {
        0 => Algorithm::LossMeg,
        1 => Algorithm::GainMeg,
        2 => Algorithm::Gd,
        _ => return Err(bad(format!("unknown algorithm {v}"))),
    })
}

fn regime(v: u32) -> Result<Option<Regime>, Failure> {
    Ok(match v {
        0 => Some(Regime::Sparse),
        1 => Some(Regime::Dense),
        2 => None,
        _ => return Err(bad(format!("unknown regime {v}"))),
    })
}

fn adversary(v: u32) -> Result<AdversaryKind, Failure> {
    Ok(match v {
        0 => AdversaryKind::SparseFirst2k,
        1 => AdversaryKind::SparseUniform,
        2 => AdversaryKind::DenseBernoulli,
        3 => AdversaryKind::GdKiller,
        4 => AdversaryKind::Zero,
        _ => return Err(bad(format!("unknown adversary {v}"))),
    })
}

fn bound_spec(alg: u32, reg: u32, mode: u32, value: f64, n: usize, k: usize) -> Result<BoundSpec, Failure> {
    let mode = match mode {
        0 => BoundMode::Horizon(value),
        1 => BoundMode::Budget(value),
        2 => BoundMode::GainBudget(value),
        _ => return Err(bad(format!("unknown bound mode {mode}"))),
    };
    let regime = regime(reg)?.ok_or_else(|| bad("bounds need an explicit regime"))?;
    Ok(BoundSpec { algorithm: algorithm(alg)?, regime, mode, n, k })
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length, or 0
/// when there is none.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn opca_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let copy = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, copy);
                *buf.add(copy) = 0;
            }
            bytes.len()
        }
    })
}

/// Euclidean projection of `v[0..n]` onto `{w in [0,1]^n : sum w = m}`.
///
/// # Safety
/// `v` and `out` must point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn opca_euclidean_project(v: *const f64, n: usize, m: usize, out: *mut f64) -> OpcaStatus {
    guard(|| {
        let w = euclidean_project(input(v, n, "v")?, m)?;
        output(out, n, "out")?.copy_from_slice(w.as_slice());
        Ok(())
    })
}

/// Relative-entropy projection of positive `v[0..n]` onto the capped
/// simplex with sum `m`.
///
/// # Safety
/// `v` and `out` must point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn opca_entropic_project(v: *const f64, n: usize, m: usize, out: *mut f64) -> OpcaStatus {
    guard(|| {
        let w = entropic_project(input(v, n, "v")?, m)?;
        output(out, n, "out")?.copy_from_slice(w.as_slice());
        Ok(())
    })
}

/// Creates a learner at the uniform start. `matrix` non-zero selects the
/// matrix form. The handle must be released with [`opca_learner_free`].
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn opca_learner_new(
    algorithm_id: u32,
    n: usize,
    k: usize,
    eta: f64,
    matrix: u32,
    out: *mut *mut OpcaLearner,
) -> OpcaStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let alg = algorithm(algorithm_id)?;
        let state = if matrix != 0 {
            LearnerState::new_matrix(alg, n, k, eta)?
        } else {
            LearnerState::new_vector(alg, n, k, eta)?
        };
        *out = Box::into_raw(Box::new(OpcaLearner { state }));
        Ok(())
    })
}

/// # Safety
/// `learner` must be null or a handle from [`opca_learner_new`] that has not
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn opca_learner_free(learner: *mut OpcaLearner) {
    if !learner.is_null() {
        drop(Box::from_raw(learner));
    }
}

unsafe fn learner_mut<'a>(learner: *mut OpcaLearner) -> Result<&'a mut OpcaLearner, Failure> {
    learner.as_mut().ok_or(Failure::Null("learner"))
}

/// One update on the loss vector `loss[0..n]` (a diagonal instance for
/// matrix learners).
///
/// # Safety
/// `learner` must be a live handle and `loss` must point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn opca_learner_step_vector(learner: *mut OpcaLearner, loss: *const f64, n: usize) -> OpcaStatus {
    guard(|| {
        let l = learner_mut(learner)?;
        let loss = input(loss, n, "loss")?;
        l.state = l.state.step(&Instance::rotated_loss(None, loss)?)?;
        Ok(())
    })
}

/// One update on the symmetric instance `x` (row-major `n × n`).
///
/// # Safety
/// `learner` must be a live handle and `x` must point to `n * n` doubles.
#[no_mangle]
pub unsafe extern "C" fn opca_learner_step_matrix(learner: *mut OpcaLearner, x: *const f64, n: usize) -> OpcaStatus {
    guard(|| {
        let l = learner_mut(learner)?;
        let len = n.checked_mul(n).ok_or_else(|| bad("dimension overflow"))?;
        let x = input(x, len, "x")?;
        let m = online_pca::nalgebra::DMatrix::from_row_slice(n, n, x);
        l.state = l.state.step(&Instance::dense(m)?)?;
        Ok(())
    })
}

/// Per-expert loss weights (diagonal of the parameter in the standard
/// basis, complemented for Gain MEG) into `out[0..n]`.
///
/// # Safety
/// `learner` must be a live handle and `out` must point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn opca_learner_weights(learner: *const OpcaLearner, out: *mut f64, n: usize) -> OpcaStatus {
    guard(|| {
        let l = learner.as_ref().ok_or(Failure::Null("learner"))?;
        if l.state.n() != n {
            return Err(bad(format!("learner has dimension {}, buffer has {n}", l.state.n())));
        }
        output(out, n, "out")?.copy_from_slice(l.state.loss_weights(None).as_slice());
        Ok(())
    })
}

/// Expected loss the learner would pay on the loss vector `loss[0..n]`.
///
/// # Safety
/// `learner` must be a live handle, `loss` must point to `n` doubles and
/// `out` to one double.
#[no_mangle]
pub unsafe extern "C" fn opca_learner_expected_loss(
    learner: *const OpcaLearner,
    loss: *const f64,
    n: usize,
    out: *mut f64,
) -> OpcaStatus {
    guard(|| {
        let l = learner.as_ref().ok_or(Failure::Null("learner"))?;
        let value = l.state.expected_loss(&Instance::rotated_loss(None, input(loss, n, "loss")?)?)?;
        *output(out, 1, "out")?.first_mut().expect("one slot") = value;
        Ok(())
    })
}

/// Closed-form regret bound; `OPCA_STATUS_UNSUPPORTED` when none applies.
///
/// # Safety
/// `out` must point to one double.
#[no_mangle]
pub unsafe extern "C" fn opca_regret_bound(
    algorithm_id: u32,
    regime_id: u32,
    mode: u32,
    value: f64,
    n: usize,
    k: usize,
    out: *mut f64,
) -> OpcaStatus {
    guard(|| {
        let b = regret_bound_value(&bound_spec(algorithm_id, regime_id, mode, value, n, k)?)?;
        *output(out, 1, "out")?.first_mut().expect("one slot") = b;
        Ok(())
    })
}

/// Default learning rate; `OPCA_STATUS_UNSUPPORTED` when none applies.
///
/// # Safety
/// `out` must point to one double.
#[no_mangle]
pub unsafe extern "C" fn opca_tune_eta(
    algorithm_id: u32,
    regime_id: u32,
    mode: u32,
    value: f64,
    n: usize,
    k: usize,
    out: *mut f64,
) -> OpcaStatus {
    guard(|| {
        let e = tune_eta(&bound_spec(algorithm_id, regime_id, mode, value, n, k)?)?;
        *output(out, 1, "out")?.first_mut().expect("one slot") = e;
        Ok(())
    })
}

/// Plays one seeded game and writes its totals.
///
/// # Safety
/// `config` must point to a valid config and `out` to a summary slot.
#[no_mangle]
pub unsafe extern "C" fn opca_run_game(config: *const OpcaGameConfig, seed: u64, out: *mut OpcaGameSummary) -> OpcaStatus {
    guard(|| {
        let c = config.as_ref().ok_or(Failure::Null("config"))?;
        let out = out.as_mut().ok_or(Failure::Null("out"))?;
        let mode = if c.use_budget != 0 { GameMode::Budget(c.budget) } else { GameMode::Horizon(c.horizon) };
        let mut game = GameConfig::new(c.n, c.k, mode, algorithm(c.algorithm)?, adversary(c.adversary)?);
        game.regime = regime(c.regime)?;
        game.eta = if c.eta > 0.0 { EtaChoice::Explicit(c.eta) } else { EtaChoice::Auto };
        game.seeds = vec![seed];
        game.loss_mode = if c.sampled != 0 { LossMode::Sampled } else { LossMode::Expected };
        game.representation = if c.matrix != 0 { Representation::Matrix } else { Representation::Vector };
        let t = run_game(&game, seed)?;
        *out = OpcaGameSummary {
            trials: t.trials(),
            eta: t.eta,
            alg_loss: t.alg_loss,
            comp_loss: t.comp_loss,
            regret: t.regret,
            bound: t.bound,
        };
        Ok(())
    })
}
