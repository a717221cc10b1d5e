use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::capped_simplex::{entropic_project, euclidean_project, WeightVector};
use crate::error::{invalid, Error, Result};
use crate::matrix::{eigh, expected_loss, GenDensityMatrix, Instance};

/// Eigenvalues (and vector weights) are raised to this floor before the
/// logarithm in the MEG updates.
pub const EIGENVALUE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    LossMeg,
    GainMeg,
    Gd,
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "loss-meg" | "loss_meg" => Ok(Algorithm::LossMeg),
            "gain-meg" | "gain_meg" => Ok(Algorithm::GainMeg),
            "gd" => Ok(Algorithm::Gd),
            other => invalid(format!("unknown algorithm '{other}'")),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::LossMeg => "loss-meg",
            Algorithm::GainMeg => "gain-meg",
            Algorithm::Gd => "gd",
        })
    }
}

impl Algorithm {
    /// Trace of the parameter: `k` for Gain MEG, `m = n - k` otherwise.
    pub fn trace_target(self, n: usize, k: usize) -> usize {
        match self {
            Algorithm::GainMeg => k,
            Algorithm::LossMeg | Algorithm::Gd => n - k,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Parameter {
    Matrix(GenDensityMatrix),
    Vector(WeightVector),
}

/// A learner between trials.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerState {
    pub algorithm: Algorithm,
    pub parameter: Parameter,
    pub eta: f64,
    pub trace_target: usize,
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0) || !eta.is_finite() {
        return invalid(format!("learning rate must be positive and finite, got {eta}"));
    }
    Ok(())
}

fn check_problem(n: usize, k: usize) -> Result<()> {
    if k < 1 || k >= n {
        return invalid(format!("need 1 <= k < n, got n = {n}, k = {k}"));
    }
    Ok(())
}

impl LearnerState {
    /// Matrix learner started at the uniform mixture `(trace/n) I`.
    pub fn new_matrix(algorithm: Algorithm, n: usize, k: usize, eta: f64) -> Result<Self> {
        check_problem(n, k)?;
        check_eta(eta)?;
        let trace_target = algorithm.trace_target(n, k);
        Ok(Self {
            algorithm,
            parameter: Parameter::Matrix(GenDensityMatrix::uniform(n, trace_target)?),
            eta,
            trace_target,
        })
    }

    /// Vector learner started at `trace/n` on every expert.
    pub fn new_vector(algorithm: Algorithm, n: usize, k: usize, eta: f64) -> Result<Self> {
        check_problem(n, k)?;
        check_eta(eta)?;
        let trace_target = algorithm.trace_target(n, k);
        Ok(Self {
            algorithm,
            parameter: Parameter::Vector(WeightVector::uniform(n, trace_target)?),
            eta,
            trace_target,
        })
    }

    pub fn n(&self) -> usize {
        match &self.parameter {
            Parameter::Matrix(w) => w.n(),
            Parameter::Vector(w) => w.len(),
        }
    }

    /// One update on the instance `x` (matrix learners) or on its diagonal
    /// (vector learners, which require a diagonal instance).
    pub fn step(&self, x: &Instance) -> Result<Self> {
        match (&self.parameter, self.algorithm) {
            (Parameter::Matrix(_), Algorithm::LossMeg) => loss_meg_step(self, x),
            (Parameter::Matrix(_), Algorithm::GainMeg) => gain_meg_step(self, x),
            (Parameter::Matrix(_), Algorithm::Gd) => gd_step(self, x),
            (Parameter::Vector(_), _) => {
                let m = x.to_matrix();
                let off_diagonal = m
                    .iter()
                    .enumerate()
                    .any(|(idx, v)| idx % m.nrows() != idx / m.nrows() && v.abs() > 1e-12);
                if off_diagonal {
                    return invalid("vector learners only accept diagonal instances");
                }
                self.step_vector(m.diagonal().as_slice())
            }
        }
    }

    /// One update on a loss vector (vector learners only).
    pub fn step_vector(&self, loss: &[f64]) -> Result<Self> {
        let Parameter::Vector(w) = &self.parameter else {
            return invalid("step_vector called on a matrix learner");
        };
        let next = match self.algorithm {
            Algorithm::LossMeg => vec_loss_meg_step(w, loss, self.eta)?,
            Algorithm::GainMeg => vec_gain_meg_step(w, loss, self.eta)?,
            Algorithm::Gd => vec_gd_step(w, loss, self.eta)?,
        };
        Ok(Self { parameter: Parameter::Vector(next), ..self.clone() })
    }

    /// Per-expert probability of being in the m-set that suffers loss.
    ///
    /// Gain MEG's weights are complemented. Matrix learners report the
    /// diagonal of `Qᵀ W Q` for the instance basis `Q`.
    pub fn loss_weights(&self, rotation: Option<&DMatrix<f64>>) -> WeightVector {
        let m = match self.algorithm {
            Algorithm::GainMeg => self.n() - self.trace_target,
            _ => self.trace_target,
        };
        let raw = match &self.parameter {
            Parameter::Vector(w) => w.as_slice().to_vec(),
            Parameter::Matrix(w) => w.weights_in_basis(rotation),
        };
        let raw = match self.algorithm {
            Algorithm::GainMeg => raw.into_iter().map(|x| 1.0 - x).collect(),
            _ => raw,
        };
        WeightVector::from_raw(raw, m)
    }

    /// Expected compression loss of the current mixture on `x`.
    ///
    /// Gain MEG predicts rank-k subspaces, so its loss is `tr(X) - tr(W X)`.
    pub fn expected_loss(&self, x: &Instance) -> Result<f64> {
        let inner = match &self.parameter {
            Parameter::Matrix(w) => expected_loss(w, x)?,
            Parameter::Vector(w) => {
                if w.len() != x.dim() {
                    return invalid("instance dimension does not match the learner");
                }
                let d = x.to_matrix();
                w.dot(d.diagonal().as_slice())
            }
        };
        Ok(match self.algorithm {
            Algorithm::GainMeg => (x.trace() - inner).max(0.0),
            _ => inner,
        })
    }
}

fn matrix_parameter<'a>(state: &'a LearnerState, expected: Algorithm, x: &Instance) -> Result<&'a GenDensityMatrix> {
    if state.algorithm != expected {
        return invalid(format!("{} step called on a {} learner", expected, state.algorithm));
    }
    let Parameter::Matrix(w) = &state.parameter else {
        return invalid("matrix step called on a vector learner");
    };
    if w.n() != x.dim() {
        return invalid(format!("learner is {0}x{0}, instance is {1}x{1}", w.n(), x.dim()));
    }
    check_eta(state.eta)?;
    Ok(w)
}

/// `exp(log W - sign·η X)` followed by the relative-entropy projection of
/// its spectrum onto trace `target`.
fn meg_matrix_update(w: &GenDensityMatrix, x: &Instance, signed_eta: f64, target: usize) -> Result<GenDensityMatrix> {
    let mut exponent = w.spectral_map(|l| l.clamp(EIGENVALUE_FLOOR, 1.0).ln());
    x.add_scaled_to(&mut exponent, -signed_eta);
    let exponent = (&exponent + exponent.transpose()) * 0.5;
    let e = eigh(&exponent)?;
    let shift = e.values.max();
    // exp(μ - max μ) keeps the spectrum representable; the projection is
    // invariant to a common scale.
    let scaled: Vec<f64> = e.values.iter().map(|v| (v - shift).exp()).collect();
    let lambda = entropic_project(&scaled, target)?;
    Ok(GenDensityMatrix::from_parts_unchecked(e.vectors, lambda))
}

/// Loss MEG: minimizes `Δ(W, W_t) + η tr(W X)` over `𝒲_m`.
pub fn loss_meg_step(state: &LearnerState, x: &Instance) -> Result<LearnerState> {
    let w = matrix_parameter(state, Algorithm::LossMeg, x)?;
    let next = meg_matrix_update(w, x, state.eta, state.trace_target)?;
    Ok(LearnerState { parameter: Parameter::Matrix(next), ..state.clone() })
}

/// Gain MEG: minimizes `Δ(W, W_t) - η tr(W X)` over `𝒲_k`.
pub fn gain_meg_step(state: &LearnerState, x: &Instance) -> Result<LearnerState> {
    let w = matrix_parameter(state, Algorithm::GainMeg, x)?;
    let next = meg_matrix_update(w, x, -state.eta, state.trace_target)?;
    Ok(LearnerState { parameter: Parameter::Matrix(next), ..state.clone() })
}

/// GD: Frobenius projection of `W_t - η X` onto `𝒲_m`, done on the
/// spectrum of `W_t - η X`.
pub fn gd_step(state: &LearnerState, x: &Instance) -> Result<LearnerState> {
    let w = matrix_parameter(state, Algorithm::Gd, x)?;
    let mut target = w.to_matrix();
    x.add_scaled_to(&mut target, -state.eta);
    let target = (&target + target.transpose()) * 0.5;
    let e = eigh(&target)?;
    let values: Vec<f64> = e.values.iter().copied().collect();
    let lambda = euclidean_project(&values, state.trace_target)?;
    let next = GenDensityMatrix::from_parts_unchecked(e.vectors, lambda);
    Ok(LearnerState { parameter: Parameter::Matrix(next), ..state.clone() })
}

fn check_vector_step(w: &WeightVector, loss: &[f64], eta: f64) -> Result<()> {
    check_eta(eta)?;
    if loss.len() != w.len() {
        return invalid(format!("loss has {} entries, learner has {}", loss.len(), w.len()));
    }
    if loss.iter().any(|l| !l.is_finite() || *l < 0.0 || *l > 1.0) {
        return invalid("loss entries must lie in [0, 1]");
    }
    Ok(())
}

fn vec_meg(w: &WeightVector, loss: &[f64], signed_eta: f64) -> Result<WeightVector> {
    let exponents: Vec<f64> = w
        .as_slice()
        .iter()
        .zip(loss)
        .map(|(wi, li)| wi.max(EIGENVALUE_FLOOR).ln() - signed_eta * li)
        .collect();
    let shift = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = exponents.iter().map(|e| (e - shift).exp()).collect();
    entropic_project(&scaled, w.m())
}

/// Diagonal Loss MEG: `entropic_project(w_i exp(-η ℓ_i), m)`.
pub fn vec_loss_meg_step(w: &WeightVector, loss: &[f64], eta: f64) -> Result<WeightVector> {
    check_vector_step(w, loss, eta)?;
    vec_meg(w, loss, eta)
}

/// Diagonal Gain MEG: `entropic_project(w_i exp(η ℓ_i), k)`.
pub fn vec_gain_meg_step(w: &WeightVector, loss: &[f64], eta: f64) -> Result<WeightVector> {
    check_vector_step(w, loss, eta)?;
    vec_meg(w, loss, -eta)
}

/// Diagonal GD: `euclidean_project(w - η ℓ, m)`.
pub fn vec_gd_step(w: &WeightVector, loss: &[f64], eta: f64) -> Result<WeightVector> {
    check_vector_step(w, loss, eta)?;
    let shifted: Vec<f64> = w.as_slice().iter().zip(loss).map(|(wi, li)| wi - eta * li).collect();
    euclidean_project(&shifted, w.m())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;

    fn diag_state(algorithm: Algorithm, w: &[f64], trace: usize, eta: f64) -> LearnerState {
        LearnerState {
            algorithm,
            parameter: Parameter::Matrix(GenDensityMatrix::from_diagonal(
                WeightVector::new(w.to_vec(), trace).unwrap(),
            )),
            eta,
            trace_target: trace,
        }
    }

    fn matrix_of(state: &LearnerState) -> DMatrix<f64> {
        match &state.parameter {
            Parameter::Matrix(w) => w.to_matrix(),
            Parameter::Vector(w) => DMatrix::from_diagonal(&DVector::from_column_slice(w.as_slice())),
        }
    }

    fn assert_diag(state: &LearnerState, expected: &[f64], tol: f64) {
        let m = matrix_of(state);
        for i in 0..expected.len() {
            for j in 0..expected.len() {
                let e = if i == j { expected[i] } else { 0.0 };
                assert_abs_diff_eq!(m[(i, j)], e, epsilon = tol);
            }
        }
    }

    /// Minimizes `Σ w ln(w/w_t) - w + w_t + s η ⟨w, ℓ⟩` over the two-point
    /// simplex by golden-section search on `w_1`.
    fn argmin_two_expert(wt: [f64; 2], loss: [f64; 2], signed_eta: f64) -> [f64; 2] {
        let obj = |a: f64| {
            let w = [a, 1.0 - a];
            (0..2)
                .map(|i| w[i] * (w[i] / wt[i]).ln() - w[i] + wt[i] + signed_eta * w[i] * loss[i])
                .sum::<f64>()
        };
        let (mut lo, mut hi) = (1e-12, 1.0 - 1e-12);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let a = hi - g * (hi - lo);
            let b = lo + g * (hi - lo);
            if obj(a) < obj(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        let a = 0.5 * (lo + hi);
        [a, 1.0 - a]
    }

    #[test]
    fn zero_instance_leaves_parameter() {
        let zero = Instance::DensePsd(DMatrix::zeros(3, 3));
        for algorithm in [Algorithm::LossMeg, Algorithm::GainMeg, Algorithm::Gd] {
            let s = LearnerState::new_matrix(algorithm, 3, 1, 0.7).unwrap();
            let next = s.step(&zero).unwrap();
            assert!((matrix_of(&next) - matrix_of(&s)).abs().max() < 1e-14, "{algorithm}");
        }
    }

    #[test]
    fn loss_meg_two_expert_example() {
        let s = diag_state(Algorithm::LossMeg, &[0.5, 0.5], 1, 2f64.ln());
        let x = Instance::from_loss_vector(&[1.0, 0.0]).unwrap();
        let next = loss_meg_step(&s, &x).unwrap();
        assert_diag(&next, &[1.0 / 3.0, 2.0 / 3.0], 1e-12);
        let oracle = argmin_two_expert([0.5, 0.5], [1.0, 0.0], 2f64.ln());
        assert_diag(&next, &oracle, 1e-8);
    }

    #[test]
    fn gain_meg_two_expert_example() {
        let s = diag_state(Algorithm::GainMeg, &[0.5, 0.5], 1, 2f64.ln());
        let x = Instance::from_loss_vector(&[1.0, 0.0]).unwrap();
        let next = gain_meg_step(&s, &x).unwrap();
        assert_diag(&next, &[2.0 / 3.0, 1.0 / 3.0], 1e-12);
        let oracle = argmin_two_expert([0.5, 0.5], [1.0, 0.0], -(2f64.ln()));
        assert_diag(&next, &oracle, 1e-8);
    }

    #[test]
    fn meg_matrix_matches_vector_on_uniform_start() {
        let t = 2.0 / 3.0;
        for eta in [0.1, 1.0, 5.0] {
            let w = WeightVector::new(vec![t; 3], 2).unwrap();
            let x = Instance::from_loss_vector(&[1.0, 0.0, 0.0]).unwrap();
            let s = diag_state(Algorithm::LossMeg, &[t; 3], 2, eta);
            let v = vec_loss_meg_step(&w, &[1.0, 0.0, 0.0], eta).unwrap();
            assert_diag(&loss_meg_step(&s, &x).unwrap(), v.as_slice(), 1e-10);
            let s = diag_state(Algorithm::GainMeg, &[t; 3], 2, eta);
            let v = vec_gain_meg_step(&w, &[1.0, 0.0, 0.0], eta).unwrap();
            assert_diag(&gain_meg_step(&s, &x).unwrap(), v.as_slice(), 1e-10);
        }
    }

    #[test]
    fn gd_uniform_shift_example() {
        let s = diag_state(Algorithm::Gd, &[0.75; 4], 3, 0.2);
        let x = Instance::from_loss_vector(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_diag(&gd_step(&s, &x).unwrap(), &[0.6, 0.8, 0.8, 0.8], 1e-12);
        let w = WeightVector::new(vec![0.75; 4], 3).unwrap();
        let v = vec_gd_step(&w, &[1.0, 0.0, 0.0, 0.0], 0.2).unwrap();
        for (a, b) in v.as_slice().iter().zip([0.6, 0.8, 0.8, 0.8]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn gd_zero_and_cap_example() {
        let w0 = [0.43, 0.43, 0.2, 0.97, 0.97];
        let s = diag_state(Algorithm::Gd, &w0, 3, 0.5);
        let x = Instance::from_loss_vector(&[0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_diag(&gd_step(&s, &x).unwrap(), &[0.5, 0.5, 0.0, 1.0, 1.0], 1e-12);
        let w = WeightVector::new(w0.to_vec(), 3).unwrap();
        let v = vec_gd_step(&w, &[0.0, 0.0, 1.0, 0.0, 0.0], 0.5).unwrap();
        for (a, b) in v.as_slice().iter().zip([0.5, 0.5, 0.0, 1.0, 1.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn loss_and_gain_meg_differ() {
        // Same starting mixture viewed as loss weights w and gain weights 1 - w.
        let w = WeightVector::new(vec![0.9, 0.6, 0.3, 0.2], 2).unwrap();
        let loss = [1.0, 0.0, 0.0, 0.0];
        let eta = 1.0;
        let via_loss = vec_loss_meg_step(&w, &loss, eta).unwrap();
        let via_gain = vec_gain_meg_step(&w.complement(), &loss, eta).unwrap().complement();
        let gap = via_loss
            .as_slice()
            .iter()
            .zip(via_gain.as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(gap > 1e-3, "gap {gap}");
        // GD's two versions coincide.
        let gd_loss = vec_gd_step(&w, &loss, 0.3).unwrap();
        let neg: Vec<f64> = w.complement().as_slice().iter().zip(&loss).map(|(u, l)| u + 0.3 * l).collect();
        let gd_gain = euclidean_project(&neg, 2).unwrap().complement();
        for (a, b) in gd_loss.as_slice().iter().zip(gd_gain.as_slice()) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn step_errors() {
        let s = LearnerState::new_matrix(Algorithm::LossMeg, 3, 1, 0.5).unwrap();
        let x = Instance::from_loss_vector(&[1.0, 0.0]).unwrap();
        assert!(s.step(&x).is_err());
        assert!(gd_step(&s, &Instance::from_loss_vector(&[1.0, 0.0, 0.0]).unwrap()).is_err());
        assert!(LearnerState::new_vector(Algorithm::Gd, 3, 3, 0.5).is_err());
        assert!(LearnerState::new_vector(Algorithm::Gd, 3, 1, 0.0).is_err());
        let v = LearnerState::new_vector(Algorithm::Gd, 3, 1, 0.5).unwrap();
        assert!(v.step_vector(&[2.0, 0.0, 0.0]).is_err());
        let rotated = Instance::sparse(DVector::from_vec(vec![0.6, 0.8, 0.0])).unwrap();
        assert!(v.step(&rotated).is_err());
    }

    #[test]
    fn boundary_parameter_is_floored() {
        let s = diag_state(Algorithm::LossMeg, &[1.0, 0.0, 1.0], 2, 0.3);
        let x = Instance::from_loss_vector(&[1.0, 0.0, 0.0]).unwrap();
        let next = loss_meg_step(&s, &x).unwrap();
        let Parameter::Matrix(w) = &next.parameter else { unreachable!() };
        let sum: f64 = w.eigenvalues().as_slice().iter().sum();
        assert_abs_diff_eq!(sum, 2.0, epsilon = 1e-9);
        assert!(w.eigenvalues().as_slice().iter().all(|l| *l >= 0.0 && *l <= 1.0));
    }

    #[test]
    fn gain_learner_reports_complemented_weights() {
        let s = LearnerState::new_vector(Algorithm::GainMeg, 4, 1, 0.5).unwrap();
        let w = s.loss_weights(None);
        assert_eq!(w.m(), 3);
        assert!(w.as_slice().iter().all(|x| (*x - 0.75).abs() < 1e-15));
        let x = Instance::from_loss_vector(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(s.expected_loss(&x).unwrap(), 0.75, epsilon = 1e-15);
    }
}
