use nalgebra::DMatrix;
use rayon::prelude::*;

use super::config::{GameConfig, LossMode, Representation};
use crate::adversaries::{AdversaryKind, AdversaryState, Emission};
use crate::algorithms::{regret_bound_value, Algorithm, LearnerState, Parameter};
use crate::analysis::sum_smallest;
use crate::capped_simplex::sample_mset;
use crate::error::{invalid, Error, Result};
use crate::matrix::{comparator_loss, random_orthogonal, sample_projection, CovarianceAccumulator, Instance};
use crate::{seeded_rng, Rng};

const ADVERSARY_STREAM: u64 = 0;
const SAMPLER_STREAM: u64 = 1;
const ROTATION_STREAM: u64 = 2;

/// Cumulative losses after one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub trial: usize,
    pub alg_loss_cum: f64,
    pub comp_loss_cum: f64,
}

impl TraceRow {
    pub fn regret(&self) -> f64 {
        self.alg_loss_cum - self.comp_loss_cum
    }
}

/// One played game.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub seed: u64,
    pub eta: f64,
    pub rows: Vec<TraceRow>,
    pub alg_loss: f64,
    /// Comparator loss over the whole sequence, from the accumulated
    /// instance sum.
    pub comp_loss: f64,
    pub regret: f64,
    /// Closed-form bound for the game, NaN when none applies.
    pub bound: f64,
    /// Total faulty-expert loss handed out by an adaptive adversary.
    pub budget_spent: f64,
}

impl RegretTrace {
    pub fn trials(&self) -> usize {
        self.rows.len()
    }
}

/// Plays one game with the configuration's single learning rate.
pub fn run_game(config: &GameConfig, seed: u64) -> Result<RegretTrace> {
    config.validate()?;
    let etas = config.etas()?;
    if etas.len() != 1 {
        return invalid("run_game needs a single learning rate; use sweep_eta for a list");
    }
    run_game_with_eta(config, etas[0], seed)
}

fn bound_for(config: &GameConfig) -> Result<f64> {
    match regret_bound_value(&config.bound_spec()?) {
        Ok(b) => Ok(b),
        Err(Error::UnsupportedSpec(_)) => Ok(f64::NAN),
        Err(e) => Err(e),
    }
}

/// Plays one game at learning rate `eta`, deterministic in
/// `(config, eta, seed)`.
///
/// Each trial the adversary sees the learner's per-expert loss weights,
/// emits a loss vector, the learner pays its expected (or sampled) loss
/// and updates. The comparator is the best m-set of the running loss
/// totals; in matrix mode it is the sum of the `m` smallest eigenvalues of
/// the running instance sum.
pub fn run_game_with_eta(config: &GameConfig, eta: f64, seed: u64) -> Result<RegretTrace> {
    config.validate()?;
    let (n, k, m) = (config.n, config.k, config.m());
    let adversary_rng = seeded_rng(seed, ADVERSARY_STREAM);
    let mut adversary = match config.adversary {
        AdversaryKind::GdKiller => AdversaryState::gd_killer(n, k, eta, config.killer_rounds(), adversary_rng)?,
        kind => AdversaryState::stochastic(kind, n, k, adversary_rng)?,
    };
    let horizon = config.horizon()?;
    let mut sampler = seeded_rng(seed, SAMPLER_STREAM);
    let rotation = match config.representation {
        Representation::Vector => None,
        Representation::Matrix => Some(random_orthogonal(n, &mut seeded_rng(seed, ROTATION_STREAM))),
    };
    let mut learner = match config.representation {
        Representation::Vector => LearnerState::new_vector(config.algorithm, n, k, eta)?,
        Representation::Matrix => LearnerState::new_matrix(config.algorithm, n, k, eta)?,
    };
    let mut accumulator = rotation.as_ref().map(|_| CovarianceAccumulator::new(n));
    let mut totals = vec![0.0; n];
    let mut rows = Vec::with_capacity(horizon.unwrap_or(0));
    let (mut alg, mut comp) = (0.0, 0.0);

    for trial in 1.. {
        if horizon.is_some_and(|t| trial > t) {
            break;
        }
        let weights = learner.loss_weights(rotation.as_ref());
        let loss = match adversary.next(&weights)? {
            Emission::Loss(l) => l,
            Emission::EndOfSequence => break,
        };
        let instance = Instance::rotated_loss(rotation.as_ref(), &loss)?;
        let paid = match config.loss_mode {
            LossMode::Expected => learner.expected_loss(&instance)?,
            LossMode::Sampled => sampled_loss(&learner, &instance, &loss, &mut sampler)?,
        };
        alg += paid;
        for (t, l) in totals.iter_mut().zip(&loss) {
            *t += l;
        }
        comp = match accumulator.as_mut() {
            Some(acc) => {
                acc.add(&instance)?;
                comparator_loss(acc, k)?
            }
            None => sum_smallest(&totals, m),
        };
        rows.push(TraceRow { trial, alg_loss_cum: alg, comp_loss_cum: comp });
        learner = learner.step(&instance)?;
    }

    Ok(RegretTrace {
        seed,
        eta,
        rows,
        alg_loss: alg,
        comp_loss: comp,
        regret: alg - comp,
        bound: bound_for(config)?,
        budget_spent: adversary.budget_spent,
    })
}

/// Loss of one subspace (or m-set) drawn from the learner's mixture.
fn sampled_loss(learner: &LearnerState, instance: &Instance, loss: &[f64], rng: &mut Rng) -> Result<f64> {
    match &learner.parameter {
        Parameter::Vector(_) => {
            let set = sample_mset(&learner.loss_weights(None), rng)?;
            Ok(set.iter().map(|&i| loss[i]).sum())
        }
        Parameter::Matrix(w) => {
            let p = sample_projection(w, rng)?;
            let captured = (&p * instance.to_matrix()).trace();
            Ok(match learner.algorithm {
                Algorithm::GainMeg => (instance.trace() - captured).max(0.0),
                _ => captured,
            })
        }
    }
}

/// Monte-Carlo summary over a seed list.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretEstimate {
    pub eta: f64,
    pub mean: f64,
    pub std_error: f64,
    /// `(seed, final regret)` in seed-list order.
    pub per_seed: Vec<(u64, f64)>,
    pub bound: f64,
}

fn summarize(eta: f64, per_seed: Vec<(u64, f64)>, bound: f64) -> RegretEstimate {
    let r = per_seed.len() as f64;
    let mean = per_seed.iter().map(|p| p.1).sum::<f64>() / r;
    let var = per_seed.iter().map(|p| (p.1 - mean).powi(2)).sum::<f64>() / (r - 1.0);
    RegretEstimate { eta, mean, std_error: (var / r).sqrt(), per_seed, bound }
}

/// Plays every seed in parallel and returns the traces in seed order.
pub fn run_seeds(config: &GameConfig, eta: f64) -> Result<Vec<RegretTrace>> {
    config.validate()?;
    config.seeds.par_iter().map(|&s| run_game_with_eta(config, eta, s)).collect()
}

/// Mean final regret and its standard error over the configured seeds.
pub fn estimate_regret(config: &GameConfig) -> Result<RegretEstimate> {
    if config.seeds.len() < 2 {
        return invalid("estimating regret needs at least two seeds");
    }
    let etas = config.etas()?;
    if etas.len() != 1 {
        return invalid("estimate_regret needs a single learning rate; use sweep_eta for a list");
    }
    estimate_at(config, etas[0])
}

fn estimate_at(config: &GameConfig, eta: f64) -> Result<RegretEstimate> {
    let traces = run_seeds(config, eta)?;
    let bound = traces.first().map_or(f64::NAN, |t| t.bound);
    Ok(summarize(eta, traces.iter().map(|t| (t.seed, t.regret)).collect(), bound))
}

/// One estimate per learning rate of the configuration (a sweep list, or
/// the single explicit or tuned rate).
pub fn sweep_eta(config: &GameConfig) -> Result<Vec<RegretEstimate>> {
    if config.seeds.len() < 2 {
        return invalid("estimating regret needs at least two seeds");
    }
    config.etas()?.into_iter().map(|eta| estimate_at(config, eta)).collect()
}

/// `count` log-spaced learning rates from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|j| (a + (b - a) * j as f64 / (count - 1) as f64).exp()).collect()
}

/// Per-seed `T/2 - L_C` on the first-2k adversary, where `L_C` is the best
/// m-set loss after `horizon` trials. Experts past `2k` never suffer
/// loss, so the comparator splits the `T` unit losses among the first
/// `2k` and keeps the `k` smallest.
pub fn comparator_deficit(n: usize, k: usize, horizon: usize, seeds: &[u64]) -> Result<Vec<f64>> {
    if k < 1 || 2 * k > n || horizon == 0 {
        return invalid("comparator deficit needs 1 <= k <= n/2 and a positive horizon");
    }
    let m = n - k;
    seeds
        .par_iter()
        .map(|&s| {
            let mut adversary = AdversaryState::stochastic(
                AdversaryKind::SparseFirst2k,
                n,
                k,
                seeded_rng(s, ADVERSARY_STREAM),
            )?;
            let mut totals = vec![0.0; n];
            for _ in 0..horizon {
                for (t, l) in totals.iter_mut().zip(adversary.sparse_first2k_next()) {
                    *t += l;
                }
            }
            Ok(horizon as f64 / 2.0 - sum_smallest(&totals, m))
        })
        .collect()
}

/// Rotation used by matrix-mode games for `seed`.
pub fn game_rotation(n: usize, seed: u64) -> DMatrix<f64> {
    random_orthogonal(n, &mut seeded_rng(seed, ROTATION_STREAM))
}
