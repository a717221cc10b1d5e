//! Loss-sequence generators for the m-set game.
//!
//! Three stochastic constructions (a random expert among the first `2k`, a
//! random expert among all `n`, independent fair coins on every expert)
//! and one adaptive construction that watches the learner's weights and is
//! designed to defeat projected gradient descent with a loss budget.
//!
//! Every generator emits loss vectors on the standard basis: basis vectors
//! for the sparse constructions, 0/1 vectors for the dense one.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;

use crate::capped_simplex::WeightVector;
use crate::error::{invalid, Error, Result};
use crate::Rng;

/// Weight comparisons against the phase thresholds allow this slack.
const THRESHOLD_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AdversaryKind {
    /// A uniformly random expert among the first `2k` gets a unit loss.
    SparseFirst2k,
    /// A uniformly random expert among all `n` gets a unit loss.
    SparseUniform,
    /// Every expert independently gets a unit loss with probability 1/2.
    DenseBernoulli,
    /// Adaptive two-phase sequence against GD, parameterized by a budget.
    GdKiller,
    /// All-zero losses.
    Zero,
}

impl FromStr for AdversaryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first2k" | "sparse-first2k" => Ok(AdversaryKind::SparseFirst2k),
            "uniform" | "sparse-uniform" => Ok(AdversaryKind::SparseUniform),
            "dense-bernoulli" | "bernoulli" => Ok(AdversaryKind::DenseBernoulli),
            "gd-killer" => Ok(AdversaryKind::GdKiller),
            "zero" => Ok(AdversaryKind::Zero),
            other => invalid(format!("unknown adversary '{other}'")),
        }
    }
}

impl fmt::Display for AdversaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AdversaryKind::SparseFirst2k => "first2k",
            AdversaryKind::SparseUniform => "uniform",
            AdversaryKind::DenseBernoulli => "dense-bernoulli",
            AdversaryKind::GdKiller => "gd-killer",
            AdversaryKind::Zero => "zero",
        })
    }
}

impl AdversaryKind {
    /// Whether the kind reads the learner's weights.
    pub fn is_adaptive(self) -> bool {
        matches!(self, AdversaryKind::GdKiller)
    }

    /// Whether emitted losses are standard basis vectors.
    pub fn is_sparse(self) -> bool {
        !matches!(self, AdversaryKind::DenseBernoulli)
    }
}

/// Progress of the adaptive GD adversary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KillerPhase {
    /// Bad experts are hit until everyone else is nearly saturated.
    Drain { emitted: usize },
    /// `round` of `rounds` is in progress; `opened` is whether the faulty
    /// expert has already been hit this round.
    Rounds { round: usize, opened: bool, emitted_this_round: usize },
    Finished,
}

/// One emission of an adversary.
#[derive(Debug, Clone, PartialEq)]
pub enum Emission {
    Loss(Vec<f64>),
    EndOfSequence,
}

/// A loss-sequence generator for one game.
#[derive(Debug, Clone)]
pub struct AdversaryState {
    kind: AdversaryKind,
    n: usize,
    k: usize,
    rng: Rng,
    killer: Option<Killer>,
    /// Total loss handed to the comparator's designated experts so far
    /// (faulty-expert hits for the adaptive adversary).
    pub budget_spent: f64,
}

#[derive(Debug, Clone)]
struct Killer {
    rounds: usize,
    threshold: f64,
    cap: usize,
    next_bad: usize,
    phase: KillerPhase,
    checked_start: bool,
}

impl AdversaryState {
    /// A stochastic (or zero) adversary for `n` experts and subspace rank `k`.
    pub fn stochastic(kind: AdversaryKind, n: usize, k: usize, rng: Rng) -> Result<Self> {
        if n == 0 {
            return invalid("adversary needs at least one expert");
        }
        match kind {
            AdversaryKind::GdKiller => return invalid("use AdversaryState::gd_killer for the adaptive adversary"),
            AdversaryKind::SparseFirst2k if 2 * k > n || k == 0 => {
                return invalid(format!("first-2k adversary needs 1 <= k and 2k <= n (n = {n}, k = {k})"))
            }
            _ => {}
        }
        Ok(Self { kind, n, k, rng, killer: None, budget_spent: 0.0 })
    }

    /// The adaptive adversary against a learner with learning rate `eta`,
    /// running `rounds` faulty-expert rounds (the budget `B`).
    ///
    /// Experts `0..k` are bad, `k` is faulty, `k+1..n` are good.
    pub fn gd_killer(n: usize, k: usize, eta: f64, rounds: usize, rng: Rng) -> Result<Self> {
        if k < 1 || 2 * k > n {
            return invalid(format!("gd-killer needs 1 <= k <= n/2 (n = {n}, k = {k})"));
        }
        if !(eta > 0.0) || !eta.is_finite() {
            return invalid(format!("gd-killer needs a positive learning rate, got {eta}"));
        }
        let m = n - k;
        let eta_capped = eta.min(1.0);
        let cap = (10.0 * k as f64 * m as f64 / eta_capped).ceil() as usize;
        Ok(Self {
            kind: AdversaryKind::GdKiller,
            n,
            k,
            rng,
            killer: Some(Killer {
                rounds,
                threshold: 1.0 - eta_capped / (4.0 * m as f64),
                cap: cap.max(16),
                next_bad: 0,
                phase: KillerPhase::Drain { emitted: 0 },
                checked_start: false,
            }),
            budget_spent: 0.0,
        })
    }

    pub fn kind(&self) -> AdversaryKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn killer_phase(&self) -> Option<KillerPhase> {
        self.killer.as_ref().map(|k| k.phase)
    }

    /// Recovery threshold `1 - min(η, 1)/(4m)` of the adaptive adversary.
    pub fn killer_threshold(&self) -> Option<f64> {
        self.killer.as_ref().map(|k| k.threshold)
    }

    fn basis(&self, i: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.n];
        e[i] = 1.0;
        e
    }

    /// `e_i` with `i` uniform on the first `2k` experts.
    pub fn sparse_first2k_next(&mut self) -> Vec<f64> {
        let i = self.rng.random_range(0..2 * self.k);
        self.basis(i)
    }

    /// `e_i` with `i` uniform on all experts.
    pub fn sparse_uniform_next(&mut self) -> Vec<f64> {
        let i = self.rng.random_range(0..self.n);
        self.basis(i)
    }

    /// Independent fair 0/1 losses.
    pub fn dense_bernoulli_next(&mut self) -> Vec<f64> {
        (0..self.n)
            .map(|_| if self.rng.random_bool(0.5) { 1.0 } else { 0.0 })
            .collect()
    }

    /// Next emission of the adaptive adversary given the learner's current
    /// weights (those it will be charged with on this trial).
    pub fn gd_killer_next(&mut self, weights: &WeightVector) -> Result<Emission> {
        let (n, k) = (self.n, self.k);
        if weights.len() != n {
            return invalid(format!("learner weights have {} entries, adversary has {n} experts", weights.len()));
        }
        let killer = self
            .killer
            .as_mut()
            .ok_or_else(|| Error::InvalidArgument("not a gd-killer adversary".into()))?;
        let w = weights.as_slice();
        if !killer.checked_start {
            killer.checked_start = true;
            let uniform = (n - k) as f64 / n as f64;
            if w.iter().any(|x| (x - uniform).abs() > 1e-9) {
                log::warn!("gd-killer expects a uniform start at m/n = {uniform}; proceeding anyway");
            }
        }
        let threshold = killer.threshold;
        let saturated = |idx: std::ops::Range<usize>| idx.into_iter().all(|i| w[i] >= threshold - THRESHOLD_SLACK);

        loop {
            match killer.phase {
                KillerPhase::Finished => return Err(Error::SequenceExhausted),
                KillerPhase::Drain { emitted } => {
                    if saturated(k..n) {
                        killer.phase = if killer.rounds == 0 {
                            KillerPhase::Finished
                        } else {
                            KillerPhase::Rounds { round: 0, opened: false, emitted_this_round: 0 }
                        };
                        if killer.rounds == 0 {
                            return Ok(Emission::EndOfSequence);
                        }
                        continue;
                    }
                    if emitted >= killer.cap {
                        return Err(Error::PhaseCapExceeded { phase: "drain phase", cap: killer.cap });
                    }
                    killer.phase = KillerPhase::Drain { emitted: emitted + 1 };
                    break;
                }
                KillerPhase::Rounds { round, opened, emitted_this_round } => {
                    if !opened {
                        killer.phase = KillerPhase::Rounds { round, opened: true, emitted_this_round: 1 };
                        self.budget_spent += 1.0;
                        let mut e = vec![0.0; n];
                        e[k] = 1.0;
                        return Ok(Emission::Loss(e));
                    }
                    if w[k] >= threshold - THRESHOLD_SLACK {
                        if round + 1 == killer.rounds {
                            killer.phase = KillerPhase::Finished;
                            return Ok(Emission::EndOfSequence);
                        }
                        killer.phase = KillerPhase::Rounds { round: round + 1, opened: false, emitted_this_round: 0 };
                        continue;
                    }
                    if emitted_this_round >= killer.cap {
                        return Err(Error::PhaseCapExceeded { phase: "recovery round", cap: killer.cap });
                    }
                    killer.phase = KillerPhase::Rounds { round, opened, emitted_this_round: emitted_this_round + 1 };
                    break;
                }
            }
        }
        // Unit loss to the next bad expert, round-robin.
        let bad = killer.next_bad;
        killer.next_bad = (bad + 1) % k;
        let mut e = vec![0.0; n];
        e[bad] = 1.0;
        Ok(Emission::Loss(e))
    }

    /// Next emission for any kind. Stochastic kinds never end on their own;
    /// the game horizon stops them.
    pub fn next(&mut self, weights: &WeightVector) -> Result<Emission> {
        Ok(match self.kind {
            AdversaryKind::SparseFirst2k => Emission::Loss(self.sparse_first2k_next()),
            AdversaryKind::SparseUniform => Emission::Loss(self.sparse_uniform_next()),
            AdversaryKind::DenseBernoulli => Emission::Loss(self.dense_bernoulli_next()),
            AdversaryKind::Zero => Emission::Loss(vec![0.0; self.n]),
            AdversaryKind::GdKiller => return self.gd_killer_next(weights),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::vec_gd_step;
    use crate::seeded_rng;

    fn argmax(v: &[f64]) -> usize {
        v.iter().position(|x| *x == 1.0).unwrap()
    }

    fn frequencies(mut draw: impl FnMut() -> Vec<f64>, n: usize, draws: usize) -> Vec<f64> {
        let mut counts = vec![0.0; n];
        for _ in 0..draws {
            for (c, l) in counts.iter_mut().zip(draw()) {
                *c += l;
            }
        }
        counts.iter().map(|c| c / draws as f64).collect()
    }

    #[test]
    fn first2k_support() {
        let mut a = AdversaryState::stochastic(AdversaryKind::SparseFirst2k, 6, 2, seeded_rng(1, 0)).unwrap();
        let mut seen = [false; 6];
        for _ in 0..10_000 {
            let l = a.sparse_first2k_next();
            assert_eq!(l.iter().sum::<f64>(), 1.0);
            seen[argmax(&l)] = true;
        }
        assert_eq!(seen, [true, true, true, true, false, false]);
    }

    #[test]
    fn first2k_frequencies() {
        let draws = 100_000;
        let mut a = AdversaryState::stochastic(AdversaryKind::SparseFirst2k, 6, 2, seeded_rng(2, 0)).unwrap();
        let f = frequencies(|| a.sparse_first2k_next(), 6, draws);
        let sigma = (0.25 * 0.75 / draws as f64).sqrt();
        for p in &f[..4] {
            assert!((p - 0.25).abs() < 3.0 * sigma, "{f:?}");
        }
        assert_eq!(&f[4..], &[0.0, 0.0]);

        let mut a = AdversaryState::stochastic(AdversaryKind::SparseFirst2k, 2, 1, seeded_rng(3, 0)).unwrap();
        let f = frequencies(|| a.sparse_first2k_next(), 2, draws);
        assert!((f[0] - 0.5).abs() < 3.0 * (0.25 / draws as f64).sqrt());
    }

    #[test]
    fn first2k_rejects_large_k() {
        assert!(AdversaryState::stochastic(AdversaryKind::SparseFirst2k, 5, 3, seeded_rng(0, 0)).is_err());
    }

    #[test]
    fn uniform_frequencies() {
        let draws = 100_000;
        let mut a = AdversaryState::stochastic(AdversaryKind::SparseUniform, 5, 2, seeded_rng(4, 0)).unwrap();
        let f = frequencies(|| a.sparse_uniform_next(), 5, draws);
        let sigma = (0.2 * 0.8 / draws as f64).sqrt();
        assert!(f.iter().all(|p| (p - 0.2).abs() < 3.0 * sigma), "{f:?}");
        let mut one = AdversaryState::stochastic(AdversaryKind::SparseUniform, 1, 0, seeded_rng(4, 0)).unwrap();
        assert_eq!(one.sparse_uniform_next(), vec![1.0]);
    }

    #[test]
    fn bernoulli_moments() {
        let draws = 100_000;
        let n = 3;
        let mut a = AdversaryState::stochastic(AdversaryKind::DenseBernoulli, n, 1, seeded_rng(5, 0)).unwrap();
        let mut sum = vec![0.0; n];
        let mut cross = 0.0;
        for _ in 0..draws {
            let l = a.dense_bernoulli_next();
            assert!(l.iter().all(|x| *x == 0.0 || *x == 1.0));
            for i in 0..n {
                sum[i] += l[i];
            }
            cross += l[0] * l[1];
        }
        let d = draws as f64;
        let sigma = (0.25 / d).sqrt();
        for s in &sum {
            assert!((s / d - 0.5).abs() < 3.0 * sigma);
        }
        let cov = cross / d - (sum[0] / d) * (sum[1] / d);
        // Var of the product estimator is 3/16 ≈ var(l0 l1).
        assert!(cov.abs() < 3.0 * (3.0 / 16.0 / d).sqrt());

        let mut coin = AdversaryState::stochastic(AdversaryKind::DenseBernoulli, 1, 0, seeded_rng(6, 0)).unwrap();
        let heads: f64 = (0..draws).map(|_| coin.dense_bernoulli_next()[0]).sum();
        assert!((heads / d - 0.5).abs() < 3.0 * sigma);
    }

    fn play_gd(n: usize, k: usize, eta: f64, rounds: usize) -> (Vec<Vec<f64>>, AdversaryState) {
        let m = n - k;
        let mut adv = AdversaryState::gd_killer(n, k, eta, rounds, seeded_rng(0, 0)).unwrap();
        let mut w = WeightVector::uniform(n, m).unwrap();
        let mut losses = Vec::new();
        loop {
            match adv.gd_killer_next(&w).unwrap() {
                Emission::EndOfSequence => break,
                Emission::Loss(l) => {
                    w = vec_gd_step(&w, &l, eta).unwrap();
                    losses.push(l);
                }
            }
        }
        (losses, adv)
    }

    #[test]
    fn killer_structure_against_gd() {
        for (n, k, eta, rounds) in [(4, 2, 0.1, 20), (8, 4, 0.05, 10), (6, 2, 1.5, 8)] {
            let (losses, mut adv) = play_gd(n, k, eta, rounds);
            assert!(argmax(&losses[0]) < k, "first emission hits a bad expert");
            let faulty_hits: Vec<usize> = (0..losses.len()).filter(|&t| losses[t][k] == 1.0).collect();
            assert_eq!(faulty_hits.len(), rounds);
            assert_eq!(adv.budget_spent, rounds as f64);
            // Between faulty hits only bad experts are hit.
            for l in &losses {
                assert_eq!(l.iter().sum::<f64>(), 1.0);
                assert!(argmax(l) <= k);
            }
            // Comparator set {faulty} ∪ good suffers exactly the budget.
            let comp: f64 = losses.iter().map(|l| l[k..].iter().sum::<f64>()).sum();
            assert_eq!(comp, rounds as f64);
            assert!(matches!(
                adv.gd_killer_next(&WeightVector::uniform(n, n - k).unwrap()),
                Err(Error::SequenceExhausted)
            ));
        }
    }

    #[test]
    fn killer_drain_within_cap() {
        for (k, eta) in [(2usize, 0.01), (4, 0.1), (8, 0.5), (8, 2.0)] {
            let n = 2 * k;
            let (losses, _) = play_gd(n, k, eta, 1);
            let first_faulty = losses.iter().position(|l| l[k] == 1.0).unwrap();
            let cap = 10.0 * (k * (n - k)) as f64 / eta.min(1.0);
            assert!((first_faulty as f64) <= cap);
        }
    }

    #[test]
    fn killer_rejects_bad_config() {
        assert!(AdversaryState::gd_killer(4, 3, 0.1, 5, seeded_rng(0, 0)).is_err());
        assert!(AdversaryState::gd_killer(4, 2, 0.0, 5, seeded_rng(0, 0)).is_err());
        let mut adv = AdversaryState::gd_killer(4, 2, 0.1, 5, seeded_rng(0, 0)).unwrap();
        assert!(adv.gd_killer_next(&WeightVector::uniform(3, 2).unwrap()).is_err());
    }
}
