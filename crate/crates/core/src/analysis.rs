//! Comparator statistics for vector games and the tournament machinery
//! behind the lower bounds.
//!
//! The minimum loss of `n` experts is bounded by the loss of the winner of
//! a single-elimination bracket (lower block loss advances) and, flipped,
//! the maximum by the loser of a bracket where the higher block loss
//! advances. Monte-Carlo drivers estimate the two-expert winner statistic
//! and check the bracket inequality on stochastic generators.

use rand::Rng as _;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::{seeded_rng, Rng};

/// `n × T` losses in `[0, 1]`, one row per expert.
#[derive(Debug, Clone, PartialEq)]
pub struct LossMatrix {
    n: usize,
    t: usize,
    data: Vec<f64>,
}

impl LossMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let t = rows.first().map_or(0, Vec::len);
        if n == 0 || t == 0 {
            return invalid("loss matrix needs positive dimensions");
        }
        if rows.iter().any(|r| r.len() != t) {
            return invalid("loss matrix rows have different lengths");
        }
        let data: Vec<f64> = rows.into_iter().flatten().collect();
        if data.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return invalid("loss entries must lie in [0, 1]");
        }
        Ok(Self { n, t, data })
    }

    /// Builds the matrix from per-trial loss vectors (columns).
    pub fn from_trials(trials: &[Vec<f64>]) -> Result<Self> {
        let n = trials.first().map_or(0, Vec::len);
        if trials.iter().any(|c| c.len() != n) {
            return invalid("loss vectors have different lengths");
        }
        Self::from_rows((0..n).map(|i| trials.iter().map(|c| c[i]).collect()).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> usize {
        self.t
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.t..(i + 1) * self.t]
    }

    pub fn row_totals(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().sum()).collect()
    }

    fn block_sum(&self, i: usize, from: usize, to: usize) -> f64 {
        self.row(i)[from..to].iter().sum()
    }

    /// The rows `rows`, in that order, as a new matrix.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if rows.iter().any(|&r| r >= self.n) {
            return invalid("row index out of range");
        }
        Self::from_rows(rows.iter().map(|&r| self.row(r).to_vec()).collect())
    }

    /// The first `t` trials.
    pub fn prefix(&self, t: usize) -> Result<Self> {
        if t == 0 || t > self.t {
            return invalid(format!("prefix length {t} outside [1, {}]", self.t));
        }
        Self::from_rows((0..self.n).map(|i| self.row(i)[..t].to_vec()).collect())
    }
}

/// Sum of the `m` smallest values of `totals`.
pub fn sum_smallest(totals: &[f64], m: usize) -> f64 {
    let mut sorted = totals.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.iter().take(m).sum()
}

/// Loss of the best m-set in hindsight: the `m` smallest row totals.
pub fn best_mset_loss(losses: &LossMatrix, m: usize) -> Result<f64> {
    if m < 1 || m > losses.n() {
        return invalid(format!("m = {m} must lie in [1, {}]", losses.n()));
    }
    Ok(sum_smallest(&losses.row_totals(), m))
}

/// Smaller of the two row totals of a two-expert game.
pub fn two_expert_winner_loss(losses: &LossMatrix) -> Result<f64> {
    if losses.n() != 2 {
        return invalid(format!("two-expert winner needs exactly 2 rows, got {}", losses.n()));
    }
    let t = losses.row_totals();
    Ok(t[0].min(t[1]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bracket {
    /// Lower block loss advances.
    Winner,
    /// Higher block loss advances.
    Loser,
}

/// Index (into the matrix) of the bracket survivor.
fn run_bracket(losses: &LossMatrix, rounds: u32, bracket: Bracket) -> Result<usize> {
    let n = losses.n();
    if n != 1usize << rounds {
        return invalid(format!("bracket needs n = 2^S, got n = {n}, S = {rounds}"));
    }
    if rounds == 0 {
        return Ok(0);
    }
    let t = losses.horizon();
    let s = rounds as usize;
    if !t.is_multiple_of(s) {
        return invalid(format!("S = {s} does not divide T = {t}"));
    }
    let block = t / s;
    let mut alive: Vec<usize> = (0..n).collect();
    for round in 0..s {
        let (from, to) = (round * block, (round + 1) * block);
        alive = alive
            .chunks(2)
            .map(|pair| {
                let (a, b) = (pair[0], pair[1]);
                let (la, lb) = (losses.block_sum(a, from, to), losses.block_sum(b, from, to));
                // Ties go to the lower index in both variants.
                let b_advances = match bracket {
                    Bracket::Winner => lb < la,
                    Bracket::Loser => lb > la,
                };
                if b_advances {
                    b
                } else {
                    a
                }
            })
            .collect();
    }
    Ok(alive[0])
}

/// Total loss of the winner of the `S`-round bracket. Round `s` compares
/// adjacent survivors on trial block `s` of length `T/S`.
pub fn tournament_winner_loss(losses: &LossMatrix, rounds: u32) -> Result<f64> {
    if rounds >= usize::BITS {
        return invalid("too many rounds");
    }
    let i = run_bracket(losses, rounds, Bracket::Winner)?;
    Ok(losses.row(i).iter().sum())
}

/// Total loss of the survivor of the flipped bracket (higher block loss
/// advances).
pub fn tournament_loser_loss(losses: &LossMatrix, rounds: u32) -> Result<f64> {
    if rounds >= usize::BITS {
        return invalid("too many rounds");
    }
    let i = run_bracket(losses, rounds, Bracket::Loser)?;
    Ok(losses.row(i).iter().sum())
}

/// Sum over groups of the group's bracket winner loss.
///
/// `groups` must partition the experts into groups of size `2^S`. The
/// result upper-bounds `best_mset_loss(losses, groups.len())`.
pub fn grouped_comparator_bound(losses: &LossMatrix, groups: &[Vec<usize>], rounds: u32) -> Result<f64> {
    if rounds >= usize::BITS {
        return invalid("too many rounds");
    }
    let size = 1usize << rounds;
    let mut seen = vec![false; losses.n()];
    for g in groups {
        if g.len() != size {
            return invalid(format!("group of size {} but 2^S = {size}", g.len()));
        }
        for &i in g {
            if i >= losses.n() || seen[i] {
                return invalid(format!("expert {i} is out of range or in two groups"));
            }
            seen[i] = true;
        }
    }
    if seen.iter().any(|s| !s) {
        return invalid("groups do not cover every expert");
    }
    groups
        .iter()
        .map(|g| tournament_winner_loss(&losses.select_rows(g)?, rounds))
        .sum()
}

/// Mean and standard error of a Monte-Carlo sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub replicates: usize,
}

impl McEstimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let r = samples.len();
        let mean = samples.iter().sum::<f64>() / r as f64;
        let var = if r > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r - 1) as f64
        } else {
            0.0
        };
        Self { mean, std_error: (var / r as f64).sqrt(), replicates: r }
    }
}

const BLOCK: usize = 1024;

/// Runs `replicates` independent draws of `sample` in parallel blocks.
/// Block `b` uses stream `b` of `seed`, so results do not depend on the
/// thread count.
pub fn monte_carlo<F>(replicates: usize, seed: u64, sample: F) -> Vec<f64>
where
    F: Fn(&mut Rng) -> f64 + Sync,
{
    let blocks = replicates.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = seeded_rng(seed, b as u64);
            let count = BLOCK.min(replicates - b * BLOCK);
            (0..count).map(|_| sample(&mut rng)).collect::<Vec<_>>()
        })
        .collect()
}

/// One two-expert sequence: each trial, with probability `2p` one of the
/// two experts (chosen uniformly) gets a unit loss.
pub fn two_expert_sequence(horizon: usize, p: f64, rng: &mut Rng) -> Result<LossMatrix> {
    if !(0.0..=0.5).contains(&p) {
        return invalid("hit probability 2p must lie in [0, 1]");
    }
    let mut rows = vec![vec![0.0; horizon]; 2];
    for t in 0..horizon {
        if rng.random_bool(2.0 * p) {
            rows[rng.random_range(0..2)][t] = 1.0;
        }
    }
    LossMatrix::from_rows(rows)
}

/// Monte-Carlo mean of the two-expert winner loss under the per-trial
/// `2p` hit model. Counts are drawn directly: `N ~ Bin(T, 2p)` hits split
/// as `X ~ Bin(N, 1/2)`, winner loss `min(X, N - X)`.
pub fn two_expert_winner_mc(horizon: u64, p: f64, replicates: usize, seed: u64) -> Result<McEstimate> {
    if !(0.0..=0.5).contains(&p) || replicates == 0 {
        return invalid("need 0 <= p <= 1/2 and at least one replicate");
    }
    let hits = Binomial::new(horizon, 2.0 * p).map_err(|e| crate::Error::InvalidArgument(e.to_string()))?;
    let samples = monte_carlo(replicates, seed, |rng| {
        let total = hits.sample(rng);
        let first = Binomial::new(total, 0.5).map(|b| b.sample(rng)).unwrap_or(0);
        first.min(total - first) as f64
    });
    Ok(McEstimate::from_samples(&samples))
}

/// The constant `c` with `E[winner] = Tp - c sqrt(Tp)`.
pub fn lemma_constant(horizon: f64, p: f64, mean_winner: f64) -> f64 {
    let tp = horizon * p;
    (tp - mean_winner) / tp.sqrt()
}

/// Per-trial loss generators that are i.i.d. across trials and
/// exchangeable across experts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossGenerator {
    /// One uniformly random expert gets a unit loss.
    SingleRandomExpert,
    /// Every expert independently gets a unit loss with probability `p`.
    Bernoulli(f64),
}

impl LossGenerator {
    pub fn sample(self, n: usize, horizon: usize, rng: &mut Rng) -> Result<LossMatrix> {
        let mut rows = vec![vec![0.0; horizon]; n];
        match self {
            LossGenerator::SingleRandomExpert => {
                for t in 0..horizon {
                    rows[rng.random_range(0..n)][t] = 1.0;
                }
            }
            LossGenerator::Bernoulli(p) => {
                if !(0.0..=1.0).contains(&p) {
                    return invalid("Bernoulli probability outside [0, 1]");
                }
                for row in &mut rows {
                    for x in row.iter_mut() {
                        if rng.random_bool(p) {
                            *x = 1.0;
                        }
                    }
                }
            }
        }
        LossMatrix::from_rows(rows)
    }
}

/// Outcome of the bracket-inequality experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketCheck {
    /// Minimum of the `n` row totals over `T` trials.
    pub min_loss: McEstimate,
    /// Bracket winner over `T` trials.
    pub tournament: McEstimate,
    /// Winner of experts 0 and 1 over `T/S` trials.
    pub two_expert: McEstimate,
    pub rounds: u32,
}

impl BracketCheck {
    /// `S · E[two-expert winner over T/S trials]`.
    pub fn bound(&self) -> f64 {
        self.rounds as f64 * self.two_expert.mean
    }

    pub fn bound_std_error(&self) -> f64 {
        self.rounds as f64 * self.two_expert.std_error
    }

    /// `mean(min) <= S · mean(two-expert) + z · SE` with the standard
    /// errors of both estimates combined.
    pub fn holds_within(&self, z: f64) -> bool {
        let se = (self.min_loss.std_error.powi(2) + self.bound_std_error().powi(2)).sqrt();
        self.min_loss.mean <= self.bound() + z * se
    }
}

/// Estimates the three quantities of the bracket inequality for `n = 2^S`
/// experts and horizon `T` (a multiple of `S`). The two-expert estimate
/// uses independent replicates.
pub fn bracket_experiment(
    generator: LossGenerator,
    rounds: u32,
    horizon: usize,
    replicates: usize,
    seed: u64,
) -> Result<BracketCheck> {
    if rounds == 0 || rounds >= 20 {
        return invalid("bracket experiment needs 1 <= S < 20");
    }
    if !horizon.is_multiple_of(rounds as usize) || replicates < 2 {
        return invalid("S must divide T and at least two replicates are needed");
    }
    let n = 1usize << rounds;
    let pairs: Vec<(f64, f64)> = {
        let blocks = replicates.div_ceil(BLOCK);
        (0..blocks)
            .into_par_iter()
            .flat_map_iter(|b| {
                let mut rng = seeded_rng(seed, b as u64);
                let count = BLOCK.min(replicates - b * BLOCK);
                (0..count)
                    .map(|_| {
                        let l = generator.sample(n, horizon, &mut rng).expect("valid generator");
                        let min = l.row_totals().into_iter().fold(f64::INFINITY, f64::min);
                        let tour = tournament_winner_loss(&l, rounds).expect("n = 2^S");
                        (min, tour)
                    })
                    .collect::<Vec<_>>()
            })
            .collect()
    };
    let block_len = horizon / rounds as usize;
    let two = monte_carlo(replicates, seed ^ 0x9e37_79b9_7f4a_7c15, |rng| {
        let l = generator.sample(n, block_len, rng).expect("valid generator");
        let t = l.row_totals();
        t[0].min(t[1])
    });
    let mins: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let tours: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    Ok(BracketCheck {
        min_loss: McEstimate::from_samples(&mins),
        tournament: McEstimate::from_samples(&tours),
        two_expert: McEstimate::from_samples(&two),
        rounds,
    })
}
