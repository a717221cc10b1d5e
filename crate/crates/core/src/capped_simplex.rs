//! The capped simplex `S_m = { w ∈ [0,1]^n : Σ w_i = m }`.
//!
//! Points of `S_m` are mixtures of m-sets. This module projects arbitrary
//! vectors onto `S_m` (Euclidean and relative-entropy projections), writes a
//! point as an explicit mixture of m-set corners, and samples m-sets whose
//! inclusion probabilities are the weights.

use std::cmp::Ordering;

use rand::Rng as _;

use crate::error::{invalid, Result};
use crate::Rng;

/// Slack allowed on the `[0, 1]` box when validating weights.
pub const BOX_TOLERANCE: f64 = 1e-10;
/// Slack allowed on the total weight when validating weights.
pub const SUM_TOLERANCE: f64 = 1e-9;
/// Coordinates this close to 0 or 1 are snapped before decomposition.
const SNAP: f64 = 1e-12;
/// Smallest value accepted by the entropic projection.
const ENTROPIC_FLOOR: f64 = 1e-300;

/// A point of the capped simplex: `n` weights in `[0, 1]` summing to `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
    m: usize,
}

impl WeightVector {
    /// Validates `weights` against `S_m`. Excursions within the tolerances
    /// are clamped back into the box.
    pub fn new(weights: Vec<f64>, m: usize) -> Result<Self> {
        let n = weights.len();
        if m < 1 || m > n {
            return invalid(format!("m = {m} must lie in [1, {n}]"));
        }
        if let Some(bad) = weights
            .iter()
            .find(|w| !w.is_finite() || **w < -BOX_TOLERANCE || **w > 1.0 + BOX_TOLERANCE)
        {
            return invalid(format!("weight {bad} outside [0, 1]"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - m as f64).abs() > SUM_TOLERANCE {
            return invalid(format!("weights sum to {sum}, expected {m}"));
        }
        Ok(Self::from_raw(weights, m))
    }

    /// `m/n` on every coordinate.
    pub fn uniform(n: usize, m: usize) -> Result<Self> {
        if n == 0 {
            return invalid("dimension must be positive");
        }
        Self::new(vec![m as f64 / n as f64; n], m)
    }

    /// Constructor for outputs that satisfy the invariants by construction.
    pub(crate) fn from_raw(mut weights: Vec<f64>, m: usize) -> Self {
        for w in &mut weights {
            *w = w.clamp(0.0, 1.0);
        }
        Self { weights, m }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Target total weight.
    pub fn m(&self) -> usize {
        self.m
    }

    /// `1 - w`, a point of `S_{n-m}`.
    pub fn complement(&self) -> WeightVector {
        Self::from_raw(
            self.weights.iter().map(|w| 1.0 - w).collect(),
            self.len() - self.m,
        )
    }

    /// Expected loss `Σ w_i ℓ_i` of the mixture against `loss`.
    pub fn dot(&self, loss: &[f64]) -> f64 {
        self.weights.iter().zip(loss).map(|(w, l)| w * l).sum()
    }
}

/// One corner of a mixture: an m-set and its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Corner {
    /// Sorted member indices.
    pub set: Vec<usize>,
    pub probability: f64,
}

/// A weight vector written as a convex combination of m-set indicators.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerDecomposition {
    pub entries: Vec<Corner>,
}

impl CornerDecomposition {
    /// `Σ p_s 1_{S_s}` over `n` coordinates.
    pub fn reconstruct(&self, n: usize) -> Vec<f64> {
        let mut w = vec![0.0; n];
        for corner in &self.entries {
            for &i in &corner.set {
                w[i] += corner.probability;
            }
        }
        w
    }

    pub fn total_probability(&self) -> f64 {
        self.entries.iter().map(|c| c.probability).sum()
    }
}

fn check_m(n: usize, m: usize) -> Result<()> {
    if n == 0 {
        return invalid("empty input vector");
    }
    if m < 1 || m > n {
        return invalid(format!("m = {m} must lie in [1, {n}]"));
    }
    Ok(())
}

/// Euclidean projection of `v` onto `S_m`.
///
/// The minimizer has the form `w_i = clip(v_i + τ, 0, 1)`. The total
/// `f(τ) = Σ clip(v_i + τ, 0, 1)` is piecewise linear with breakpoints at
/// `-v_i` (coordinate leaves 0) and `1 - v_i` (coordinate reaches 1); the
/// breakpoints are swept in order and `τ` is solved exactly on the linear
/// piece where `f` crosses `m`.
pub fn euclidean_project(v: &[f64], m: usize) -> Result<WeightVector> {
    check_m(v.len(), m)?;
    if v.iter().any(|x| !x.is_finite()) {
        return invalid("non-finite input to euclidean_project");
    }
    let n = v.len();
    let target = m as f64;

    // (breakpoint, coordinate, enters_free)
    let mut events: Vec<(f64, usize, bool)> = Vec::with_capacity(2 * n);
    for (i, &x) in v.iter().enumerate() {
        events.push((-x, i, true));
        events.push((1.0 - x, i, false));
    }
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));

    let mut n_free = 0usize;
    let mut n_upper = 0usize;
    let mut free_sum = 0.0;
    let mut tau = None;
    let mut idx = 0;
    while idx < events.len() {
        let at = events[idx].0;
        // State on the open piece just left of `at`.
        let (prev_free, prev_upper, prev_sum) = (n_free, n_upper, free_sum);
        while idx < events.len() && events[idx].0 == at {
            let (_, i, enters) = events[idx];
            if enters {
                n_free += 1;
                free_sum += v[i];
            } else {
                n_free -= 1;
                n_upper += 1;
                free_sum -= v[i];
            }
            idx += 1;
        }
        let f_at = n_upper as f64 + free_sum + n_free as f64 * at;
        if f_at >= target {
            tau = Some(if prev_free == 0 {
                at
            } else {
                (target - prev_upper as f64 - prev_sum) / prev_free as f64
            });
            break;
        }
    }
    // f reaches n >= m at the last breakpoint.
    let tau = tau.unwrap_or_else(|| events.last().map(|e| e.0).unwrap_or(0.0));
    Ok(WeightVector::from_raw(
        v.iter().map(|x| (x + tau).clamp(0.0, 1.0)).collect(),
        m,
    ))
}

/// Relative-entropy projection of a positive vector onto `S_m`.
///
/// Minimizes `Σ w_i ln(w_i / v_i) - w_i + v_i` over `S_m`. The minimizer
/// caps a set of the largest coordinates at 1 and scales the rest by a
/// common factor; the cap set is grown greedily from the largest
/// coordinate down. Entries below `1e-300` are raised to that floor.
pub fn entropic_project(v: &[f64], m: usize) -> Result<WeightVector> {
    check_m(v.len(), m)?;
    if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return invalid("entropic_project needs finite non-negative input");
    }
    if v.iter().all(|x| *x == 0.0) {
        return invalid("entropic_project of an all-zero vector");
    }
    let v: Vec<f64> = v.iter().map(|x| x.max(ENTROPIC_FLOOR)).collect();
    let n = v.len();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| v[b].partial_cmp(&v[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));

    // Suffix sums over the descending order.
    let mut rest: f64 = v.iter().sum();
    let mut capped = 0usize;
    let mut factor = 1.0;
    while capped < m {
        factor = (m - capped) as f64 / rest;
        if v[order[capped]] * factor <= 1.0 {
            break;
        }
        rest -= v[order[capped]];
        capped += 1;
        // Recompute the tail sum directly when cancellation gets severe.
        if rest <= 0.0 || rest < 1e-8 * v[order[capped - 1]] {
            rest = order[capped..].iter().map(|&i| v[i]).sum();
        }
    }

    let mut w = vec![0.0; n];
    for (rank, &i) in order.iter().enumerate() {
        w[i] = if rank < capped { 1.0 } else { (v[i] * factor).min(1.0) };
    }
    Ok(WeightVector::from_raw(w, m))
}

/// Writes `w` as a mixture of at most `n` m-set corners.
///
/// Greedy: take the `m` largest residual weights (lowest index on ties) as
/// a corner and give it the largest probability that keeps the residual a
/// scaled point of `S_m`. Each step zeroes a member or saturates a
/// non-member, so the loop ends within `n` steps.
pub fn decompose_corners(w: &WeightVector) -> Result<CornerDecomposition> {
    let n = w.len();
    let m = w.m();
    let checked = WeightVector::new(w.as_slice().to_vec(), m)?;

    let mut residual: Vec<f64> = checked
        .as_slice()
        .iter()
        .map(|&x| {
            if x < SNAP {
                0.0
            } else if x > 1.0 - SNAP {
                1.0
            } else {
                x
            }
        })
        .collect();
    let mut mass = 1.0;
    let mut entries = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();

    while mass > SNAP && entries.len() < 2 * n {
        order.sort_by(|&a, &b| {
            residual[b]
                .partial_cmp(&residual[a])
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        let (inside, outside) = order.split_at(m);
        let min_in = inside.iter().map(|&i| residual[i]).fold(f64::INFINITY, f64::min);
        let max_out = outside.iter().map(|&i| residual[i]).fold(0.0, f64::max);
        let mut p = min_in.min(mass - max_out).min(mass);
        if p <= 0.0 {
            // Residual drifted off the scaled simplex; spend what is left.
            p = mass;
        }
        let mut set = inside.to_vec();
        set.sort_unstable();
        for &i in &set {
            residual[i] -= p;
        }
        mass -= p;
        for r in &mut residual {
            if *r < SNAP {
                *r = 0.0;
            } else if *r > mass - SNAP {
                *r = mass;
            }
        }
        entries.push(Corner { set, probability: p });
    }

    let total: f64 = entries.iter().map(|c| c.probability).sum();
    for c in &mut entries {
        c.probability /= total;
    }
    Ok(CornerDecomposition { entries })
}

/// Draws an m-set from the corner decomposition of `w`.
///
/// Each expert is included with probability `w_i`. Returns sorted indices.
pub fn sample_mset(w: &WeightVector, rng: &mut Rng) -> Result<Vec<usize>> {
    let decomposition = decompose_corners(w)?;
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for corner in &decomposition.entries {
        acc += corner.probability;
        if u < acc {
            return Ok(corner.set.clone());
        }
    }
    Ok(decomposition
        .entries
        .last()
        .map(|c| c.set.clone())
        .unwrap_or_default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert_abs_diff_eq!(x, y, epsilon = tol);
        }
    }

    #[test]
    fn euclidean_identity_on_feasible_point() {
        let w = euclidean_project(&[0.5; 4], 2).unwrap();
        close(w.as_slice(), &[0.5; 4], 1e-15);
    }

    #[test]
    fn euclidean_uniform_shift() {
        let w = euclidean_project(&[0.55, 0.75, 0.75, 0.75], 3).unwrap();
        close(w.as_slice(), &[0.6, 0.8, 0.8, 0.8], 1e-12);
    }

    #[test]
    fn euclidean_clips_at_zero() {
        let w = euclidean_project(&[-0.2, 0.9, 0.9, 1.3], 2).unwrap();
        close(
            w.as_slice(),
            &[0.0, 0.533_333_333_333_333_3, 0.533_333_333_333_333_3, 0.933_333_333_333_333_3],
            1e-12,
        );
    }

    #[test]
    fn euclidean_m_equals_n_and_full_caps() {
        let w = euclidean_project(&[3.0, -1.0, 0.2], 3).unwrap();
        close(w.as_slice(), &[1.0, 1.0, 1.0], 0.0);
        let w = euclidean_project(&[5.0, 4.0, -3.0, -3.0], 2).unwrap();
        close(w.as_slice(), &[1.0, 1.0, 0.0, 0.0], 1e-15);
    }

    #[test]
    fn euclidean_errors() {
        assert!(euclidean_project(&[0.1, 0.2], 0).is_err());
        assert!(euclidean_project(&[0.1, 0.2], 3).is_err());
        assert!(euclidean_project(&[f64::NAN, 0.2], 1).is_err());
        assert!(euclidean_project(&[], 1).is_err());
    }

    #[test]
    fn entropic_examples() {
        let w = entropic_project(&[0.8, 0.6, 0.6], 2).unwrap();
        close(w.as_slice(), &[0.8, 0.6, 0.6], 1e-15);
        let w = entropic_project(&[0.9, 0.3, 0.3], 2).unwrap();
        close(w.as_slice(), &[1.0, 0.5, 0.5], 1e-15);
        let w = entropic_project(&[0.25, 0.5], 1).unwrap();
        close(w.as_slice(), &[1.0 / 3.0, 2.0 / 3.0], 1e-15);
    }

    #[test]
    fn entropic_errors() {
        assert!(entropic_project(&[0.0, 0.0], 1).is_err());
        assert!(entropic_project(&[0.5, 0.5], 3).is_err());
        assert!(entropic_project(&[0.5, -0.5], 1).is_err());
    }

    #[test]
    fn entropic_handles_zeros_with_floor() {
        let w = entropic_project(&[1.0, 0.0, 0.0], 2).unwrap();
        close(w.as_slice(), &[1.0, 0.5, 0.5], 1e-12);
    }

    #[test]
    fn decompose_vertex() {
        let w = WeightVector::new(vec![1.0, 1.0, 0.0], 2).unwrap();
        let d = decompose_corners(&w).unwrap();
        assert_eq!(d.entries, vec![Corner { set: vec![0, 1], probability: 1.0 }]);
    }

    #[test]
    fn decompose_half_split() {
        let w = WeightVector::new(vec![1.0, 0.5, 0.5], 2).unwrap();
        let d = decompose_corners(&w).unwrap();
        assert_eq!(d.entries.len(), 2);
        assert_eq!(d.entries[0].set, vec![0, 1]);
        assert_eq!(d.entries[1].set, vec![0, 2]);
        assert_abs_diff_eq!(d.entries[0].probability, 0.5, epsilon = 1e-12);
        close(&d.reconstruct(3), w.as_slice(), 1e-12);
    }

    #[test]
    fn decompose_thirds() {
        let t = 2.0 / 3.0;
        let w = WeightVector::new(vec![t, t, t], 2).unwrap();
        let d = decompose_corners(&w).unwrap();
        let sets: Vec<_> = d.entries.iter().map(|c| c.set.clone()).collect();
        assert_eq!(sets, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        for c in &d.entries {
            assert_abs_diff_eq!(c.probability, 1.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn decompose_rejects_infeasible() {
        let w = WeightVector::from_raw(vec![0.9, 0.9, 0.9], 2);
        assert!(decompose_corners(&w).is_err());
    }

    #[test]
    fn weight_vector_validation() {
        assert!(WeightVector::new(vec![0.5, 0.6], 1).is_err());
        assert!(WeightVector::new(vec![1.2, -0.2], 1).is_err());
        assert!(WeightVector::new(vec![0.5, 0.5], 0).is_err());
        let w = WeightVector::new(vec![1.0 + 1e-11, -1e-11], 1).unwrap();
        assert_eq!(w.as_slice(), &[1.0, 0.0]);
        let c = WeightVector::new(vec![0.25, 0.75, 1.0], 2).unwrap().complement();
        assert_eq!(c.m(), 1);
        close(c.as_slice(), &[0.75, 0.25, 0.0], 1e-15);
    }

    #[test]
    fn sample_vertex_is_deterministic() {
        let w = WeightVector::new(vec![1.0, 1.0, 0.0], 2).unwrap();
        let mut rng = crate::seeded_rng(3, 0);
        for _ in 0..100 {
            assert_eq!(sample_mset(&w, &mut rng).unwrap(), vec![0, 1]);
        }
    }

    #[test]
    fn sample_inclusion_frequencies() {
        let draws = 100_000;
        for (weights, m) in [(vec![1.0, 0.5, 0.5], 2), (vec![2.0 / 3.0; 3], 2)] {
            let w = WeightVector::new(weights.clone(), m).unwrap();
            let mut rng = crate::seeded_rng(11, 0);
            let mut counts = vec![0usize; 3];
            for _ in 0..draws {
                let s = sample_mset(&w, &mut rng).unwrap();
                assert_eq!(s.len(), m);
                for i in s {
                    counts[i] += 1;
                }
            }
            for (c, p) in counts.iter().zip(&weights) {
                let freq = *c as f64 / draws as f64;
                let sigma = (p * (1.0 - p) / draws as f64).sqrt();
                assert!((freq - p).abs() <= 3.0 * sigma + 1e-12, "freq {freq} vs {p}");
            }
        }
    }
}
