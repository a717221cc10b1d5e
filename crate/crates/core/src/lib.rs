//! Online PCA and its diagonal specialization, the m-set problem.
//!
//! The crate provides the three mirror-descent learners studied for online
//! PCA (Loss MEG, Gain MEG and projected gradient descent) in matrix and
//! vector form, the parameter-space machinery they need (capped simplex
//! projections, mixture decompositions, projection sampling), the
//! stochastic and adaptive loss sequences used for lower bounds, tournament
//! statistics, and a seeded game harness that measures regret against the
//! closed-form bounds.
//!
//! Expert indices are zero-based throughout.

pub mod adversaries;
pub mod algorithms;
pub mod analysis;
pub mod capped_simplex;
pub mod error;
pub mod harness;
pub mod matrix;

pub use error::{Error, Result};
pub use nalgebra;

/// Seeded random stream used everywhere randomness is needed.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Builds the random stream for `seed`, on sub-stream `stream`.
///
/// Different consumers of one game seed (adversary, sampler, rotation)
/// draw from different streams so they never share state.
pub fn seeded_rng(seed: u64, stream: u64) -> Rng {
    use rand::SeedableRng;
    let mut rng = Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
