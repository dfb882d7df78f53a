//! Workloads shared by the benchmarks.

use qkalman_core::fixtures;
use qkalman_core::SlhModel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The published three-mode example at its default parameters.
pub fn example() -> SlhModel {
    fixtures::gzpg17(
        fixtures::DEFAULT_OMEGA,
        fixtures::DEFAULT_LAMBDA,
        fixtures::DEFAULT_GAMMA,
    )
}

/// A dense random system with `n` modes and `m` fields, fixed by `seed`.
pub fn dense(n: usize, m: usize, seed: u64) -> SlhModel {
    fixtures::random_dense(&mut ChaCha8Rng::seed_from_u64(seed), n, m)
}

/// A random system whose decomposition has dimensions `(1, n - 2, 1)`.
pub fn planted(n: usize, m: usize, seed: u64) -> SlhModel {
    fixtures::random_planted(&mut ChaCha8Rng::seed_from_u64(seed), n, m).model
}
