//! Seeded random streams and deterministic sharding.
//!
//! Every stochastic routine draws from ChaCha8 seeded with
//! `seed_from_u64(master_seed)`; shard `s` uses stream `s` of that key. Work
//! is split into fixed-size shards and results are merged in shard order, so
//! output depends only on the master seed and never on the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Draws per shard for Monte Carlo routines.
pub const SHARD_SIZE: usize = 4096;

/// Stream reserved for auxiliary estimates (e.g. prior-predictive scales).
pub const AUX_STREAM: u64 = u64::MAX;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Worker configuration for sharded routines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Workers(usize);

impl Workers {
    pub fn new(n: usize) -> Self {
        Workers(n.max(1))
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// Run `f` for shard indices `0..n_shards`, returning results in shard
    /// order.
    pub fn run<T, F>(self, n_shards: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        if self.0 <= 1 || n_shards <= 1 {
            return (0..n_shards).map(f).collect();
        }
        match rayon::ThreadPoolBuilder::new().num_threads(self.0).build() {
            Ok(pool) => pool.install(|| (0..n_shards).into_par_iter().map(&f).collect()),
            Err(_) => (0..n_shards).map(f).collect(),
        }
    }
}

impl Default for Workers {
    fn default() -> Self {
        Workers(1)
    }
}

/// Sizes of the shards covering `n` items.
pub fn shard_sizes(n: usize) -> Vec<usize> {
    let mut out = vec![SHARD_SIZE; n / SHARD_SIZE];
    if !n.is_multiple_of(SHARD_SIZE) {
        out.push(n % SHARD_SIZE);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_differ_and_repeat() {
        let draw = |stream| {
            let mut r = stream_rng(7, stream);
            (0..4).map(|_| r.random::<u64>()).collect::<Vec<_>>()
        };
        assert_eq!(draw(0), draw(0));
        assert_ne!(draw(0), draw(1));
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let f = |s: usize| {
            let mut r = stream_rng(3, s as u64);
            (0..10).map(|_| r.random::<u32>()).collect::<Vec<_>>()
        };
        assert_eq!(Workers::new(1).run(9, f), Workers::new(4).run(9, f));
    }

    #[test]
    fn shard_sizes_cover() {
        assert_eq!(shard_sizes(1), vec![1]);
        assert_eq!(shard_sizes(SHARD_SIZE), vec![SHARD_SIZE]);
        assert_eq!(shard_sizes(2 * SHARD_SIZE + 5), vec![SHARD_SIZE, SHARD_SIZE, 5]);
    }
}
