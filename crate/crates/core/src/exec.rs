//! Execution mode and deterministic chunked Monte Carlo plumbing.
//!
//! Every Monte Carlo loop in the crate splits its trials into fixed-size
//! chunks. Chunk `c` draws from `ChaCha8Rng::seed_from_u64(seed)` with its
//! stream set to `c`, and the per-chunk statistics are merged in chunk order.
//! The result therefore does not depend on how chunks are scheduled:
//! [`ExecMode::Sequential`] and [`ExecMode::Parallel`] return bit-identical
//! values for the same seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random number generator used by every sampler in the crate.
pub type SimRng = ChaCha8Rng;

/// Trials per chunk. Part of the reproducibility contract: changing it
/// changes every seeded result.
pub const CHUNK_SIZE: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExecMode {
    /// Single-threaded reference mode.
    Sequential,
    /// Rayon work-stealing across chunks / sweep points. Falls back to
    /// sequential execution when the `parallel` feature is disabled.
    Parallel,
}

impl Default for ExecMode {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }
}

/// Generator for chunk `chunk` of the stream family rooted at `seed`.
pub fn chunk_rng(seed: u64, chunk: usize) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// `(start, len)` of every chunk covering `total` trials.
pub fn chunk_ranges(total: usize) -> Vec<(usize, usize)> {
    (0..total.div_ceil(CHUNK_SIZE))
        .map(|c| {
            let start = c * CHUNK_SIZE;
            (start, CHUNK_SIZE.min(total - start))
        })
        .collect()
}

/// Maps `f` over `0..n`, preserving index order in the output.
pub fn map_indexed<T, F>(mode: ExecMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Runs `f(chunk_index, rng, len)` for every chunk of `total` trials and
/// returns the chunk results in chunk order.
pub fn map_chunks<T, F>(mode: ExecMode, total: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut SimRng, usize) -> T + Sync + Send,
{
    let ranges = chunk_ranges(total);
    map_indexed(mode, ranges.len(), |c| {
        let mut rng = chunk_rng(seed, c);
        f(c, &mut rng, ranges[c].1)
    })
}

/// Welford accumulator for mean and variance.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise merge.
    pub fn merge(&mut self, other: &RunningStats) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// Merges chunk accumulators left to right.
pub fn merge_in_order<'a, I>(parts: I) -> RunningStats
where
    I: IntoIterator<Item = &'a RunningStats>,
{
    let mut acc = RunningStats::default();
    for p in parts {
        acc.merge(p);
    }
    acc
}
