//! Randomness plumbing.
//!
//! Every random decision in the simulator goes through [`Coins`]. A seeded
//! generator implements it for ordinary runs; [`enumerate_paths`] implements
//! it by walking every branch, which turns a randomized protocol run into an
//! exact outcome distribution.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Source of random choices.
pub trait Coins {
    /// Uniform draw from `0..n`. `n` must be positive.
    fn uniform(&mut self, n: usize) -> usize;

    /// Draw an index with probability proportional to `weights[i]`.
    fn weighted(&mut self, weights: &[f64]) -> usize;
}

impl<R: RngCore> Coins for R {
    fn uniform(&mut self, n: usize) -> usize {
        assert!(n > 0, "uniform draw over an empty range");
        self.gen_range(0..n)
    }

    fn weighted(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        assert!(total > 0.0, "weighted draw with zero total weight");
        let mut target = self.gen::<f64>() * total;
        let mut last_positive = 0;
        for (i, &w) in weights.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            last_positive = i;
            if target < w {
                return i;
            }
            target -= w;
        }
        // rounding can leave a sliver past the final bucket
        last_positive
    }
}

/// The generator used for all seeded runs. ChaCha8 keeps streams stable
/// across platforms and crate versions, so transcripts are reproducible.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator for trial `index` of an experiment seeded with `master`.
pub fn trial_stream(master: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// Branching weights below this are treated as impossible.
pub const BRANCH_EPS: f64 = 1e-15;

#[derive(Debug, Clone)]
struct Step {
    choice: usize,
    // (outcome index, branch probability) for every branch with nonzero weight
    options: Vec<(usize, f64)>,
}

/// [`Coins`] implementation that replays a scripted path and records new
/// branch points as it goes. Driven by [`enumerate_paths`].
#[derive(Debug, Default)]
pub struct PathCoins {
    script: Vec<Step>,
    cursor: usize,
    probability: f64,
}

impl PathCoins {
    fn restart(&mut self) {
        self.cursor = 0;
        self.probability = 1.0;
    }

    fn take(&mut self, options: impl FnOnce() -> Vec<(usize, f64)>) -> usize {
        if self.cursor == self.script.len() {
            self.script.push(Step { choice: 0, options: options() });
        }
        let step = &self.script[self.cursor];
        let (outcome, p) = step.options[step.choice];
        self.cursor += 1;
        self.probability *= p;
        outcome
    }

    /// Move to the next unexplored path. Returns false when exhausted.
    fn advance(&mut self) -> bool {
        self.script.truncate(self.cursor);
        while let Some(last) = self.script.last_mut() {
            if last.choice + 1 < last.options.len() {
                last.choice += 1;
                return true;
            }
            self.script.pop();
        }
        false
    }
}

impl Coins for PathCoins {
    fn uniform(&mut self, n: usize) -> usize {
        assert!(n > 0, "uniform draw over an empty range");
        debug_assert!(self.cursor >= self.script.len() || self.script[self.cursor].options.len() == n);
        let p = 1.0 / n as f64;
        self.take(|| (0..n).map(|i| (i, p)).collect())
    }

    fn weighted(&mut self, weights: &[f64]) -> usize {
        self.take(|| {
            let total: f64 = weights.iter().sum();
            assert!(total > 0.0, "weighted draw with zero total weight");
            weights
                .iter()
                .enumerate()
                .filter(|(_, &w)| w / total > BRANCH_EPS)
                .map(|(i, &w)| (i, w / total))
                .collect()
        })
    }
}

/// Run `f` once along every possible path of random choices and return each
/// result with the probability of its path.
///
/// `f` must be deterministic given the coins it draws.
pub fn enumerate_paths<T>(f: impl FnMut(&mut PathCoins) -> T) -> Vec<(T, f64)> {
    let mut out = Vec::new();
    for_each_path(f, |value, p| out.push((value, p)));
    out
}

/// Streaming form of [`enumerate_paths`]: hands each path's result and
/// probability to `sink` as soon as it is produced.
pub fn for_each_path<T>(mut f: impl FnMut(&mut PathCoins) -> T, mut sink: impl FnMut(T, f64)) {
    let mut coins = PathCoins::default();
    loop {
        coins.restart();
        let value = f(&mut coins);
        sink(value, coins.probability);
        if !coins.advance() {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerates_two_dice() {
        let paths = enumerate_paths(|c| c.uniform(2) * 10 + c.uniform(3));
        assert_eq!(paths.len(), 6);
        let total: f64 = paths.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let mut values: Vec<_> = paths.iter().map(|(v, _)| *v).collect();
        values.sort();
        assert_eq!(values, vec![0, 1, 2, 10, 11, 12]);
    }

    #[test]
    fn enumeration_follows_data_dependent_branching() {
        // second draw only happens on one branch
        let paths = enumerate_paths(|c| if c.uniform(2) == 0 { 0 } else { 1 + c.uniform(4) });
        assert_eq!(paths.len(), 5);
        assert!((paths[0].1 - 0.5).abs() < 1e-15);
        assert!((paths[1].1 - 0.125).abs() < 1e-15);
    }

    #[test]
    fn weighted_enumeration_skips_zero_weights() {
        let paths = enumerate_paths(|c| c.weighted(&[0.0, 3.0, 1.0]));
        assert_eq!(paths, vec![(1, 0.75), (2, 0.25)]);
    }

    #[test]
    fn seeded_weighted_respects_zero_weights() {
        let mut rng = seeded(3);
        for _ in 0..1000 {
            assert_ne!(rng.weighted(&[0.0, 1.0, 0.0, 2.0]), 0);
        }
    }

    #[test]
    fn trial_streams_differ() {
        let a: u64 = trial_stream(9, 0).gen();
        let b: u64 = trial_stream(9, 1).gen();
        assert_ne!(a, b);
        assert_eq!(a, trial_stream(9, 0).gen::<u64>());
    }
}
