//! Seeded Monte Carlo estimation with results independent of thread count.
//!
//! Sample `i` always reads the `u64` words `[i*k, (i+1)*k)` of the ChaCha8
//! keystream for `seed`, where `k` is the fixed number of words a sampler
//! consumes. Chunks seek straight to their first word, so any partition of
//! the index range reproduces the serial stream, and chunk statistics are
//! merged in index order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const CHUNK_SIZE: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SamplingError {
    #[error("sample count must be at least 1")]
    NoSamples,
}

/// A sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√n`; zero for a single draw.
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl McEstimate {
    /// Distance from `target` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.mean - target).abs();
        if self.std_error == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            diff / self.std_error
        }
    }
}

/// Maps a raw word to a uniform double in `[0, 1)`.
pub fn unit_f64(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Maps a raw word to a uniform double in `(0, 1]`.
pub fn open_unit_f64(word: u64) -> f64 {
    ((word >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[derive(Clone, Copy)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    const EMPTY: Moments = Moments { count: 0, mean: 0.0, m2: 0.0 };

    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * (other.count as f64 / count as f64);
        let m2 = self.m2 + other.m2 + delta * delta * (self.count as f64 * other.count as f64 / count as f64);
        Moments { count, mean, m2 }
    }
}

/// Averages `sampler` over `n` draws, each fed `WORDS` fresh keystream words.
pub fn estimate_mean<const WORDS: usize, F>(seed: u64, n: u64, sampler: F) -> Result<McEstimate, SamplingError>
where
    F: Fn(&[u64; WORDS]) -> f64 + Sync,
{
    if n == 0 {
        return Err(SamplingError::NoSamples);
    }
    let chunks = n.div_ceil(CHUNK_SIZE as u64);
    let partials: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK_SIZE as u64;
            let end = (start + CHUNK_SIZE as u64).min(n);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // word_pos counts 32-bit words
            rng.set_word_pos(start as u128 * WORDS as u128 * 2);
            let mut words = [0u64; WORDS];
            let mut acc = Moments::EMPTY;
            for _ in start..end {
                for w in words.iter_mut() {
                    *w = rng.next_u64();
                }
                acc.push(sampler(&words));
            }
            acc
        })
        .collect();
    let total = partials.into_iter().fold(Moments::EMPTY, Moments::merge);
    let std_error =
        if total.count > 1 { (total.m2 / (total.count - 1) as f64).sqrt() / (total.count as f64).sqrt() } else { 0.0 };
    Ok(McEstimate { mean: total.mean, std_error, n_samples: n, seed })
}
