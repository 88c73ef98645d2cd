//! Seeded random source shared by initialization, data synthesis, and shuffling.
//!
//! The bit stream comes from ChaCha8, so a seed gives the same words on
//! every platform. Uniform and normal variates are derived here rather than
//! through `rand_distr`.

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream for the same seed. Used to hand each unit of work
    /// (a fold, a model, a shuffler) its own generator.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box–Muller (cosine branch only, so every draw
    /// consumes exactly two uniforms and no state is cached between calls).
    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        // 1 - u lies in (0, 1], keeping ln finite
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.inner);
    }
}

/// Distributions used for weight draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Distribution {
    Normal { mean: f64, variance: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl Distribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Distribution::Normal { mean, variance } => {
                if !(variance > 0.0 && variance.is_finite()) || !mean.is_finite() {
                    return Err(Error::invalid(format!(
                        "normal distribution needs finite mean and variance > 0, got mean {mean}, variance {variance}"
                    )));
                }
            }
            Distribution::Uniform { lo, hi } => {
                if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                    return Err(Error::invalid(format!(
                        "uniform distribution needs finite lo < hi, got [{lo}, {hi})"
                    )));
                }
            }
        }
        Ok(())
    }

    #[inline]
    fn draw(&self, rng: &mut Rng) -> f64 {
        match *self {
            Distribution::Normal { mean, variance } => mean + variance.sqrt() * rng.standard_normal(),
            Distribution::Uniform { lo, hi } => lo + (hi - lo) * rng.uniform(),
        }
    }
}

/// `n` draws from `dist`.
pub fn sample(rng: &mut Rng, dist: Distribution, n: usize) -> Result<Vec<f64>> {
    dist.validate()?;
    Ok((0..n).map(|_| dist.draw(rng)).collect())
}
