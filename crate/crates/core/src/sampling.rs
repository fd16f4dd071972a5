//! Weighted index sampling with a reproducible generator.
//!
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64`. Its output stream is value-stable across platforms and
//! crate versions, so a seed pins every draw of an experiment.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Deterministic random state owned by a single solver run.
#[derive(Debug, Clone)]
pub struct RngState {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw from `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub(crate) fn inner(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Draws index `i` with probability `w_i / Σ w` via a cumulative table.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSampler {
    cumulative: Vec<f64>,
    total: f64,
    last_positive: usize,
}

impl WeightedSampler {
    pub fn new(weights: &[f64]) -> Result<Self> {
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut total = 0.0;
        let mut last_positive = None;
        for (index, &w) in weights.iter().enumerate() {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::NegativeWeight { index, value: w });
            }
            if w > 0.0 {
                last_positive = Some(index);
            }
            total += w;
            cumulative.push(total);
        }
        let last_positive = last_positive.ok_or(Error::DegenerateWeights)?;
        Ok(Self {
            cumulative,
            total,
            last_positive,
        })
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn probability(&self, i: usize) -> f64 {
        let lo = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
        (self.cumulative[i] - lo) / self.total
    }

    pub fn draw(&self, rng: &mut RngState) -> usize {
        let u = rng.unit() * self.total;
        // First index whose cumulative weight exceeds u; zero-weight entries
        // share their predecessor's cumulative value and can never be first.
        let i = self.cumulative.partition_point(|&c| c <= u);
        i.min(self.last_positive)
    }
}

/// Index distribution used by a solver.
#[derive(Debug, Clone, PartialEq)]
pub enum Sampler {
    Weighted(WeightedSampler),
    /// Exactly uniform over `0..n`.
    Uniform(usize),
}

impl Sampler {
    pub fn weighted(weights: &[f64]) -> Result<Self> {
        WeightedSampler::new(weights).map(Sampler::Weighted)
    }

    pub fn draw(&self, rng: &mut RngState) -> usize {
        match self {
            Sampler::Weighted(w) => w.draw(rng),
            Sampler::Uniform(n) => rng.index(*n),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Sampler::Weighted(w) => w.len(),
            Sampler::Uniform(n) => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn probability(&self, i: usize) -> f64 {
        match self {
            Sampler::Weighted(w) => w.probability(i),
            Sampler::Uniform(n) => 1.0 / *n as f64,
        }
    }
}
