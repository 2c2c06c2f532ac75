//! Seeded Monte-Carlo averages over pairs of points of the disk.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::angle::angle_function;
use crate::error::{CalabiError, Result};
use crate::exec::{try_map_indexed, Execution};
use crate::flow::MapBundle;
use crate::geometry::DiskPoint;

/// Pairs per independently seeded chunk.
pub const CHUNK: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    #[default]
    Uniform,
    /// The first point's `r²` is stratified within each chunk.
    Stratified,
}

/// Draws pairs from `ω × ω` with a minimum separation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSampler {
    pub samples: usize,
    pub seed: u64,
    pub s_min: f64,
    pub strategy: Strategy,
    /// Redraws allowed per pair when the chord cannot be resolved.
    pub retry_budget: usize,
}

impl PairSampler {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            s_min: 1e-6,
            strategy: Strategy::Uniform,
            retry_budget: 8,
        }
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    fn chunk_rng(&self, chunk: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(chunk as u64);
        rng
    }

    fn point(rng: &mut ChaCha8Rng, stratum: Option<(usize, usize)>) -> DiskPoint {
        let s = match stratum {
            Some((i, n)) => (i as f64 + rng.gen::<f64>()) / n as f64,
            None => rng.gen::<f64>(),
        };
        DiskPoint::from_polar(s.sqrt(), TAU * rng.gen::<f64>())
    }

    /// The `i`-th pair of a chunk, redrawn until the separation holds.
    fn draw(&self, rng: &mut ChaCha8Rng, i: usize, len: usize) -> (DiskPoint, DiskPoint) {
        let stratum = match self.strategy {
            Strategy::Uniform => None,
            Strategy::Stratified => Some((i, len)),
        };
        loop {
            let x = Self::point(rng, stratum);
            let y = Self::point(rng, None);
            if x.distance(y) >= self.s_min {
                return (x, y);
            }
        }
    }

    /// Every pair the sampler would hand out, in order (no retries).
    pub fn pairs(&self) -> Vec<(DiskPoint, DiskPoint)> {
        let chunks = self.samples.div_ceil(CHUNK);
        let mut out = Vec::with_capacity(self.samples);
        for c in 0..chunks {
            let len = CHUNK.min(self.samples - c * CHUNK);
            let mut rng = self.chunk_rng(c);
            for i in 0..len {
                out.push(self.draw(&mut rng, i, len));
            }
        }
        out
    }
}

/// Mean of a pair function with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub resampled: usize,
}

#[derive(Debug, Clone, Copy)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
    resampled: usize,
}

impl Moments {
    fn merge(self, o: Moments) -> Moments {
        let n = self.n + o.n;
        if n == 0.0 {
            return self;
        }
        let delta = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * o.n / n,
            m2: self.m2 + o.m2 + delta * delta * self.n * o.n / n,
            resampled: self.resampled + o.resampled,
        }
    }
}

/// `E[f(x, y)]` over the sampler's pairs.
///
/// Chunks carry their own random stream and are merged in chunk order, so the
/// result does not depend on how many workers run.
pub fn estimate_pairs<F>(sampler: &PairSampler, exec: Execution, f: F) -> Result<MonteCarloEstimate>
where
    F: Fn(DiskPoint, DiskPoint) -> Result<f64> + Sync + Send,
{
    if sampler.samples == 0 {
        return Err(CalabiError::InvalidParameter("sample count must be positive".into()));
    }
    let chunks = sampler.samples.div_ceil(CHUNK);
    let parts = try_map_indexed(exec, chunks, |c| -> Result<Moments> {
        let len = CHUNK.min(sampler.samples - c * CHUNK);
        let mut rng = sampler.chunk_rng(c);
        let mut m = Moments {
            n: 0.0,
            mean: 0.0,
            m2: 0.0,
            resampled: 0,
        };
        for i in 0..len {
            let mut retries = 0;
            let value = loop {
                let (x, y) = sampler.draw(&mut rng, i, len);
                match f(x, y) {
                    Ok(v) => break v,
                    Err(CalabiError::StepTooCoarse(_)) if retries < sampler.retry_budget => {
                        retries += 1;
                        m.resampled += 1;
                    }
                    Err(e) => return Err(e),
                }
            };
            m.n += 1.0;
            let d = value - m.mean;
            m.mean += d / m.n;
            m.m2 += d * (value - m.mean);
        }
        Ok(m)
    })?;
    let total = parts
        .into_iter()
        .reduce(Moments::merge)
        .expect("at least one chunk");
    let var = if total.n > 1.0 {
        total.m2 / (total.n - 1.0)
    } else {
        0.0
    };
    Ok(MonteCarloEstimate {
        mean: total.mean,
        stderr: (var / total.n).sqrt(),
        samples: total.n as usize,
        resampled: total.resampled,
    })
}

/// Monte-Carlo `∫∫ Ang ω ω`.
pub fn cal2_tilde(bundle: &MapBundle, sampler: &PairSampler, exec: Execution) -> Result<MonteCarloEstimate> {
    estimate_pairs(sampler, exec, |x, y| Ok(angle_function(bundle, x, y)?.0))
}
