//! Seeded Monte Carlo streams and simple estimators.
//!
//! Work is split into fixed-size chunks, each with its own ChaCha stream
//! derived from `(seed, chunk index)`. Results are concatenated in chunk
//! order, so the output is identical whether chunks run on the rayon pool
//! or sequentially.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// RNG used by every sampler in the crate.
pub type LabRng = ChaCha8Rng;

/// Number of samples handled by one seeded stream.
pub const STREAM_CHUNK: usize = 64;

/// How Monte Carlo loops are executed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is enabled, otherwise
    /// falls back to sequential execution.
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// RNG for a given stream of a seed.
pub fn stream_rng(seed: u64, stream: u64) -> LabRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Map `f` over `0..count`, in order, on the chosen execution mode.
pub fn map_indexed<T, F>(exec: Execution, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec.is_parallel() {
            use rayon::prelude::*;
            return (0..count).into_par_iter().map(f).collect();
        }
    }
    let _ = exec;
    (0..count).map(f).collect()
}

/// Draw `samples` values, each produced by `f` from a chunk-local RNG.
pub fn sample_many<T, F>(exec: Execution, seed: u64, samples: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut LabRng) -> T + Sync + Send,
{
    let chunks = samples.div_ceil(STREAM_CHUNK);
    let per_chunk: Vec<Vec<T>> = map_indexed(exec, chunks, |c| {
        let mut rng = stream_rng(seed, c as u64);
        let start = c * STREAM_CHUNK;
        let len = STREAM_CHUNK.min(samples - start);
        (0..len).map(|_| f(&mut rng)).collect()
    });
    per_chunk.into_iter().flatten().collect()
}

/// A Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            stderr: 0.0,
            samples: 0,
        }
    }

    /// Upper end of the `k`-sigma band.
    pub fn upper(&self, k: f64) -> f64 {
        self.value + k * self.stderr
    }

    pub fn lower(&self, k: f64) -> f64 {
        self.value - k * self.stderr
    }
}

impl From<f64> for Estimate {
    fn from(value: f64) -> Self {
        Estimate::exact(value)
    }
}

/// Sample count, seed and execution mode of a Monte Carlo run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub samples: usize,
    pub seed: u64,
    #[serde(default)]
    pub exec: Execution,
}

impl MonteCarlo {
    pub fn new(samples: usize, seed: u64) -> Self {
        MonteCarlo {
            samples,
            seed,
            exec: Execution::default(),
        }
    }

    pub fn with_exec(self, exec: Execution) -> Self {
        MonteCarlo { exec, ..self }
    }
}

/// Sample mean with its standard error.
pub fn mean_estimate(xs: &[f64]) -> Estimate {
    let n = xs.len();
    if n == 0 {
        return Estimate {
            value: f64::NAN,
            stderr: f64::NAN,
            samples: 0,
        };
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let stderr = if n > 1 {
        let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
        (ss / (n as f64 - 1.0) / n as f64).sqrt()
    } else {
        0.0
    };
    Estimate {
        value: mean,
        stderr,
        samples: n,
    }
}

/// Unbiased sample variance with a jackknife standard error.
pub fn variance_estimate(xs: &[f64]) -> Estimate {
    let n = xs.len();
    if n < 3 {
        let v = if n == 2 {
            (xs[0] - xs[1]).powi(2) / 2.0
        } else {
            0.0
        };
        return Estimate {
            value: v,
            stderr: f64::NAN,
            samples: n,
        };
    }
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let centered: Vec<f64> = xs.iter().map(|x| x - mean).collect();
    let s1: f64 = centered.iter().sum();
    let s2: f64 = centered.iter().map(|c| c * c).sum();
    let full = (s2 - s1 * s1 / nf) / (nf - 1.0);
    let m = nf - 1.0;
    let loo: Vec<f64> = centered
        .iter()
        .map(|&c| {
            let a = s1 - c;
            let b = s2 - c * c;
            (b - a * a / m) / (m - 1.0)
        })
        .collect();
    let loo_mean = loo.iter().sum::<f64>() / nf;
    let jk: f64 = loo.iter().map(|v| (v - loo_mean).powi(2)).sum::<f64>() * (nf - 1.0) / nf;
    Estimate {
        value: full,
        stderr: jk.sqrt(),
        samples: n,
    }
}

/// Probability estimate for a boolean event sample.
pub fn proportion_estimate(hits: usize, n: usize) -> Estimate {
    if n == 0 {
        return Estimate {
            value: f64::NAN,
            stderr: f64::NAN,
            samples: 0,
        };
    }
    let p = hits as f64 / n as f64;
    Estimate {
        value: p,
        stderr: (p * (1.0 - p) / n as f64).sqrt(),
        samples: n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_mode_independent() {
        let f = |rng: &mut LabRng| rng.random::<f64>();
        let a = sample_many(Execution::Sequential, 7, 1000, f);
        let b = sample_many(Execution::Parallel, 7, 1000, f);
        assert_eq!(a, b);
        let c = sample_many(Execution::Parallel, 8, 1000, f);
        assert_ne!(a, c);
    }

    #[test]
    fn variance_of_two_point_sample() {
        let xs = [0.0, 1.0, 0.0, 1.0];
        let v = variance_estimate(&xs);
        assert!((v.value - 1.0 / 3.0).abs() < 1e-12);
        assert!(v.stderr >= 0.0);
    }

    #[test]
    fn jackknife_matches_brute_force() {
        let xs: Vec<f64> = (0..20).map(|i| ((i * 37) % 11) as f64 * 0.1).collect();
        let v = variance_estimate(&xs);
        let var = |s: &[f64]| {
            let m = s.iter().sum::<f64>() / s.len() as f64;
            s.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (s.len() as f64 - 1.0)
        };
        let n = xs.len();
        let loo: Vec<f64> = (0..n)
            .map(|i| {
                let rest: Vec<f64> = xs
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, x)| *x)
                    .collect();
                var(&rest)
            })
            .collect();
        let lm = loo.iter().sum::<f64>() / n as f64;
        let se = (loo.iter().map(|v| (v - lm).powi(2)).sum::<f64>() * (n as f64 - 1.0) / n as f64)
            .sqrt();
        assert!((v.value - var(&xs)).abs() < 1e-12);
        assert!((v.stderr - se).abs() < 1e-12);
    }
}
