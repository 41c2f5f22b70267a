//! Tolerance-`τ` evaluation oracles.
//!
//! An [`EvalOracle`] wraps a hidden [`GroundTruth`] and answers each valid
//! query with a value within `τ` of the truth, as chosen by its
//! [`NoisePolicy`]. Invalid queries are rejected before they are counted.

mod truths;

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid_arg, Error, Result};
use crate::exec::{stream_rng, LabRng};
use crate::qmath::linalg::C64;

pub use truths::*;

/// Values an oracle can return, with the metric used for the tolerance.
pub trait OracleValue: Copy + std::fmt::Debug + Send + 'static {
    fn distance(&self, other: &Self) -> f64;
    /// Round onto a grid so the rounding error is at most `step / 2`.
    fn quantize(&self, step: f64) -> Self;
    /// Uniform perturbation within distance `width`.
    fn perturb(&self, width: f64, rng: &mut LabRng) -> Self;
    /// Closest point to `self` within distance `radius` of `center`.
    fn project(&self, center: &Self, radius: f64) -> Self;
    fn to_json(&self) -> serde_json::Value;
}

impl OracleValue for f64 {
    fn distance(&self, other: &Self) -> f64 {
        (self - other).abs()
    }

    fn quantize(&self, step: f64) -> Self {
        (self / step).round() * step
    }

    fn perturb(&self, width: f64, rng: &mut LabRng) -> Self {
        self + rng.random_range(-1.0..=1.0) * width
    }

    fn project(&self, center: &Self, radius: f64) -> Self {
        if self.is_nan() {
            return *center;
        }
        self.clamp(center - radius, center + radius)
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::json!(self)
    }
}

impl OracleValue for C64 {
    fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }

    fn quantize(&self, step: f64) -> Self {
        let g = step / std::f64::consts::SQRT_2;
        C64::new((self.re / g).round() * g, (self.im / g).round() * g)
    }

    fn perturb(&self, width: f64, rng: &mut LabRng) -> Self {
        let r = width * rng.random::<f64>().sqrt();
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        self + C64::from_polar(r, theta)
    }

    fn project(&self, center: &Self, radius: f64) -> Self {
        if self.re.is_nan() || self.im.is_nan() {
            return *center;
        }
        let d = self - center;
        if d.norm() <= radius {
            *self
        } else {
            center + d * (radius / d.norm())
        }
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::json!([self.re, self.im])
    }
}

/// Information handed to an adversarial responder.
#[derive(Clone, Debug)]
pub struct QueryContext<'a> {
    pub index: usize,
    pub tag: &'a str,
    pub tolerance: f64,
}

/// Responder receiving the exact value; its answer is projected back into
/// the tolerance ball.
pub type Adversary<V> = Box<dyn FnMut(&QueryContext<'_>, V) -> V + Send>;

/// How the oracle picks a value within tolerance.
pub enum NoisePolicy<V = f64> {
    Exact,
    /// Round the truth to a multiple of `step` (`step ≤ τ`).
    QuantizeGrid {
        step: f64,
    },
    /// Add uniform noise of radius `width ≤ τ` from a seeded stream.
    SeededUniform {
        width: f64,
        seed: u64,
    },
    AdversarialCallback(Adversary<V>),
}

impl<V> NoisePolicy<V> {
    /// Grid rounding with step `τ`, or exact answers when `τ = 0`.
    pub fn default_for(tau: f64) -> Self {
        if tau > 0.0 {
            NoisePolicy::QuantizeGrid { step: tau }
        } else {
            NoisePolicy::Exact
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NoisePolicy::Exact => "exact",
            NoisePolicy::QuantizeGrid { .. } => "quantize_grid",
            NoisePolicy::SeededUniform { .. } => "seeded_uniform",
            NoisePolicy::AdversarialCallback(_) => "adversarial",
        }
    }
}

impl<V> std::fmt::Debug for NoisePolicy<V> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NoisePolicy::Exact => write!(f, "Exact"),
            NoisePolicy::QuantizeGrid { step } => write!(f, "QuantizeGrid({step})"),
            NoisePolicy::SeededUniform { width, seed } => {
                write!(f, "SeededUniform({width}, seed={seed})")
            }
            NoisePolicy::AdversarialCallback(_) => write!(f, "AdversarialCallback"),
        }
    }
}

/// A hidden evaluation function `s: X → M`.
pub trait GroundTruth {
    type Query: ?Sized;
    type Value: OracleValue;

    /// Exact `s(x)`; errors on queries outside the domain.
    fn evaluate(&self, query: &Self::Query) -> Result<Self::Value>;

    /// Short label for transcripts.
    fn tag(&self, query: &Self::Query) -> String;

    /// Canonical bytes hashed into the transcript digest.
    fn digest_bytes(&self, query: &Self::Query) -> Vec<u8>;

    /// Maps a response onto the value space; must not move it further from
    /// the truth.
    fn admissible(&self, value: Self::Value) -> Self::Value {
        value
    }
}

/// One answered query.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub index: usize,
    pub tag: String,
    pub digest: String,
    pub value: serde_json::Value,
    pub tolerance: f64,
}

/// Evaluation oracle with tolerance `τ`.
pub struct EvalOracle<G: GroundTruth> {
    truth: G,
    tau: f64,
    policy: NoisePolicy<G::Value>,
    rng: Option<LabRng>,
    transcript: Vec<TranscriptEntry>,
}

impl<G: GroundTruth> std::fmt::Debug for EvalOracle<G> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EvalOracle")
            .field("tau", &self.tau)
            .field("policy", &self.policy)
            .field("queries", &self.transcript.len())
            .finish()
    }
}

impl<G: GroundTruth> EvalOracle<G> {
    pub fn new(truth: G, tau: f64, policy: NoisePolicy<G::Value>) -> Result<Self> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return invalid_arg("tolerance must be finite and non-negative");
        }
        let rng = match &policy {
            NoisePolicy::QuantizeGrid { step } if !(*step > 0.0 && *step <= tau) => {
                return invalid_arg(format!("grid step {step} must lie in (0, tau={tau}]"));
            }
            NoisePolicy::SeededUniform { width, .. } if !(*width >= 0.0 && *width <= tau) => {
                return invalid_arg(format!("noise width {width} must lie in [0, tau={tau}]"));
            }
            NoisePolicy::SeededUniform { seed, .. } => Some(stream_rng(*seed, 0)),
            _ => None,
        };
        Ok(EvalOracle {
            truth,
            tau,
            policy,
            rng,
            transcript: Vec::new(),
        })
    }

    pub fn tolerance(&self) -> f64 {
        self.tau
    }

    pub fn policy(&self) -> &NoisePolicy<G::Value> {
        &self.policy
    }

    pub fn query_count(&self) -> usize {
        self.transcript.len()
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    /// Answers `query`; invalid queries return an error and are not counted.
    pub fn query(&mut self, query: &G::Query) -> Result<G::Value> {
        let truth = self.truth.evaluate(query)?;
        let tag = self.truth.tag(query);
        let index = self.transcript.len();
        let value = match &mut self.policy {
            NoisePolicy::Exact => truth,
            NoisePolicy::QuantizeGrid { step } => truth.quantize(*step),
            NoisePolicy::SeededUniform { width, .. } => {
                truth.perturb(*width, self.rng.as_mut().expect("seeded at construction"))
            }
            NoisePolicy::AdversarialCallback(f) => {
                let ctx = QueryContext {
                    index,
                    tag: &tag,
                    tolerance: self.tau,
                };
                f(&ctx, truth)
            }
        };
        let value = self.truth.admissible(value.project(&truth, self.tau));
        if !(value.distance(&truth) <= self.tau + 1e-12) {
            return Err(Error::InconsistentResponse(format!(
                "response {value:?} leaves the tolerance ball around {truth:?}"
            )));
        }
        let mut hasher = Sha256::new();
        hasher.update(tag.as_bytes());
        hasher.update(self.truth.digest_bytes(query));
        self.transcript.push(TranscriptEntry {
            index,
            tag,
            digest: hex::encode(hasher.finalize()),
            value: value.to_json(),
            tolerance: self.tau,
        });
        Ok(value)
    }

    /// Writes the transcript as JSON lines.
    pub fn export_transcript<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for e in &self.transcript {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rounding_error_is_half_step() {
        for v in [-0.97, -0.31, 0.0, 0.049, 0.051, 0.73] {
            let q = v.quantize(0.1);
            assert!((q - v).abs() <= 0.05 + 1e-12);
            let z = C64::new(v, -v / 2.0);
            assert!(z.quantize(0.1).distance(&z) <= 0.05 + 1e-12);
        }
    }

    #[test]
    fn projection_stays_in_ball() {
        let c = C64::new(0.2, 0.1);
        let far = C64::new(3.0, -2.0);
        assert!((far.project(&c, 0.1).distance(&c) - 0.1).abs() < 1e-12);
        assert_eq!(5.0f64.project(&1.0, 0.5), 1.5);
        assert_eq!(f64::NAN.project(&1.0, 0.5), 1.0);
    }

    #[test]
    fn policy_validation() {
        let t = StatTruth::new(vec![0.5, 0.5]).unwrap();
        assert!(EvalOracle::new(t.clone(), 0.1, NoisePolicy::QuantizeGrid { step: 0.2 }).is_err());
        assert!(EvalOracle::new(
            t.clone(),
            0.1,
            NoisePolicy::SeededUniform {
                width: 0.2,
                seed: 1
            }
        )
        .is_err());
        assert!(EvalOracle::new(t.clone(), -1.0, NoisePolicy::Exact).is_err());
        assert!(EvalOracle::new(t, 0.1, NoisePolicy::default_for(0.1)).is_ok());
    }
}
