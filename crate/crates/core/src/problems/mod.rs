//! Learning problems and the computable quantities that bound their query
//! complexity.

mod boost;
mod bounds;
mod metric;

use std::fmt;
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use crate::error::{invalid_arg, Error, Result};
use crate::exec::{proportion_estimate, sample_many, Estimate, LabRng, MonteCarlo};
use crate::oracles::OracleValue;

pub use boost::{boost, boost_repetitions, BoostOutcome};
pub use bounds::{
    basis_state_report, deterministic_avg_lower_bound, qnt_via_variance, random_lower_bound_dec,
    verifiable_lower_bound, BoundParameters, BoundReport,
};
pub use metric::{metric_chebyshev_check, metric_variance, metric_variance_exact, ChebyshevCheck};

type SamplerFn<S> = Arc<dyn Fn(&mut LabRng) -> S + Send + Sync>;

/// Probability measure over sources.
#[derive(Clone)]
pub enum Measure<S> {
    Explicit { support: Vec<S>, weights: Vec<f64> },
    Sampler { name: String, draw: SamplerFn<S> },
}

impl<S: fmt::Debug> fmt::Debug for Measure<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measure::Explicit { support, weights } => f
                .debug_struct("Explicit")
                .field("support", support)
                .field("weights", weights)
                .finish(),
            Measure::Sampler { name, .. } => write!(f, "Sampler({name})"),
        }
    }
}

impl<S> Measure<S> {
    pub fn explicit(support: Vec<S>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != weights.len() {
            return invalid_arg("explicit measure needs one weight per point");
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0))
            || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12
        {
            return invalid_arg("measure weights must sum to 1");
        }
        Ok(Measure::Explicit { support, weights })
    }

    pub fn uniform(support: Vec<S>) -> Result<Self> {
        let w = 1.0 / support.len().max(1) as f64;
        let weights = vec![w; support.len()];
        Self::explicit(support, weights)
    }

    pub fn point(s: S) -> Self {
        Measure::Explicit {
            support: vec![s],
            weights: vec![1.0],
        }
    }

    pub fn sampler(
        name: impl Into<String>,
        draw: impl Fn(&mut LabRng) -> S + Send + Sync + 'static,
    ) -> Self {
        Measure::Sampler {
            name: name.into(),
            draw: Arc::new(draw),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Measure::Explicit { .. } => "explicit",
            Measure::Sampler { .. } => "sampler",
        }
    }

    pub fn is_explicit(&self) -> bool {
        matches!(self, Measure::Explicit { .. })
    }
}

impl<S: Clone> Measure<S> {
    pub fn sample(&self, rng: &mut LabRng) -> S {
        match self {
            Measure::Explicit { support, weights } => {
                let idx = WeightedIndex::new(weights).expect("validated weights");
                support[idx.sample(rng)].clone()
            }
            Measure::Sampler { draw, .. } => draw(rng),
        }
    }
}

impl<S: Clone + Send + Sync> Measure<S> {
    /// Weighted points: the support itself, or `samples` equally weighted
    /// draws.
    fn weighted_points(&self, mc: MonteCarlo) -> Result<(Vec<(f64, S)>, bool)> {
        match self {
            Measure::Explicit { support, weights } => Ok((
                weights
                    .iter()
                    .copied()
                    .zip(support.iter().cloned())
                    .collect(),
                true,
            )),
            Measure::Sampler { draw, .. } => {
                if mc.samples == 0 {
                    return invalid_arg("sampled measure needs a positive sample count");
                }
                let w = 1.0 / mc.samples as f64;
                let pts = sample_many(mc.exec, mc.seed, mc.samples, |rng| (w, draw(rng)));
                Ok((pts, false))
            }
        }
    }
}

/// Probability of an event that is either exact or a sample proportion.
fn event_mass<S>(points: &[(f64, S)], exact: bool, event: impl Fn(&S) -> bool) -> Estimate {
    if exact {
        Estimate::exact(
            points
                .iter()
                .filter(|(_, s)| event(s))
                .map(|(w, _)| w)
                .sum::<f64>()
                .min(1.0),
        )
    } else {
        proportion_estimate(
            points.iter().filter(|(_, s)| event(s)).count(),
            points.len(),
        )
    }
}

type Predicate<S, T> = Arc<dyn Fn(&S, &T) -> bool + Send + Sync>;

/// A map `Z: S → P(T)` given by the predicate `t ∈ Z(s)`.
#[derive(Clone)]
pub struct LearningProblem<S, T> {
    name: String,
    predicate: Predicate<S, T>,
    targets: Option<Vec<T>>,
}

impl<S, T: fmt::Debug> fmt::Debug for LearningProblem<S, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LearningProblem")
            .field("name", &self.name)
            .field("targets", &self.targets)
            .finish()
    }
}

impl<S, T> LearningProblem<S, T> {
    pub fn new(
        name: impl Into<String>,
        predicate: impl Fn(&S, &T) -> bool + Send + Sync + 'static,
    ) -> Self {
        LearningProblem {
            name: name.into(),
            predicate: Arc::new(predicate),
            targets: None,
        }
    }

    /// Attaches a finite target space.
    pub fn with_targets(mut self, targets: Vec<T>) -> Self {
        self.targets = Some(targets);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn targets(&self) -> Option<&[T]> {
        self.targets.as_deref()
    }

    /// `t ∈ Z(s)`.
    pub fn solves(&self, s: &S, t: &T) -> bool {
        (self.predicate)(s, t)
    }

    /// `Z_t = {s : t ∈ Z(s)}` within a finite source list.
    pub fn compatible_sources<'a>(&self, sources: &'a [S], t: &T) -> Vec<&'a S> {
        sources.iter().filter(|s| self.solves(s, t)).collect()
    }
}

/// Self-learning of computational basis states: sources and targets are
/// `z ∈ {0,1}^n`, and `y` solves `z` iff `y = z`.
pub fn basis_state_problem(n: usize) -> Result<(LearningProblem<u64, u64>, Measure<u64>)> {
    if n == 0 || n > 20 {
        return invalid_arg("enumerated basis-state problem needs 1 <= n <= 20");
    }
    let all: Vec<u64> = (0..1u64 << n).collect();
    let problem =
        LearningProblem::new("basis_states", |s: &u64, t: &u64| s == t).with_targets(all.clone());
    Ok((problem, Measure::uniform(all)?))
}

/// `triv[Z, μ] = max_t Pr_{s∼μ}[s ∈ Z_t]` over `candidates`, or over the
/// problem's own target list when `candidates` is `None`.
pub fn triv<S, T>(
    problem: &LearningProblem<S, T>,
    mu: &Measure<S>,
    candidates: Option<&[T]>,
    mc: MonteCarlo,
) -> Result<Estimate>
where
    S: Clone + Send + Sync,
{
    let candidates = candidates
        .or(problem.targets())
        .ok_or_else(|| Error::InvalidArgument("triv needs candidate targets".into()))?;
    if candidates.is_empty() {
        return invalid_arg("triv needs at least one candidate target");
    }
    let (points, exact) = mu.weighted_points(mc)?;
    Ok(candidates
        .iter()
        .map(|t| event_mass(&points, exact, |s| problem.solves(s, t)))
        .fold(Estimate::exact(f64::NEG_INFINITY), |best, e| {
            if e.value > best.value {
                e
            } else {
                best
            }
        }))
}

/// Maximum over a query pool, with the maximizing index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoolMax {
    pub estimate: Estimate,
    pub index: usize,
}

/// `frac(μ, f, τ) = max_x Pr_{s∼μ}[d(s(x), f(x)) > τ]` over `pool`.
pub fn frac<S, X, V>(
    mu: &Measure<S>,
    eval: impl Fn(&S, &X) -> V,
    reference: impl Fn(&X) -> V,
    tau: f64,
    pool: &[X],
    mc: MonteCarlo,
) -> Result<PoolMax>
where
    S: Clone + Send + Sync,
    V: OracleValue,
{
    if pool.is_empty() {
        return invalid_arg("frac needs a nonempty query pool");
    }
    let (points, exact) = mu.weighted_points(mc)?;
    let mut best: Option<PoolMax> = None;
    for (index, x) in pool.iter().enumerate() {
        let fx = reference(x);
        let estimate = event_mass(&points, exact, |s| eval(s, x).distance(&fx) > tau);
        if best.is_none_or(|b| estimate.value > b.estimate.value) {
            best = Some(PoolMax { estimate, index });
        }
    }
    Ok(best.expect("pool is nonempty"))
}

type DistanceFn<S> = Arc<dyn Fn(&S, &S) -> f64 + Send + Sync>;

/// ε-learning specification: a tolerance and the distance on sources.
#[derive(Clone)]
pub struct EpsLearnSpec<S> {
    pub eps: f64,
    label: String,
    distance: DistanceFn<S>,
}

impl<S> fmt::Debug for EpsLearnSpec<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EpsLearnSpec(eps={}, {})", self.eps, self.label)
    }
}

impl<S: 'static> EpsLearnSpec<S> {
    pub fn new(
        eps: f64,
        label: impl Into<String>,
        distance: impl Fn(&S, &S) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return invalid_arg("epsilon must be positive");
        }
        Ok(EpsLearnSpec {
            eps,
            label: label.into(),
            distance: Arc::new(distance),
        })
    }

    /// Restricted pseudo-distance `d_M(s, s') = max_{x∈M} d(s(x), s'(x))`.
    pub fn restricted<X, V>(
        eps: f64,
        queries: Vec<X>,
        eval: impl Fn(&S, &X) -> V + Send + Sync + 'static,
    ) -> Result<Self>
    where
        X: Send + Sync + 'static,
        V: OracleValue,
    {
        if queries.is_empty() {
            return invalid_arg("restricted distance needs at least one query");
        }
        let label = format!("restricted[{}]", queries.len());
        Self::new(eps, label, move |a, b| {
            queries
                .iter()
                .map(|x| eval(a, x).distance(&eval(b, x)))
                .fold(0.0, f64::max)
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn distance(&self, a: &S, b: &S) -> f64 {
        (self.distance)(a, b)
    }
}

/// `Pr_{s∼μ}[d(s, center) < ε]`.
pub fn eps_ball_mass<S>(
    mu: &Measure<S>,
    center: &S,
    spec: &EpsLearnSpec<S>,
    mc: MonteCarlo,
) -> Result<Estimate>
where
    S: Clone + Send + Sync + 'static,
{
    eps_ball_mass_radius(mu, center, spec, spec.eps, mc)
}

/// Ball mass with an explicit radius, used for the `2ε + τ` balls of the
/// ε-learning bounds.
pub fn eps_ball_mass_radius<S>(
    mu: &Measure<S>,
    center: &S,
    spec: &EpsLearnSpec<S>,
    radius: f64,
    mc: MonteCarlo,
) -> Result<Estimate>
where
    S: Clone + Send + Sync + 'static,
{
    let (points, exact) = mu.weighted_points(mc)?;
    Ok(event_mass(&points, exact, |s| {
        spec.distance(s, center) < radius
    }))
}

/// `Dec(S, s*)`: decide whether the hidden source is `s*` or drawn from `μ`.
#[derive(Clone, Debug)]
pub struct DecisionProblem<S> {
    pub class: Measure<S>,
    pub reference: S,
}

impl<S: Clone + Send + Sync> DecisionProblem<S> {
    pub fn new(class: Measure<S>, reference: S) -> Self {
        DecisionProblem { class, reference }
    }

    /// `frac(μ, s*, τ)` over `pool`.
    pub fn frac<X, V: OracleValue>(
        &self,
        eval: impl Fn(&S, &X) -> V,
        tau: f64,
        pool: &[X],
        mc: MonteCarlo,
    ) -> Result<PoolMax> {
        frac(
            &self.class,
            &eval,
            |x| eval(&self.reference, x),
            tau,
            pool,
            mc,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triv_for_basis_states() {
        for n in 1..=6 {
            let (p, mu) = basis_state_problem(n).unwrap();
            let t = triv(&p, &mu, None, MonteCarlo::new(0, 0)).unwrap();
            assert_eq!(t.value, 0.5f64.powi(n as i32));
            assert_eq!(t.stderr, 0.0);
        }
    }

    #[test]
    fn triv_small_cases() {
        let p = LearningProblem::new("single", |_: &u8, _: &u8| true);
        let t = triv(&p, &Measure::point(0), Some(&[3]), MonteCarlo::new(0, 0)).unwrap();
        assert_eq!(t.value, 1.0);
        let p = LearningProblem::new("disjoint", |s: &u8, t: &u8| s == t).with_targets(vec![0, 1]);
        let mu = Measure::uniform(vec![0, 1]).unwrap();
        assert_eq!(
            triv(&p, &mu, None, MonteCarlo::new(0, 0)).unwrap().value,
            0.5
        );
        assert!(triv(&p, &mu, Some(&[]), MonteCarlo::new(0, 0)).is_err());
    }

    #[test]
    fn frac_basis_states_exact() {
        let n = 4;
        let mu = Measure::uniform((0..16u64).collect()).unwrap();
        let pool: Vec<u64> = (0..16).collect();
        let eval = |z: &u64, y: &u64| if z == y { 1.0 } else { 0.0 };
        for tau in [0.1, 0.5, 0.9] {
            let r = frac(&mu, eval, |_| 0.0, tau, &pool, MonteCarlo::new(0, 0)).unwrap();
            assert_eq!(r.estimate.value, 0.5f64.powi(n));
        }
        let point = Measure::point(3u64);
        let r = frac(
            &point,
            eval,
            |y| eval(&3, y),
            0.1,
            &pool,
            MonteCarlo::new(0, 0),
        )
        .unwrap();
        assert_eq!(r.estimate.value, 0.0);
    }

    #[test]
    fn sampled_measure_reports_stderr() {
        let mu = Measure::sampler("coin", |rng: &mut LabRng| {
            rand::Rng::random::<bool>(rng) as u8
        });
        let p = LearningProblem::new("eq", |s: &u8, t: &u8| s == t).with_targets(vec![0, 1]);
        let t = triv(&p, &mu, None, MonteCarlo::new(4000, 3)).unwrap();
        assert!(t.stderr > 0.0 && (t.value - 0.5).abs() < 5.0 * t.stderr + 0.01);
        assert!(triv(&p, &mu, None, MonteCarlo::new(0, 3)).is_err());
    }
}
