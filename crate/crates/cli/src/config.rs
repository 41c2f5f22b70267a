//! Experiment configuration and validation.

use serde::{Deserialize, Serialize};

use evalq::ensembles::GateSet;
use evalq::hardness::ParameterMeasure;

/// Experiments the runner can dispatch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Variance,
    Levy,
    #[serde(alias = "learner")]
    Learn,
    Bounds,
    BpProbe,
    Moments,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Variance,
        ExperimentKind::Levy,
        ExperimentKind::Learn,
        ExperimentKind::Bounds,
        ExperimentKind::BpProbe,
        ExperimentKind::Moments,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Variance => "variance",
            ExperimentKind::Levy => "levy",
            ExperimentKind::Learn => "learn",
            ExperimentKind::Bounds => "bounds",
            ExperimentKind::BpProbe => "bp-probe",
            ExperimentKind::Moments => "moments",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            ExperimentKind::Variance => {
                "variance of tr[rho^{(x)k} O] over an ensemble against its analytic bound"
            }
            ExperimentKind::Levy => {
                "empirical concentration tail of Haar states against the Levy bound"
            }
            ExperimentKind::Learn => {
                "repeated learner or tester trials with success rate and query counts"
            }
            ExperimentKind::Bounds => "closed-form query-complexity lower bounds",
            ExperimentKind::BpProbe => "gradient and loss concentration of a parametrized circuit",
            ExperimentKind::Moments => "trace-norm distance of empirical state moments from Haar",
        }
    }

    /// Parameters read by the experiment, for the catalog.
    pub fn parameters(self) -> &'static str {
        match self {
            ExperimentKind::Variance => "n, k, samples, ensemble, observable | pool",
            ExperimentKind::Levy => "n, k, tau, samples, observable",
            ExperimentKind::Learn => "learner, n, tau, eps, delta, trials, policy",
            ExperimentKind::Bounds => "bound, n, beta, tau",
            ExperimentKind::BpProbe => "model, measure, tau, delta, samples, audit",
            ExperimentKind::Moments => "n, t, samples, ensemble",
        }
    }
}

/// State ensemble selector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnsembleSpec {
    Haar,
    Clifford,
    /// The 24 single-qubit Cliffords, enumerated exactly.
    CliffordQubit,
    Brickwork {
        depth: usize,
        gateset: GateSet,
    },
}

/// Observable selector. Pauli labels act on every copy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableSpec {
    Pauli {
        label: String,
    },
    Identity,
    /// Random sum of Pauli products with unit `ℓ1` coefficient norm.
    RandomPauliSum {
        terms: usize,
    },
    /// Random dense Hermitian operator of unit norm on `N^k`.
    RandomDense,
}

/// Variance maximization over the adversarial pool.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolSpec {
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Parity,
    Zx,
    Gaussian,
    Purity,
    PureState,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Exact,
    QuantizeGrid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    SelflearnBasis,
}

/// Parametrized circuit selector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    HardwareEfficient {
        n: usize,
        layers: usize,
        observable: String,
    },
    SelfLearnBasis {
        n: usize,
        target: usize,
    },
}

/// A single experiment. Every field is optional so validation can report
/// all missing or invalid entries at once.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observable: Option<ObservableSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pool: Option<PoolSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learner: Option<LearnerKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicyKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<ParameterMeasure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

/// One validation failure, addressed by field path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Largest `n · k` for dense k-copy observables.
pub const DENSE_COPY_QUBITS: usize = 10;
/// Largest register for statevector experiments.
pub const STATEVECTOR_QUBITS: usize = 12;
/// Largest sample count accepted for a single run.
pub const MAX_SAMPLES: usize = 10_000_000;

struct Checker {
    out: Vec<Diagnostic>,
}

impl Checker {
    fn fail(&mut self, path: &str, message: impl Into<String>) {
        self.out.push(Diagnostic {
            path: path.to_string(),
            message: message.into(),
        });
    }

    fn need<'a, T>(&mut self, path: &str, v: &'a Option<T>) -> Option<&'a T> {
        if v.is_none() {
            self.fail(path, "missing required field");
        }
        v.as_ref()
    }

    fn range_usize(
        &mut self,
        path: &str,
        v: &Option<usize>,
        lo: usize,
        hi: usize,
    ) -> Option<usize> {
        let x = *self.need(path, v)?;
        if x < lo || x > hi {
            self.fail(path, format!("must lie in [{lo}, {hi}], got {x}"));
            return None;
        }
        Some(x)
    }

    fn open_unit(&mut self, path: &str, v: &Option<f64>, lo_closed: bool) -> Option<f64> {
        let x = *self.need(path, v)?;
        let ok = x.is_finite() && x < 1.0 && if lo_closed { x >= 0.0 } else { x > 0.0 };
        if !ok {
            let lo = if lo_closed { "[0" } else { "(0" };
            self.fail(path, format!("must lie in {lo}, 1), got {x}"));
            return None;
        }
        Some(x)
    }

    fn pauli(&mut self, path: &str, label: &str, n: Option<usize>) {
        if label.is_empty() || !label.chars().all(|c| "IXYZ".contains(c)) {
            self.fail(path, "Pauli labels use the letters I, X, Y, Z");
        } else if let Some(n) = n {
            if label.len() != n {
                self.fail(
                    path,
                    format!("label has {} letters but n = {n}", label.len()),
                );
            }
        }
    }
}

impl ExperimentConfig {
    /// Every problem with the configuration; empty when it can be dispatched.
    /// Never runs a workload.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut c = Checker { out: Vec::new() };
        c.need("seed", &self.seed);
        let Some(kind) = c.need("experiment", &self.experiment).copied() else {
            return c.out;
        };
        match kind {
            ExperimentKind::Variance => self.check_variance(&mut c),
            ExperimentKind::Levy => {
                let n = c.range_usize("n", &self.n, 1, 10);
                c.range_usize("k", &self.k, 1, 2);
                if let Some(t) = self.tau {
                    if !(t > 0.0 && t.is_finite()) {
                        c.fail("tau", format!("must be positive, got {t}"));
                    }
                } else {
                    c.fail("tau", "missing required field");
                }
                c.range_usize("samples", &self.samples, 1, MAX_SAMPLES);
                match &self.observable {
                    Some(ObservableSpec::Pauli { label }) => c.pauli("observable.label", label, n),
                    Some(_) => c.fail("observable.kind", "Levy checks take a Pauli observable"),
                    None => c.fail("observable", "missing required field"),
                }
            }
            ExperimentKind::Learn => self.check_learn(&mut c),
            ExperimentKind::Bounds => {
                c.need("bound", &self.bound);
                c.range_usize("n", &self.n, 1, 30);
                c.open_unit("tau", &self.tau, false);
                if let Some(b) = c.need("beta", &self.beta) {
                    if !(0.0..=1.0).contains(b) {
                        c.fail("beta", format!("must lie in [0, 1], got {b}"));
                    }
                }
            }
            ExperimentKind::BpProbe => {
                match c.need("model", &self.model) {
                    Some(ModelSpec::HardwareEfficient {
                        n,
                        layers,
                        observable,
                    }) => {
                        if *n == 0 || *n > STATEVECTOR_QUBITS {
                            c.fail(
                                "model.n",
                                format!("must lie in [1, {STATEVECTOR_QUBITS}], got {n}"),
                            );
                        }
                        if *layers == 0 || *layers > 64 {
                            c.fail("model.layers", format!("must lie in [1, 64], got {layers}"));
                        }
                        c.pauli("model.observable", observable, Some(*n));
                    }
                    Some(ModelSpec::SelfLearnBasis { n, target }) => {
                        if *n == 0 || *n > STATEVECTOR_QUBITS {
                            c.fail(
                                "model.n",
                                format!("must lie in [1, {STATEVECTOR_QUBITS}], got {n}"),
                            );
                        } else if target >> n != 0 {
                            c.fail("model.target", format!("must be below 2^{n}"));
                        }
                    }
                    None => {}
                }
                if let Some(t) = c.need("tau", &self.tau) {
                    if !(*t > 0.0 && t.is_finite()) {
                        c.fail("tau", format!("must be positive, got {t}"));
                    }
                }
                if let Some(d) = self.delta {
                    if !(0.0..=1.0).contains(&d) {
                        c.fail("delta", format!("must lie in [0, 1], got {d}"));
                    }
                }
                if let Some(ParameterMeasure::Gaussian { sigma }) = self.measure {
                    if !(sigma > 0.0 && sigma.is_finite()) {
                        c.fail("measure.sigma", "must be positive");
                    }
                }
                c.range_usize("samples", &self.samples, 3, 1_000_000);
            }
            ExperimentKind::Moments => {
                let n = c.range_usize("n", &self.n, 1, STATEVECTOR_QUBITS);
                let t = c.range_usize("t", &self.t, 1, 8);
                if let (Some(n), Some(t)) = (n, t) {
                    if n * t > 12 {
                        c.fail(
                            "t",
                            format!("moment operators need n * t <= 12, got {}", n * t),
                        );
                    }
                }
                c.range_usize("samples", &self.samples, 1, MAX_SAMPLES);
                self.check_ensemble(&mut c, n);
            }
        }
        c.out
    }

    fn check_ensemble(&self, c: &mut Checker, n: Option<usize>) {
        match c.need("ensemble", &self.ensemble) {
            Some(EnsembleSpec::CliffordQubit) => {
                if n.is_some_and(|n| n != 1) {
                    c.fail("ensemble.kind", "clifford_qubit needs n = 1");
                }
            }
            Some(EnsembleSpec::Brickwork { depth, .. }) if *depth == 0 || *depth > 256 => {
                c.fail(
                    "ensemble.depth",
                    format!("must lie in [1, 256], got {depth}"),
                );
            }
            _ => {}
        }
    }

    fn check_variance(&self, c: &mut Checker) {
        let n = c.range_usize("n", &self.n, 1, STATEVECTOR_QUBITS);
        let k = c.range_usize("k", &self.k, 1, 8);
        c.range_usize("samples", &self.samples, 3, MAX_SAMPLES);
        self.check_ensemble(c, n);
        match (&self.observable, &self.pool) {
            (Some(_), Some(_)) => c.fail("pool", "give either an observable or a pool, not both"),
            (None, None) => c.fail("observable", "missing required field (or give a pool)"),
            (None, Some(_)) => {}
            (Some(obs), None) => match obs {
                ObservableSpec::Pauli { label } => c.pauli("observable.label", label, n),
                ObservableSpec::RandomPauliSum { terms } => {
                    if *terms == 0 || *terms > 1024 {
                        c.fail(
                            "observable.terms",
                            format!("must lie in [1, 1024], got {terms}"),
                        );
                    }
                }
                ObservableSpec::Identity | ObservableSpec::RandomDense => {
                    if let (Some(n), Some(k)) = (n, k) {
                        if n * k > DENSE_COPY_QUBITS {
                            c.fail(
                                "k",
                                format!(
                                    "dense k-copy observables need n * k <= {DENSE_COPY_QUBITS}, got n * k = {}",
                                    n * k
                                ),
                            );
                        }
                    }
                }
            },
        }
    }

    fn check_learn(&self, c: &mut Checker) {
        let learner = c.need("learner", &self.learner).copied();
        c.range_usize("trials", &self.trials, 1, 100_000);
        let tau = c.open_unit("tau", &self.tau, true);
        let (lo, hi) = match learner {
            Some(LearnerKind::Parity) => (1, 20),
            Some(LearnerKind::Zx) => (1, 16),
            Some(LearnerKind::Gaussian) => (1, 5),
            Some(LearnerKind::Purity) | Some(LearnerKind::PureState) => (1, 5),
            None => return,
        };
        c.range_usize("n", &self.n, lo, hi);
        match learner {
            Some(LearnerKind::Parity) | Some(LearnerKind::Zx) => {
                if tau.is_some_and(|t| t >= 0.25) {
                    c.fail("tau", "parity and ZX learning need tau < 1/4");
                }
            }
            Some(LearnerKind::Purity) => {
                if let Some(d) = c.open_unit("delta", &self.delta, false) {
                    if tau.is_some_and(|t| t >= d / 2.0) {
                        c.fail("tau", "purity testing needs tau < delta / 2");
                    }
                }
            }
            Some(LearnerKind::PureState) => {
                if let Some(e) = c.open_unit("eps", &self.eps, false) {
                    if tau.is_some_and(|t| t >= e * e / 2.0) {
                        c.fail("tau", "pure-state testing needs tau < eps^2 / 2");
                    }
                }
            }
            _ => {}
        }
    }

    /// Fields overridden from the command line.
    pub fn with_overrides(mut self, seed: Option<u64>, out: Option<String>) -> Self {
        if seed.is_some() {
            self.seed = seed;
        }
        if out.is_some() {
            self.out = out;
        }
        self
    }
}
