//! Dispatch of validated configurations to the library.

use std::time::Instant;

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use evalq::ensembles::{
    design_deviation, random_observable, single_qubit_cliffords, UnitaryEnsemble,
};
use evalq::exec::stream_rng;
use evalq::hardness::{
    adversarial_pool, bp_probe, levy_tail_check, pool_max_variance, random_product_observable,
    selflearn_basis_quantities, state_variance, KCopyObservable, ParameterMeasure,
    ParametrizedModel,
};
use evalq::learners::{
    far_pure_state, gaussian_state_learner, parity_learner, pure_state_tester, purity_instance,
    purity_tester, qpac_parity_state, random_pure_gaussian, zx_loss_oracle, zx_string,
    zx_string_learner,
};
use evalq::oracles::{make_kqstat_oracle, make_qstat_oracle, NoisePolicy};
use evalq::qmath::pauli::PauliWeyl;
use evalq::qmath::states::Observable;
use evalq::{Execution, MonteCarlo};

use crate::config::{
    BoundKind, Diagnostic, EnsembleSpec, ExperimentConfig, ExperimentKind, LearnerKind, ModelSpec,
    ObservableSpec, PolicyKind,
};
use crate::CliError;

/// Version tag of the JSON report layout.
pub const SCHEMA_VERSION: &str = "evalq.run/1";

/// Stream index reserved for drawing random observables.
const OBSERVABLE_STREAM: u64 = u64::MAX;

/// Rows shown by [`Table::render`].
const RENDER_ROWS: usize = 20;

/// Full output of one run.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema_version: &'static str,
    pub library_version: &'static str,
    pub experiment: &'static str,
    pub config: ExperimentConfig,
    /// sha256 of the canonical config JSON, without the output directory.
    pub config_hash: String,
    pub results: Value,
    /// CSV header and rows.
    #[serde(skip)]
    pub table: Table,
    pub wall_clock_seconds: f64,
}

impl RunReport {
    /// The report without its wall-clock field, for reproducibility checks.
    pub fn payload(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        if let Value::Object(m) = &mut v {
            m.remove("wall_clock_seconds");
        }
        v
    }
}

/// A rectangular table of stringified cells.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn from_rows<R: Serialize>(rows: &[R]) -> Result<Self, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)
                .map_err(|e| CliError::Runtime(format!("csv encoding failed: {e}")))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        let mut rd = csv::Reader::from_reader(bytes.as_slice());
        let header = rd
            .headers()
            .map_err(|e| CliError::Runtime(e.to_string()))?
            .iter()
            .map(String::from)
            .collect();
        let rows = rd
            .records()
            .map(|r| r.map(|r| r.iter().map(String::from).collect()))
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        Ok(Table { header, rows })
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Runtime(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Runtime(e.to_string()))
    }

    /// Column-aligned text rendering for the terminal.
    pub fn render(&self) -> String {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
        for r in &self.rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.len().min(48));
            }
        }
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| {
                    let c: String = c.chars().take(48).collect();
                    format!("{c:<w$}")
                })
                .collect::<Vec<_>>()
                .join("  ")
        };
        let mut out = vec![line(&self.header)];
        out.extend(self.rows.iter().take(RENDER_ROWS).map(|r| line(r)));
        if self.rows.len() > RENDER_ROWS {
            out.push(format!("... {} more rows", self.rows.len() - RENDER_ROWS));
        }
        out.join("\n")
    }
}

/// sha256 over the canonical config, ignoring where outputs go.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let mut c = config.clone();
    c.out = None;
    let bytes = serde_json::to_vec(&c).expect("configs serialize");
    hex::encode(Sha256::digest(&bytes))
}

fn lib(e: evalq::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

fn ensemble(spec: &EnsembleSpec, n: usize) -> Result<UnitaryEnsemble, CliError> {
    Ok(match spec {
        EnsembleSpec::Haar => UnitaryEnsemble::Haar { dim: 1 << n },
        EnsembleSpec::Clifford => UnitaryEnsemble::CliffordUniform { n },
        EnsembleSpec::CliffordQubit => {
            UnitaryEnsemble::uniform(single_qubit_cliffords()).map_err(lib)?
        }
        EnsembleSpec::Brickwork { depth, gateset } => UnitaryEnsemble::Brickwork {
            n,
            depth: *depth,
            gateset: *gateset,
        },
    })
}

fn k_copy_observable(
    spec: &ObservableSpec,
    n: usize,
    k: usize,
    seed: u64,
) -> Result<KCopyObservable, CliError> {
    let dim = 1usize << n;
    let mut rng = stream_rng(seed, OBSERVABLE_STREAM);
    match spec {
        ObservableSpec::Pauli { label } => {
            KCopyObservable::pauli_power(&PauliWeyl::from_label(label).map_err(lib)?, k)
                .map_err(lib)
        }
        ObservableSpec::Identity => {
            KCopyObservable::dense(Observable::identity(dim.pow(k as u32)), dim).map_err(lib)
        }
        ObservableSpec::RandomPauliSum { terms } => {
            random_product_observable(n, k, *terms, &mut rng).map_err(lib)
        }
        ObservableSpec::RandomDense => {
            KCopyObservable::dense(random_observable(dim.pow(k as u32), &mut rng), dim).map_err(lib)
        }
    }
}

fn policy(kind: Option<PolicyKind>, tau: f64) -> NoisePolicy {
    match kind {
        Some(PolicyKind::Exact) => NoisePolicy::Exact,
        _ => NoisePolicy::default_for(tau),
    }
}

fn policy_name(kind: Option<PolicyKind>) -> &'static str {
    match kind {
        Some(PolicyKind::Exact) => "exact",
        _ => "quantize_grid",
    }
}

#[derive(Serialize)]
struct LearnRow {
    trial: usize,
    learner: &'static str,
    policy: &'static str,
    n: usize,
    tau: f64,
    success: bool,
    queries: usize,
    /// Fidelity, tester response or 1 for exact recovery.
    score: f64,
}

#[derive(Serialize)]
struct BoundRow {
    problem: String,
    n: usize,
    beta: f64,
    tau: f64,
    triv: f64,
    frac: f64,
    qnt_lower: f64,
    lower_bound_value: f64,
}

#[derive(Serialize)]
struct MomentRow {
    ensemble: String,
    n: usize,
    t: usize,
    deviation: f64,
    stderr: f64,
    samples: usize,
}

fn random_bits(n: usize, rng: &mut impl Rng) -> Vec<bool> {
    (0..n).map(|_| rng.random_bool(0.5)).collect()
}

fn learn_trial(
    cfg: &ExperimentConfig,
    learner: LearnerKind,
    trial: usize,
) -> Result<LearnRow, CliError> {
    let (n, tau) = (cfg.n.unwrap_or(1), cfg.tau.unwrap_or(0.0));
    let mut rng = stream_rng(cfg.seed.unwrap_or(0), trial as u64);
    let pol = || policy(cfg.policy, tau);
    let (success, queries, score, name) = match learner {
        LearnerKind::Parity => {
            let s = random_bits(n, &mut rng);
            let mut o = make_qstat_oracle(qpac_parity_state(&s, n).map_err(lib)?, tau, pol())
                .map_err(lib)?;
            let r = parity_learner(&mut o, n).map_err(lib)?;
            (r.hypothesis == s, r.queries_used, 1.0, "parity")
        }
        LearnerKind::Zx => {
            let x = random_bits(n, &mut rng);
            let mut o = zx_loss_oracle(zx_string(&x).map_err(lib)?, tau, pol()).map_err(lib)?;
            let r = zx_string_learner(&mut o, n).map_err(lib)?;
            (r.hypothesis == x, r.queries_used, 1.0, "zx")
        }
        LearnerKind::Gaussian => {
            let eps = cfg.eps.unwrap_or(0.1);
            let psi = random_pure_gaussian(n, &mut rng).map_err(lib)?;
            let mut o = make_qstat_oracle(psi.clone(), tau, pol()).map_err(lib)?;
            let r = gaussian_state_learner(&mut o, n).map_err(lib)?;
            let f = r.hypothesis.state.overlap_sqr(&psi);
            (f >= 1.0 - eps, r.queries_used, f, "gaussian")
        }
        LearnerKind::Purity => {
            let delta = cfg.delta.unwrap_or(0.2);
            let pure = rng.random_bool(0.5);
            let state = purity_instance(1 << n, delta, pure, &mut rng).map_err(lib)?;
            let mut o = make_kqstat_oracle(state, 2, tau, pol()).map_err(lib)?;
            let r = purity_tester(&mut o, 1 << n, delta).map_err(lib)?;
            (
                r.hypothesis.accept == pure,
                r.queries_used,
                r.hypothesis.response,
                "purity",
            )
        }
        LearnerKind::PureState => {
            let eps = cfg.eps.unwrap_or(0.3);
            let reference = evalq::ensembles::haar_state(1 << n, &mut rng);
            let same = rng.random_bool(0.5);
            let state = if same {
                reference.clone()
            } else {
                far_pure_state(&reference, eps, &mut rng).map_err(lib)?
            };
            let mut o = make_qstat_oracle(state, tau, pol()).map_err(lib)?;
            let r = pure_state_tester(&mut o, &reference, eps).map_err(lib)?;
            (
                r.hypothesis.accept == same,
                r.queries_used,
                r.hypothesis.response,
                "pure_state",
            )
        }
    };
    Ok(LearnRow {
        trial,
        learner: name,
        policy: policy_name(cfg.policy),
        n,
        tau,
        success,
        queries,
        score,
    })
}

fn run_variance(cfg: &ExperimentConfig, mc: MonteCarlo) -> Result<(Value, Table), CliError> {
    let (n, k) = (cfg.n.unwrap_or(1), cfg.k.unwrap_or(1));
    let e = ensemble(cfg.ensemble.as_ref().expect("validated"), n)?;
    if let Some(pool) = &cfg.pool {
        let members = adversarial_pool(&e, k, pool.seed).map_err(lib)?;
        let (best, reports) = pool_max_variance(&e, &members, mc).map_err(lib)?;
        let table = Table::from_rows(&reports)?;
        return Ok((json!({ "best": best, "reports": reports }), table));
    }
    let o = k_copy_observable(cfg.observable.as_ref().expect("validated"), n, k, mc.seed)?;
    let r = state_variance(&e, &o, mc).map_err(lib)?;
    let table = Table::from_rows(std::slice::from_ref(&r))?;
    Ok((serde_json::to_value(&r).expect("serializes"), table))
}

fn run_learn(cfg: &ExperimentConfig, exec: Execution) -> Result<(Value, Table), CliError> {
    let learner = cfg.learner.expect("validated");
    let trials = cfg.trials.unwrap_or(1);
    let rows = evalq::exec::map_indexed(exec, trials, |t| learn_trial(cfg, learner, t))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let wins = rows.iter().filter(|r| r.success).count();
    let queries: Vec<usize> = rows.iter().map(|r| r.queries).collect();
    let summary = json!({
        "learner": rows.first().map(|r| r.learner),
        "policy": policy_name(cfg.policy),
        "trials": trials,
        "success_rate": wins as f64 / trials as f64,
        "min_queries": queries.iter().min(),
        "max_queries": queries.iter().max(),
        "trials_detail": rows,
    });
    Ok((summary, Table::from_rows(&rows)?))
}

/// Runs a configuration that already passed [`ExperimentConfig::validate`].
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    let diagnostics: Vec<Diagnostic> = cfg.validate();
    if !diagnostics.is_empty() {
        return Err(CliError::Validation(diagnostics));
    }
    let start = Instant::now();
    let kind = cfg.experiment.expect("validated");
    let seed = cfg.seed.expect("validated");
    let mc = MonteCarlo::new(cfg.samples.unwrap_or(0), seed);
    let (results, table) = match kind {
        ExperimentKind::Variance => run_variance(cfg, mc)?,
        ExperimentKind::Levy => {
            let n = cfg.n.expect("validated");
            let o = k_copy_observable(
                cfg.observable.as_ref().expect("validated"),
                n,
                cfg.k.expect("validated"),
                seed,
            )?;
            let r = levy_tail_check(&o, cfg.tau.expect("validated"), mc).map_err(lib)?;
            (
                serde_json::to_value(&r).expect("serializes"),
                Table::from_rows(std::slice::from_ref(&r))?,
            )
        }
        ExperimentKind::Learn => run_learn(cfg, mc.exec)?,
        ExperimentKind::Bounds => {
            let (n, beta, tau) = (
                cfg.n.expect("validated"),
                cfg.beta.expect("validated"),
                cfg.tau.expect("validated"),
            );
            let r = match cfg.bound.expect("validated") {
                BoundKind::SelflearnBasis => {
                    selflearn_basis_quantities(n, beta, tau).map_err(lib)?
                }
            };
            let row = BoundRow {
                problem: r.problem.clone(),
                n,
                beta,
                tau,
                triv: r.triv,
                frac: r.frac,
                qnt_lower: r.qnt_lower,
                lower_bound_value: r.lower_bound_value,
            };
            (
                serde_json::to_value(&r).expect("serializes"),
                Table::from_rows(&[row])?,
            )
        }
        ExperimentKind::BpProbe => {
            let model = match cfg.model.as_ref().expect("validated") {
                ModelSpec::HardwareEfficient {
                    n,
                    layers,
                    observable,
                } => ParametrizedModel::hardware_efficient(
                    *n,
                    *layers,
                    Observable::pauli(PauliWeyl::from_label(observable).map_err(lib)?),
                ),
                ModelSpec::SelfLearnBasis { n, target } => {
                    ParametrizedModel::self_learn_basis(*n, *target)
                }
            }
            .map_err(lib)?;
            let r = bp_probe(
                &model,
                cfg.measure.unwrap_or(ParameterMeasure::UniformAngles),
                cfg.tau.expect("validated"),
                cfg.delta.unwrap_or(0.05),
                cfg.audit.unwrap_or(10),
                mc,
            )
            .map_err(lib)?;
            (
                serde_json::to_value(&r).expect("serializes"),
                Table::from_rows(&r.rows())?,
            )
        }
        ExperimentKind::Moments => {
            let (n, t) = (cfg.n.expect("validated"), cfg.t.expect("validated"));
            let e = ensemble(cfg.ensemble.as_ref().expect("validated"), n)?;
            let d = design_deviation(&e, t, mc.samples, seed, mc.exec).map_err(lib)?;
            let row = MomentRow {
                ensemble: e.descriptor(),
                n,
                t,
                deviation: d.value,
                stderr: d.stderr,
                samples: d.samples,
            };
            (
                serde_json::to_value(&row).expect("serializes"),
                Table::from_rows(&[row])?,
            )
        }
    };
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        library_version: env!("CARGO_PKG_VERSION"),
        experiment: kind.name(),
        config: cfg.clone(),
        config_hash: config_hash(cfg),
        results,
        table,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}
