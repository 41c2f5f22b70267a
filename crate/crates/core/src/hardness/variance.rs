//! Variance and concentration of k-copy functionals over state ensembles.

use rand::Rng;
use serde::Serialize;

use crate::ensembles::{haar_state, random_observable, UnitaryEnsemble};
use crate::error::{check_budget, invalid_arg, Result};
use crate::exec::{proportion_estimate, sample_many, variance_estimate, LabRng, MonteCarlo};
use crate::qmath::linalg::{self, ComplexMatrix, C64, DENSE_DIM_LIMIT};
use crate::qmath::pauli::PauliWeyl;
use crate::qmath::states::{Observable, PureState};
use crate::qmath::symmetric::symmetric_dimension;

const NORM_SLACK: f64 = 1e-9;

/// A bounded observable on `(C^N)^{⊗k}`, evaluated on `|ψ⟩^{⊗k}` without
/// forming `ρ^{⊗k}` unless stored densely.
#[derive(Clone, Debug)]
pub enum KCopyObservable {
    /// Dense operator on the full `N^k` space.
    Dense {
        dim: usize,
        copies: usize,
        obs: Observable,
    },
    /// `Σ_j c_j A_{j1} ⊗ … ⊗ A_{jk}`.
    ProductSum {
        dim: usize,
        copies: usize,
        terms: Vec<(f64, Vec<Observable>)>,
    },
    /// `Σ_x |x⟩⟨x|^{⊗k}`.
    Collision { dim: usize, copies: usize },
    /// `|ψ₀⟩⟨ψ₀|^{⊗k} − P_sym / d_sym`.
    SymmetricDeviation { reference: PureState, copies: usize },
    /// `O ⊗ I^{⊗extra}`.
    Lifted {
        inner: Box<KCopyObservable>,
        extra: usize,
    },
}

impl KCopyObservable {
    /// Dense operator whose dimension is `dim^copies`.
    pub fn dense(obs: Observable, dim: usize) -> Result<Self> {
        if dim < 2 {
            return invalid_arg("single-copy dimension must be at least 2");
        }
        let mut copies = 0;
        let mut d = 1usize;
        while d < obs.dim() {
            d *= dim;
            copies += 1;
        }
        if d != obs.dim() || copies == 0 {
            return invalid_arg(format!(
                "observable dimension {} is not a power of {dim}",
                obs.dim()
            ));
        }
        Ok(KCopyObservable::Dense { dim, copies, obs })
    }

    /// Sum of tensor products; every factor acts on one copy.
    pub fn product_sum(terms: Vec<(f64, Vec<Observable>)>) -> Result<Self> {
        let Some((_, first)) = terms.first() else {
            return invalid_arg("product sum needs at least one term");
        };
        let (copies, dim) = (first.len(), first.first().map(|o| o.dim()).unwrap_or(0));
        if copies == 0 || dim == 0 {
            return invalid_arg("product terms need at least one factor");
        }
        for (c, fs) in &terms {
            if !c.is_finite() || fs.len() != copies || fs.iter().any(|f| f.dim() != dim) {
                return invalid_arg("product terms must share the copy count and dimension");
            }
        }
        Ok(KCopyObservable::ProductSum { dim, copies, terms })
    }

    /// `P^{⊗k}` for a Pauli `P`.
    pub fn pauli_power(p: &PauliWeyl, copies: usize) -> Result<Self> {
        Self::product_sum(vec![(1.0, vec![Observable::pauli(*p); copies])])
    }

    /// `|ψ₀⟩⟨ψ₀|^{⊗k}`.
    pub fn projector_power(reference: &PureState, copies: usize) -> Result<Self> {
        Self::product_sum(vec![(1.0, vec![Observable::projector(reference); copies])])
    }

    pub fn lift(self, extra: usize) -> Self {
        if extra == 0 {
            return self;
        }
        match self {
            KCopyObservable::Lifted { inner, extra: e } => KCopyObservable::Lifted {
                inner,
                extra: e + extra,
            },
            other => KCopyObservable::Lifted {
                inner: Box::new(other),
                extra,
            },
        }
    }

    /// Single-copy dimension `N`.
    pub fn dim(&self) -> usize {
        match self {
            KCopyObservable::Dense { dim, .. }
            | KCopyObservable::ProductSum { dim, .. }
            | KCopyObservable::Collision { dim, .. } => *dim,
            KCopyObservable::SymmetricDeviation { reference, .. } => reference.dim(),
            KCopyObservable::Lifted { inner, .. } => inner.dim(),
        }
    }

    pub fn copies(&self) -> usize {
        match self {
            KCopyObservable::Dense { copies, .. }
            | KCopyObservable::ProductSum { copies, .. }
            | KCopyObservable::Collision { copies, .. }
            | KCopyObservable::SymmetricDeviation { copies, .. } => *copies,
            KCopyObservable::Lifted { inner, extra } => inner.copies() + extra,
        }
    }

    /// An upper bound on `‖O‖_op`; exact for every variant but sums.
    pub fn norm_bound(&self) -> f64 {
        match self {
            KCopyObservable::Dense { obs, .. } => obs.op_norm(),
            KCopyObservable::ProductSum { terms, .. } => terms
                .iter()
                .map(|(c, fs)| c.abs() * fs.iter().map(|f| f.op_norm()).product::<f64>())
                .sum(),
            KCopyObservable::Collision { .. } => 1.0,
            KCopyObservable::SymmetricDeviation { reference, copies } => {
                let d = symmetric_dimension(reference.dim(), *copies);
                (1.0 - 1.0 / d).max(1.0 / d)
            }
            KCopyObservable::Lifted { inner, .. } => inner.norm_bound(),
        }
    }

    pub fn descriptor(&self) -> String {
        match self {
            KCopyObservable::Dense { obs, copies, .. } => {
                format!("dense[{}]^k={copies}", obs.tag())
            }
            KCopyObservable::ProductSum { terms, copies, .. } => {
                let tags: Vec<String> = terms
                    .iter()
                    .map(|(c, fs)| {
                        let f: Vec<String> = fs.iter().map(|o| o.tag()).collect();
                        format!("{c:+.4}*{}", f.join("(x)"))
                    })
                    .collect();
                if tags.len() <= 3 {
                    format!("product_sum[{}]", tags.join(" "))
                } else {
                    format!("product_sum[{} terms, k={copies}]", tags.len())
                }
            }
            KCopyObservable::Collision { copies, .. } => format!("collision[k={copies}]"),
            KCopyObservable::SymmetricDeviation { copies, .. } => {
                format!("symmetric_deviation[k={copies}]")
            }
            KCopyObservable::Lifted { inner, extra } => {
                format!("{} (x) I^{extra}", inner.descriptor())
            }
        }
    }

    /// `⟨ψ|^{⊗k} O |ψ⟩^{⊗k}`.
    pub fn value(&self, psi: &PureState) -> Result<f64> {
        linalg::check_dims(self.dim(), psi.dim())?;
        Ok(match self {
            KCopyObservable::Dense { copies, obs, .. } => {
                obs.expectation_vec(psi.power(*copies)?.amplitudes())
            }
            KCopyObservable::ProductSum { terms, .. } => terms
                .iter()
                .map(|(c, fs)| {
                    c * fs
                        .iter()
                        .map(|f| f.expectation_vec(psi.amplitudes()))
                        .product::<f64>()
                })
                .sum(),
            KCopyObservable::Collision { copies, .. } => psi
                .amplitudes()
                .iter()
                .map(|a| a.norm_sqr().powi(*copies as i32))
                .sum(),
            KCopyObservable::SymmetricDeviation { reference, copies } => {
                reference.overlap_sqr(psi).powi(*copies as i32)
                    - 1.0 / symmetric_dimension(reference.dim(), *copies)
            }
            KCopyObservable::Lifted { inner, .. } => inner.value(psi)?,
        })
    }

    /// `(tr O, tr O²)` for single-copy observables small enough to densify.
    pub fn single_copy_traces(&self) -> Option<(f64, f64)> {
        match self {
            KCopyObservable::Dense { copies: 1, obs, .. } => Some((obs.trace(), obs.hs_norm_sqr())),
            KCopyObservable::ProductSum {
                copies: 1,
                dim,
                terms,
            } if *dim <= DENSE_DIM_LIMIT => {
                let mut m = ComplexMatrix::zeros(*dim, *dim);
                for (c, fs) in terms {
                    m += fs[0].matrix().ok()? * C64::new(*c, 0.0);
                }
                let o = Observable::dense(m).ok()?;
                Some((o.trace(), o.hs_norm_sqr()))
            }
            _ => None,
        }
    }
}

/// `(tr[O²]N − tr[O]²) / (N²(N+1))`: the Haar variance of `⟨ψ|O|ψ⟩`.
pub fn haar_single_copy_variance(dim: usize, trace: f64, trace_sq: f64) -> f64 {
    let n = dim as f64;
    (trace_sq * n - trace * trace) / (n * n * (n + 1.0))
}

/// The analytic variance bound matching an ensemble and copy count.
pub fn analytic_bound(ensemble: &UnitaryEnsemble, copies: usize) -> (f64, String) {
    let n = ensemble.dim() as f64;
    let k = copies as f64;
    match (ensemble, copies) {
        (UnitaryEnsemble::Haar { .. }, 1) => (1.0 / (n + 1.0), "2-design: 1/(N+1)".into()),
        (UnitaryEnsemble::Haar { .. }, _) => (8.0 * k * k / n, "2k-design: 8k^2/N".into()),
        (UnitaryEnsemble::CliffordUniform { .. }, 1) => {
            (1.0 / (n + 1.0), "Clifford 3-design: 1/(N+1)".into())
        }
        (UnitaryEnsemble::CliffordUniform { .. }, 2) => {
            (16.0 / n, "two-copy Clifford envelope: 16/N".into())
        }
        (UnitaryEnsemble::Brickwork { .. }, 1) => {
            (1.0 / (n + 1.0), "exact 2-design reference: 1/(N+1)".into())
        }
        (UnitaryEnsemble::Brickwork { .. }, _) => {
            (8.0 * k * k / n, "exact 2k-design reference: 8k^2/N".into())
        }
        _ => (1.0, "trivial: Var <= ||O||^2".into()),
    }
}

/// Outcome of a variance experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarianceReport {
    pub ensemble: String,
    pub observable: String,
    pub copies: usize,
    pub dim: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
    pub analytic_bound: f64,
    pub bound_name: String,
    /// Closed-form value when one is known.
    pub exact: Option<f64>,
    pub pass: bool,
}

impl VarianceReport {
    pub(crate) fn new(
        ensemble: String,
        observable: String,
        copies: usize,
        dim: usize,
        estimate: crate::exec::Estimate,
        (analytic_bound, bound_name): (f64, String),
        exact: Option<f64>,
    ) -> Self {
        let stderr = if estimate.stderr.is_finite() {
            estimate.stderr
        } else {
            0.0
        };
        VarianceReport {
            ensemble,
            observable,
            copies,
            dim,
            estimate: estimate.value,
            stderr,
            samples: estimate.samples,
            analytic_bound,
            bound_name,
            exact,
            pass: estimate.value <= analytic_bound + 3.0 * stderr,
        }
    }

    pub fn upper(&self, sigmas: f64) -> f64 {
        self.estimate + sigmas * self.stderr
    }

    /// Writes the report as a CSV row, preceded by a header when `header`.
    pub fn write_csv<W: std::io::Write>(&self, out: W, header: bool) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(header)
            .from_writer(out);
        w.serialize(self)
            .and_then(|_| w.flush().map_err(csv::Error::from))
            .map_err(|e| crate::Error::InvalidArgument(format!("csv export failed: {e}")))
    }
}

fn check_observable(ensemble: &UnitaryEnsemble, o: &KCopyObservable) -> Result<()> {
    linalg::check_dims(ensemble.dim(), o.dim())?;
    if o.norm_bound() > 1.0 + NORM_SLACK {
        return Err(crate::Error::InvalidObservable(format!(
            "operator norm bound {} exceeds 1",
            o.norm_bound()
        )));
    }
    Ok(())
}

fn weighted_variance(values: &[(f64, f64)]) -> f64 {
    let mean: f64 = values.iter().map(|(w, v)| w * v).sum();
    values
        .iter()
        .map(|(w, v)| w * (v - mean).powi(2))
        .sum::<f64>()
        .max(0.0)
}

/// Samples of `tr[ρ(U)^{⊗k} O]` with `ρ(U) = U|0⟩⟨0|U†`.
pub fn functional_samples(
    ensemble: &UnitaryEnsemble,
    o: &KCopyObservable,
    mc: MonteCarlo,
) -> Result<Vec<f64>> {
    check_observable(ensemble, o)?;
    let input = PureState::basis(ensemble.dim(), 0);
    sample_many(mc.exec, mc.seed, mc.samples, |rng| {
        ensemble
            .sample_state(&input, rng)
            .and_then(|psi| o.value(&psi))
    })
    .into_iter()
    .collect()
}

/// `Var_{U∼μ}[tr[ρ(U)^{⊗k} O]]` compared against the matching analytic bound.
/// Finite ensembles are averaged exactly.
pub fn state_variance(
    ensemble: &UnitaryEnsemble,
    o: &KCopyObservable,
    mc: MonteCarlo,
) -> Result<VarianceReport> {
    check_observable(ensemble, o)?;
    let k = o.copies();
    let dim = ensemble.dim();
    let input = PureState::basis(dim, 0);
    let estimate = match ensemble.enumerate_states(&input) {
        Some(states) => {
            let values = states?
                .iter()
                .map(|(w, psi)| Ok((*w, o.value(psi)?)))
                .collect::<Result<Vec<_>>>()?;
            crate::exec::Estimate {
                value: weighted_variance(&values),
                stderr: 0.0,
                samples: values.len(),
            }
        }
        None => {
            if mc.samples < 3 {
                return invalid_arg("variance estimation needs at least 3 samples");
            }
            variance_estimate(&functional_samples(ensemble, o, mc)?)
        }
    };
    let exact = match (ensemble, o.single_copy_traces()) {
        (UnitaryEnsemble::Haar { .. } | UnitaryEnsemble::CliffordUniform { .. }, Some((t, t2))) => {
            Some(haar_single_copy_variance(dim, t, t2))
        }
        _ => None,
    };
    Ok(VarianceReport::new(
        ensemble.descriptor(),
        o.descriptor(),
        k,
        dim,
        estimate,
        analytic_bound(ensemble, k),
        exact,
    ))
}

fn random_pauli(n: usize, rng: &mut LabRng) -> Result<PauliWeyl> {
    let d = 1u64 << n;
    loop {
        let (x, z) = (rng.random_range(0..d), rng.random_range(0..d));
        if x | z != 0 {
            return PauliWeyl::from_masks(n, x, z, 1);
        }
    }
}

/// `Σ_j c_j P_{j1} ⊗ … ⊗ P_{jk}` with random non-identity Paulis and
/// `Σ|c_j| = 1`.
pub fn random_product_observable(
    n: usize,
    copies: usize,
    terms: usize,
    rng: &mut LabRng,
) -> Result<KCopyObservable> {
    if n == 0 || n > 20 || copies == 0 || terms == 0 {
        return invalid_arg(
            "random product observable needs 1 <= n <= 20 and non-zero copies and terms",
        );
    }
    let raw: Vec<f64> = (0..terms).map(|_| rng.random_range(-1.0..1.0)).collect();
    let total: f64 = raw
        .iter()
        .map(|c| c.abs())
        .sum::<f64>()
        .max(f64::MIN_POSITIVE);
    let terms = raw
        .into_iter()
        .map(|c| {
            let fs = (0..copies)
                .map(|_| random_pauli(n, rng).map(Observable::pauli))
                .collect::<Result<Vec<_>>>()?;
            Ok((c / total, fs))
        })
        .collect::<Result<Vec<_>>>()?;
    KCopyObservable::product_sum(terms)
}

fn random_member(dim: usize, copies: usize, rng: &mut LabRng) -> Result<KCopyObservable> {
    let full = (dim as u128).saturating_pow(copies as u32);
    if full <= 1024 {
        KCopyObservable::dense(random_observable(full as usize, rng), dim)
    } else {
        let n = linalg::qubits_of(dim).ok_or_else(|| {
            crate::Error::InvalidArgument(
                "random observables beyond the dense budget need a qubit dimension".into(),
            )
        })?;
        random_product_observable(n, copies, 8, rng)
    }
}

/// Candidate observables for maximizing the variance at `copies` copies.
///
/// For each `j ≤ copies` the pool holds a random Hermitian operator, a
/// projector onto `ψ₀^{⊗j}`, a symmetric projector deviation, a Pauli power
/// `P^{⊗j}` when `N` is a qubit dimension, and for `j ≥ 2` the collision
/// projector and a random sum of Pauli products; members built for `j < copies` are lifted by identities. The pool
/// at `k` therefore contains the pool at `k − 1`, lifted.
pub fn adversarial_pool(
    ensemble: &UnitaryEnsemble,
    copies: usize,
    seed: u64,
) -> Result<Vec<KCopyObservable>> {
    let dim = ensemble.dim();
    if copies == 0 {
        return invalid_arg("copies must be at least 1");
    }
    check_budget("pool copies", copies as u128, 8)?;
    let mut rng = crate::exec::stream_rng(seed, 0);
    let input = PureState::basis(dim, 0);
    let mut pool = Vec::new();
    for j in 1..=copies {
        let extra = copies - j;
        pool.push(random_member(dim, j, &mut rng)?.lift(extra));
        let psi0 = ensemble.sample_state(&input, &mut rng)?;
        pool.push(KCopyObservable::projector_power(&psi0, j)?.lift(extra));
        let psi1 = ensemble.sample_state(&input, &mut rng)?;
        pool.push(
            KCopyObservable::SymmetricDeviation {
                reference: psi1,
                copies: j,
            }
            .lift(extra),
        );
        if let Some(n) = linalg::qubits_of(dim) {
            pool.push(KCopyObservable::pauli_power(&random_pauli(n, &mut rng)?, j)?.lift(extra));
        }
        if j >= 2 {
            pool.push(KCopyObservable::Collision { dim, copies: j }.lift(extra));
            if let Some(n) = linalg::qubits_of(dim) {
                pool.push(random_product_observable(n, j, 4, &mut rng)?.lift(extra));
            }
        }
    }
    Ok(pool)
}

/// The pool member with the largest variance, with every member's report.
pub fn pool_max_variance(
    ensemble: &UnitaryEnsemble,
    pool: &[KCopyObservable],
    mc: MonteCarlo,
) -> Result<(usize, Vec<VarianceReport>)> {
    let reports = pool
        .iter()
        .map(|o| state_variance(ensemble, o, mc))
        .collect::<Result<Vec<_>>>()?;
    let best = reports
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.estimate.total_cmp(&b.1.estimate))
        .map(|(i, _)| i)
        .ok_or_else(|| crate::Error::InvalidArgument("empty observable pool".into()))?;
    Ok((best, reports))
}

/// A constant envelope `C · 2^{-n}` for variance estimates across `n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingEnvelope {
    /// `(n, estimate · 2^n, stderr · 2^n)`.
    pub scaled: Vec<(usize, f64, f64)>,
    /// `(estimate + 3σ) · 2^{n₀}` at the smallest `n₀`.
    pub fitted_constant: f64,
    /// Smallest constant covering every point: `max (estimate + 3σ) · 2^n`.
    pub constant: f64,
    /// `max_n estimate · 2^n / fitted_constant`.
    pub growth: f64,
    pub cap: f64,
    /// `constant ≤ cap`.
    pub holds: bool,
}

/// Fits `C` at the smallest `n`, reports how far larger `n` move past it, and
/// checks that one constant `C ≤ cap` covers every point.
pub fn scaling_envelope(points: &[(usize, f64, f64)], cap: f64) -> Result<ScalingEnvelope> {
    let mut pts = points.to_vec();
    pts.sort_by_key(|p| p.0);
    let Some(&(n0, e0, s0)) = pts.first() else {
        return invalid_arg("envelope needs at least one point");
    };
    let scale = |n: usize| 2f64.powi(n as i32);
    let fitted_constant = (e0 + 3.0 * s0) * scale(n0);
    let scaled: Vec<(usize, f64, f64)> = pts
        .iter()
        .map(|&(n, e, s)| (n, e * scale(n), s * scale(n)))
        .collect();
    let constant = scaled
        .iter()
        .map(|&(_, e, s)| e + 3.0 * s)
        .fold(0.0, f64::max);
    let growth = scaled.iter().map(|&(_, e, _)| e).fold(0.0, f64::max) / fitted_constant;
    Ok(ScalingEnvelope {
        scaled,
        fitted_constant,
        constant,
        growth,
        cap,
        holds: constant <= cap,
    })
}

/// `exp(−4Nτ² / (9π³(2k)²))`.
pub fn levy_bound(dim: usize, copies: usize, tau: f64) -> f64 {
    let l = 2.0 * copies as f64;
    (-4.0 * dim as f64 * tau * tau / (9.0 * std::f64::consts::PI.powi(3) * l * l)).exp()
}

/// Empirical tail against the concentration bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevyReport {
    pub dim: usize,
    pub copies: usize,
    pub tau: f64,
    pub observable: String,
    pub mean: f64,
    pub tail: f64,
    pub tail_stderr: f64,
    pub samples: usize,
    pub bound: f64,
    pub holds: bool,
}

/// `Pr_{ψ∼Haar}[|tr[ψ^{⊗k}O] − mean| > τ]` against
/// `exp(−4Nτ²/(9π³(2k)²))`, using the Lipschitz constant `2k‖O‖`.
pub fn levy_tail_check(o: &KCopyObservable, tau: f64, mc: MonteCarlo) -> Result<LevyReport> {
    let dim = o.dim();
    let k = o.copies();
    if !(tau > 0.0) {
        return invalid_arg("tau must be positive");
    }
    check_budget("Levy statevector dimension", dim as u128, 1 << 10)?;
    if mc.samples == 0 {
        return invalid_arg("tail estimation needs samples");
    }
    let ensemble = UnitaryEnsemble::Haar { dim };
    let values = functional_samples(&ensemble, o, mc)?;
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let hits = values.iter().filter(|v| (*v - mean).abs() > tau).count();
    let tail = proportion_estimate(hits, values.len());
    let bound = levy_bound(dim, k, tau);
    Ok(LevyReport {
        dim,
        copies: k,
        tau,
        observable: o.descriptor(),
        mean,
        tail: tail.value,
        tail_stderr: tail.stderr,
        samples: values.len(),
        bound,
        holds: tail.value <= bound + 3.0 * tail.stderr,
    })
}

/// `4^{-n} Σ_x ⟨ψ|W_x|ψ⟩²` over all Weyl operators.
pub fn pauli_cost_identity(psi: &PureState) -> Result<f64> {
    let n = linalg::qubits_of(psi.dim())
        .ok_or_else(|| crate::Error::InvalidState("dimension is not a power of two".into()))?;
    check_budget("Pauli enumeration qubits", n as u128, 5)?;
    let total: f64 = PauliWeyl::all(n)
        .map(|w| w.expectation_vec(psi.amplitudes()).powi(2))
        .sum();
    Ok(total / 4f64.powi(n as i32))
}

/// Haar states for tests and experiments that need a fixed reference.
pub fn haar_states(dim: usize, count: usize, seed: u64) -> Vec<PureState> {
    let mut rng = crate::exec::stream_rng(seed, 0);
    (0..count).map(|_| haar_state(dim, &mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::single_qubit_cliffords;
    use crate::exec::stream_rng;

    fn z1(n: usize) -> KCopyObservable {
        let p = PauliWeyl::single(n, 0, 'Z').unwrap();
        KCopyObservable::product_sum(vec![(1.0, vec![Observable::pauli(p)])]).unwrap()
    }

    #[test]
    fn qubit_z_matches_closed_form() {
        let r = state_variance(
            &UnitaryEnsemble::Haar { dim: 2 },
            &z1(1),
            MonteCarlo::new(20_000, 1),
        )
        .unwrap();
        assert!((r.exact.unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!((r.estimate - 1.0 / 3.0).abs() < 5.0 * r.stderr, "{r:?}");
        assert!(r.pass);
    }

    #[test]
    fn identity_has_no_variance() {
        for k in 1..=3 {
            let o = KCopyObservable::dense(Observable::identity(2usize.pow(k)), 2).unwrap();
            let r = state_variance(
                &UnitaryEnsemble::Haar { dim: 2 },
                &o,
                MonteCarlo::new(200, 2),
            )
            .unwrap();
            assert!(r.estimate.abs() < 1e-12);
        }
    }

    #[test]
    fn qubit_cliffords_match_haar_exactly() {
        let e = UnitaryEnsemble::uniform(single_qubit_cliffords()).unwrap();
        let mut rng = stream_rng(3, 0);
        for _ in 0..10 {
            let o = KCopyObservable::dense(random_observable(2, &mut rng), 2).unwrap();
            let (t, t2) = o.single_copy_traces().unwrap();
            let r = state_variance(&e, &o, MonteCarlo::new(0, 0)).unwrap();
            assert!((r.estimate - haar_single_copy_variance(2, t, t2)).abs() < 1e-12);
        }
    }

    #[test]
    fn product_and_dense_values_agree() {
        let mut rng = stream_rng(4, 0);
        let o = random_product_observable(2, 2, 3, &mut rng).unwrap();
        let KCopyObservable::ProductSum { terms, .. } = &o else {
            unreachable!()
        };
        let mut m = ComplexMatrix::zeros(16, 16);
        for (c, fs) in terms {
            m += linalg::tensor(&fs[0].matrix().unwrap(), &fs[1].matrix().unwrap())
                * C64::new(*c, 0.0);
        }
        let dense = KCopyObservable::dense(Observable::dense(m).unwrap(), 4).unwrap();
        let psi = haar_state(4, &mut rng);
        assert!((o.value(&psi).unwrap() - dense.value(&psi).unwrap()).abs() < 1e-12);
        let c = KCopyObservable::Collision { dim: 4, copies: 2 };
        let direct: f64 = psi.amplitudes().iter().map(|a| a.norm_sqr().powi(2)).sum();
        assert!((c.value(&psi).unwrap() - direct).abs() < 1e-15);
    }

    #[test]
    fn pool_grows_by_lifting() {
        let e = UnitaryEnsemble::Haar { dim: 4 };
        let p2 = adversarial_pool(&e, 2, 9).unwrap();
        let p3 = adversarial_pool(&e, 3, 9).unwrap();
        let psi = haar_state(4, &mut stream_rng(5, 0));
        for (a, b) in p2.iter().zip(&p3) {
            assert_eq!(b.copies(), 3);
            assert!((a.value(&psi).unwrap() - b.value(&psi).unwrap()).abs() < 1e-12);
        }
        assert!(p3.iter().all(|o| o.norm_bound() <= 1.0 + 1e-9));
    }

    #[test]
    fn rejects_large_norm() {
        let p = PauliWeyl::single(1, 0, 'Z').unwrap();
        let o = KCopyObservable::product_sum(vec![(2.0, vec![Observable::pauli(p)])]).unwrap();
        assert!(state_variance(
            &UnitaryEnsemble::Haar { dim: 2 },
            &o,
            MonteCarlo::new(10, 0)
        )
        .is_err());
    }

    #[test]
    fn levy_shape() {
        assert!(levy_bound(512, 1, 0.2) < levy_bound(256, 1, 0.2));
        let r = levy_tail_check(&z1(2), 3.0, MonteCarlo::new(100, 1)).unwrap();
        assert_eq!(r.tail, 0.0);
        assert!(r.holds);
    }

    #[test]
    fn pauli_identity_on_basis_and_random() {
        assert!((pauli_cost_identity(&PureState::basis(8, 0)).unwrap() - 0.125).abs() < 1e-15);
        for psi in haar_states(16, 5, 6) {
            assert!((pauli_cost_identity(&psi).unwrap() - 1.0 / 16.0).abs() < 1e-12);
        }
        assert!(pauli_cost_identity(&PureState::basis(64, 0)).is_err());
    }

    #[test]
    fn envelope_flags_growth() {
        let ok = scaling_envelope(&[(3, 0.5, 0.01), (4, 0.25, 0.01)], 16.0).unwrap();
        assert!(ok.holds && ok.growth <= 1.0);
        let grows = scaling_envelope(&[(3, 0.1, 0.001), (4, 0.2, 0.001)], 16.0).unwrap();
        assert!(grows.growth > 3.0 && grows.holds);
        let bad = scaling_envelope(&[(3, 0.1, 0.001), (4, 2.0, 0.001)], 16.0).unwrap();
        assert!(!bad.holds);
    }

    #[test]
    fn csv_row_has_header() {
        let r = state_variance(
            &UnitaryEnsemble::Haar { dim: 2 },
            &z1(1),
            MonteCarlo::new(100, 1),
        )
        .unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("ensemble,observable,copies,dim,estimate"));
        assert_eq!(text.lines().count(), 2);
    }
}
