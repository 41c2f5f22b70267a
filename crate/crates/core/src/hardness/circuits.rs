//! Parametrized circuits, parameter-shift gradients and barren-plateau probes.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_budget, invalid_arg, Error, Result};
use crate::exec::{
    mean_estimate, proportion_estimate, sample_many, variance_estimate, Estimate, LabRng,
    MonteCarlo,
};
use crate::qmath::linalg::{self, ComplexMatrix, C64};
use crate::qmath::pauli::PauliWeyl;
use crate::qmath::states::{Observable, PureState};

/// Largest register a parametrized model may act on.
pub const MAX_MODEL_QUBITS: usize = 14;

/// A circuit element.
#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    /// `exp(−iθ_param P/2)`.
    Rotation {
        pauli: PauliWeyl,
        param: usize,
    },
    /// `exp(−i·scale·x_feature·P/2)`.
    Encode {
        pauli: PauliWeyl,
        feature: usize,
        scale: f64,
    },
    Cz(usize, usize),
    /// A parameter-free unitary on the listed qubits.
    Fixed {
        qubits: Vec<usize>,
        unitary: ComplexMatrix,
    },
}

/// How the final state is scored.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelLoss {
    /// `½(1 + E_x⟨O⟩)`.
    Expectation(Observable),
    /// `1 − E_x|⟨t|ψ⟩|²`.
    Infidelity(PureState),
}

/// A circuit family `ϑ ↦ l(ϑ) ∈ [0, 1]` averaged over a finite data set.
#[derive(Clone, Debug)]
pub struct ParametrizedModel {
    kind: String,
    n: usize,
    params: usize,
    gates: Vec<Gate>,
    data: Vec<Vec<f64>>,
    input: PureState,
    loss: ModelLoss,
}

fn rotate(v: &mut [C64], p: &PauliWeyl, angle: f64) {
    let pv = p.apply(v);
    let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
    let m = C64::new(0.0, -s);
    for (a, b) in v.iter_mut().zip(pv) {
        *a = *a * c + m * b;
    }
}

fn cz(v: &mut [C64], n: usize, a: usize, b: usize) {
    let mask = (1usize << (n - 1 - a)) | (1usize << (n - 1 - b));
    for (i, z) in v.iter_mut().enumerate() {
        if i & mask == mask {
            *z = -*z;
        }
    }
}

fn single(n: usize, q: usize, letter: char) -> PauliWeyl {
    PauliWeyl::single(n, q, letter).expect("qubit index in range")
}

fn variational_layer(n: usize, next: &mut usize, gates: &mut Vec<Gate>) {
    for letter in ['Y', 'Z'] {
        for q in 0..n {
            gates.push(Gate::Rotation {
                pauli: single(n, q, letter),
                param: *next,
            });
            *next += 1;
        }
    }
    for q in 0..n.saturating_sub(1) {
        gates.push(Gate::Cz(q, q + 1));
    }
}

fn encoding_layer(n: usize, features: usize, gates: &mut Vec<Gate>) {
    for q in 0..n {
        gates.push(Gate::Encode {
            pauli: single(n, q, 'X'),
            feature: q % features.max(1),
            scale: 1.0,
        });
    }
}

impl ParametrizedModel {
    pub fn new(
        kind: impl Into<String>,
        n: usize,
        params: usize,
        gates: Vec<Gate>,
        data: Vec<Vec<f64>>,
        input: PureState,
        loss: ModelLoss,
    ) -> Result<Self> {
        if n == 0 || n > MAX_MODEL_QUBITS {
            return invalid_arg(format!("models need 1 <= n <= {MAX_MODEL_QUBITS}"));
        }
        let dim = 1usize << n;
        linalg::check_dims(dim, input.dim())?;
        match &loss {
            ModelLoss::Expectation(o) => {
                linalg::check_dims(dim, o.dim())?;
                o.check_query_norm()?;
            }
            ModelLoss::Infidelity(t) => linalg::check_dims(dim, t.dim())?,
        }
        let features = data.first().map(|x| x.len()).unwrap_or(0);
        if data
            .iter()
            .any(|x| x.len() != features || x.iter().any(|v| !v.is_finite()))
        {
            return invalid_arg("data points must be finite and share one length");
        }
        for g in &gates {
            let ok = match g {
                Gate::Rotation { pauli, param } => pauli.n() == n && *param < params,
                Gate::Encode {
                    pauli,
                    feature,
                    scale,
                } => pauli.n() == n && *feature < features && scale.is_finite(),
                Gate::Cz(a, b) => a != b && *a < n && *b < n,
                Gate::Fixed { qubits, unitary } => {
                    qubits.iter().all(|q| *q < n)
                        && unitary.nrows() == 1 << qubits.len()
                        && linalg::is_unitary(unitary, 1e-9)
                }
            };
            if !ok {
                return invalid_arg(format!("gate {g:?} does not fit the model"));
            }
        }
        Ok(ParametrizedModel {
            kind: kind.into(),
            n,
            params,
            gates,
            data,
            input,
            loss,
        })
    }

    /// `l(θ) = (1 + cos θ)/2`: one `R_Y` on `|0⟩` scored by `Z`.
    pub fn single_qubit_ry() -> Self {
        let z = Observable::pauli(single(1, 0, 'Z'));
        let gates = vec![Gate::Rotation {
            pauli: single(1, 0, 'Y'),
            param: 0,
        }];
        Self::new(
            "single_qubit_ry",
            1,
            1,
            gates,
            vec![],
            PureState::basis(2, 0),
            ModelLoss::Expectation(z),
        )
        .expect("valid model")
    }

    /// `layers` blocks of `R_Y`, `R_Z` on every qubit followed by a `CZ` chain.
    pub fn hardware_efficient(n: usize, layers: usize, observable: Observable) -> Result<Self> {
        let mut gates = Vec::new();
        let mut next = 0;
        for _ in 0..layers {
            variational_layer(n, &mut next, &mut gates);
        }
        Self::new(
            format!("hardware_efficient(n={n},layers={layers})"),
            n,
            next,
            gates,
            vec![],
            PureState::basis(1 << n, 0),
            ModelLoss::Expectation(observable),
        )
    }

    /// Product `R_Y` ansatz scored by the infidelity with the basis state `target`.
    pub fn self_learn_basis(n: usize, target: usize) -> Result<Self> {
        if target >> n != 0 {
            return invalid_arg("target basis index out of range");
        }
        let gates = (0..n)
            .map(|q| Gate::Rotation {
                pauli: single(n, q, 'Y'),
                param: q,
            })
            .collect();
        let dim = 1usize << n;
        Self::new(
            format!("self_learn_basis(n={n})"),
            n,
            n,
            gates,
            vec![],
            PureState::basis(dim, 0),
            ModelLoss::Infidelity(PureState::basis(dim, target)),
        )
    }

    /// Hardware-efficient ansatz scored by `½(1 + ⟨P⟩)`.
    pub fn global_pauli_cost(pauli: PauliWeyl, layers: usize) -> Result<Self> {
        let n = pauli.n();
        let label = pauli.label();
        let mut m = Self::hardware_efficient(n, layers, Observable::pauli(pauli))?;
        m.kind = format!("global_pauli_cost[{label}](layers={layers})");
        Ok(m)
    }

    /// One `R_X(x)` encoding layer followed by `layers` variational blocks:
    /// `f_ϑ(x) = tr[ρ_x U(ϑ)† O U(ϑ)]`.
    pub fn linear(
        n: usize,
        layers: usize,
        data: Vec<Vec<f64>>,
        observable: Observable,
    ) -> Result<Self> {
        let features = data.first().map(|x| x.len()).unwrap_or(0);
        if features == 0 {
            return invalid_arg("linear models need data with at least one feature");
        }
        let mut gates = Vec::new();
        encoding_layer(n, features, &mut gates);
        let mut next = 0;
        for _ in 0..layers {
            variational_layer(n, &mut next, &mut gates);
        }
        Self::new(
            format!("linear(n={n},layers={layers})"),
            n,
            next,
            gates,
            data,
            PureState::basis(1 << n, 0),
            ModelLoss::Expectation(observable),
        )
    }

    /// Alternating encoding and variational layers, `depth` of each.
    pub fn data_reupload(
        n: usize,
        depth: usize,
        data: Vec<Vec<f64>>,
        observable: Observable,
    ) -> Result<Self> {
        let features = data.first().map(|x| x.len()).unwrap_or(0);
        if features == 0 {
            return invalid_arg("data re-uploading models need data with at least one feature");
        }
        let mut gates = Vec::new();
        let mut next = 0;
        for _ in 0..depth {
            encoding_layer(n, features, &mut gates);
            variational_layer(n, &mut next, &mut gates);
        }
        Self::new(
            format!("data_reupload(n={n},depth={depth})"),
            n,
            next,
            gates,
            data,
            PureState::basis(1 << n, 0),
            ModelLoss::Expectation(observable),
        )
    }

    /// Energy loss `½(1 + ⟨H⟩/c)` for a Hamiltonian with `‖H‖ ≤ c`.
    pub fn vqe(n: usize, layers: usize, hamiltonian: &Observable, c: f64) -> Result<Self> {
        if !(c > 0.0) || hamiltonian.op_norm() > c * (1.0 + 1e-9) {
            return invalid_arg("VQE scaling c must be positive and bound the Hamiltonian norm");
        }
        let scaled = Observable::dense(hamiltonian.matrix()? / C64::new(c, 0.0))?;
        let mut m = Self::hardware_efficient(n, layers, scaled)?;
        m.kind = format!("vqe(n={n},layers={layers},c={c})");
        Ok(m)
    }

    pub fn kind(&self) -> &str {
        &self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_params(&self) -> usize {
        self.params
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Output state for parameters `theta` and data point `x`.
    pub fn state(&self, theta: &[f64], x: &[f64]) -> Result<PureState> {
        if theta.len() != self.params {
            return Err(Error::DimensionMismatch {
                expected: self.params,
                got: theta.len(),
            });
        }
        let mut v = self.input.amplitudes().to_vec();
        for g in &self.gates {
            match g {
                Gate::Rotation { pauli, param } => rotate(&mut v, pauli, theta[*param]),
                Gate::Encode {
                    pauli,
                    feature,
                    scale,
                } => {
                    let value = x.get(*feature).ok_or_else(|| {
                        Error::InvalidArgument(format!("data point lacks feature {feature}"))
                    })?;
                    rotate(&mut v, pauli, scale * value)
                }
                Gate::Cz(a, b) => cz(&mut v, self.n, *a, *b),
                Gate::Fixed { qubits, unitary } => {
                    linalg::apply_gate(&mut v, self.n, unitary, qubits)
                }
            }
        }
        PureState::new(v)
    }

    /// Per-point model value: `⟨O⟩` or the fidelity with the target.
    pub fn output(&self, theta: &[f64], x: &[f64]) -> Result<f64> {
        let psi = self.state(theta, x)?;
        Ok(match &self.loss {
            ModelLoss::Expectation(o) => o.expectation_vec(psi.amplitudes()),
            ModelLoss::Infidelity(t) => t.overlap_sqr(&psi),
        })
    }

    pub fn loss(&self, theta: &[f64]) -> Result<f64> {
        let empty: [Vec<f64>; 1] = [vec![]];
        let points: &[Vec<f64>] = if self.data.is_empty() {
            &empty
        } else {
            &self.data
        };
        let mut total = 0.0;
        for x in points {
            total += self.output(theta, x)?;
        }
        let mean = total / points.len() as f64;
        Ok(match &self.loss {
            ModelLoss::Expectation(_) => 0.5 * (1.0 + mean),
            ModelLoss::Infidelity(_) => 1.0 - mean,
        })
    }

    fn check_shiftable(&self, i: usize) -> Result<()> {
        if i >= self.params {
            return invalid_arg(format!("parameter {i} out of range"));
        }
        let uses = self
            .gates
            .iter()
            .filter(|g| matches!(g, Gate::Rotation { param, .. } if *param == i))
            .count();
        if uses > 1 {
            return invalid_arg(format!(
                "parameter {i} drives {uses} gates; the two-term shift rule needs at most one"
            ));
        }
        Ok(())
    }
}

/// Parameters, gradient and loss at one draw.
type GradientDraw = (Vec<f64>, Vec<f64>, f64);

fn shifted(theta: &[f64], i: usize, delta: f64) -> Vec<f64> {
    let mut t = theta.to_vec();
    t[i] += delta;
    t
}

/// `∂_i l = (l(ϑ + π/2 e_i) − l(ϑ − π/2 e_i)) / 2`.
pub fn parameter_shift_gradient(model: &ParametrizedModel, theta: &[f64], i: usize) -> Result<f64> {
    model.check_shiftable(i)?;
    Ok(
        (model.loss(&shifted(theta, i, FRAC_PI_2))?
            - model.loss(&shifted(theta, i, -FRAC_PI_2))?)
            / 2.0,
    )
}

/// Centered finite difference with step `h`.
pub fn finite_difference_gradient(
    model: &ParametrizedModel,
    theta: &[f64],
    i: usize,
    h: f64,
) -> Result<f64> {
    if i >= model.num_params() || !(h > 0.0) {
        return invalid_arg("finite differences need a valid parameter and a positive step");
    }
    Ok((model.loss(&shifted(theta, i, h))? - model.loss(&shifted(theta, i, -h))?) / (2.0 * h))
}

/// Full gradient by the shift rule.
pub fn gradient(model: &ParametrizedModel, theta: &[f64]) -> Result<Vec<f64>> {
    (0..model.num_params())
        .map(|i| parameter_shift_gradient(model, theta, i))
        .collect()
}

/// Distribution of initial parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParameterMeasure {
    /// Every angle uniform on `[0, 2π)`.
    UniformAngles,
    /// Independent `N(0, σ²)` angles.
    Gaussian { sigma: f64 },
}

impl ParameterMeasure {
    pub fn sample(&self, params: usize, rng: &mut LabRng) -> Vec<f64> {
        match self {
            ParameterMeasure::UniformAngles => (0..params)
                .map(|_| rng.random_range(0.0..2.0 * PI))
                .collect(),
            ParameterMeasure::Gaussian { sigma } => (0..params)
                .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
                .collect(),
        }
    }

    pub fn descriptor(&self) -> String {
        match self {
            ParameterMeasure::UniformAngles => "uniform[0,2pi)".into(),
            ParameterMeasure::Gaussian { sigma } => format!("gaussian(sigma={sigma})"),
        }
    }
}

/// Gradient and loss concentration of a model under a parameter measure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BPReport {
    pub model: String,
    pub measure: String,
    pub n: usize,
    pub tau: f64,
    pub delta: f64,
    pub samples: usize,
    pub gradient_variance: Vec<Estimate>,
    /// `Pr_ν[|∂_i l| > τ]`.
    pub gradient_tail: Vec<Estimate>,
    pub loss_mean: Estimate,
    pub loss_variance: Estimate,
    /// `Pr_ν[|l − E l| > τ]`.
    pub loss_tail: Estimate,
    /// Every gradient tail is at most `δ`.
    pub barren_plateau: bool,
    /// The loss tail is at most `δ`.
    pub narrow_gorge: bool,
    pub audit_points: usize,
    /// Largest `|shift rule − finite difference|` over the audit points.
    pub audit_max_error: f64,
}

/// One CSV row per gradient component.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BPRow {
    pub model: String,
    pub measure: String,
    pub n: usize,
    pub component: usize,
    pub gradient_variance: f64,
    pub gradient_variance_stderr: f64,
    pub gradient_tail: f64,
    pub loss_variance: f64,
    pub barren_plateau: bool,
}

impl BPReport {
    pub fn rows(&self) -> Vec<BPRow> {
        self.gradient_variance
            .iter()
            .zip(&self.gradient_tail)
            .enumerate()
            .map(|(i, (v, t))| BPRow {
                model: self.model.clone(),
                measure: self.measure.clone(),
                n: self.n,
                component: i,
                gradient_variance: v.value,
                gradient_variance_stderr: v.stderr,
                gradient_tail: t.value,
                loss_variance: self.loss_variance.value,
                barren_plateau: self.barren_plateau,
            })
            .collect()
    }

    /// Mean of the per-component gradient variances.
    pub fn mean_gradient_variance(&self) -> f64 {
        let k = self.gradient_variance.len().max(1) as f64;
        self.gradient_variance.iter().map(|e| e.value).sum::<f64>() / k
    }
}

/// Finite-difference step used by the gradient audit.
pub const AUDIT_STEP: f64 = 1e-5;

/// Samples `ϑ ∼ ν`, evaluates every gradient component by the shift rule and
/// the loss, and audits the shift rule against finite differences on the
/// first `audit` samples.
pub fn bp_probe(
    model: &ParametrizedModel,
    measure: ParameterMeasure,
    tau: f64,
    delta: f64,
    audit: usize,
    mc: MonteCarlo,
) -> Result<BPReport> {
    if !(tau > 0.0) || !(0.0..=1.0).contains(&delta) {
        return invalid_arg("bp probe needs tau > 0 and delta in [0, 1]");
    }
    if mc.samples < 3 {
        return invalid_arg("bp probe needs at least 3 samples");
    }
    check_budget(
        "loss evaluations",
        (mc.samples as u128) * (2 * model.num_params() as u128 + 1),
        1 << 26,
    )?;
    for i in 0..model.num_params() {
        model.check_shiftable(i)?;
    }
    let draws: Vec<Result<GradientDraw>> = sample_many(mc.exec, mc.seed, mc.samples, |rng| {
        let theta = measure.sample(model.num_params(), rng);
        let g = gradient(model, &theta)?;
        let l = model.loss(&theta)?;
        Ok((theta, g, l))
    });
    let draws = draws.into_iter().collect::<Result<Vec<_>>>()?;
    let p = model.num_params();
    let mut gradient_variance = Vec::with_capacity(p);
    let mut gradient_tail = Vec::with_capacity(p);
    for i in 0..p {
        let gi: Vec<f64> = draws.iter().map(|d| d.1[i]).collect();
        gradient_variance.push(variance_estimate(&gi));
        gradient_tail.push(proportion_estimate(
            gi.iter().filter(|g| g.abs() > tau).count(),
            gi.len(),
        ));
    }
    let losses: Vec<f64> = draws.iter().map(|d| d.2).collect();
    let loss_mean = mean_estimate(&losses);
    let loss_tail = proportion_estimate(
        losses
            .iter()
            .filter(|l| (*l - loss_mean.value).abs() > tau)
            .count(),
        losses.len(),
    );
    let mut audit_max_error = 0.0f64;
    let audit_points = audit.min(draws.len());
    for (theta, g, _) in draws.iter().take(audit_points) {
        for (i, gi) in g.iter().enumerate() {
            let fd = finite_difference_gradient(model, theta, i, AUDIT_STEP)?;
            audit_max_error = audit_max_error.max((fd - gi).abs());
        }
    }
    Ok(BPReport {
        model: model.kind().to_string(),
        measure: measure.descriptor(),
        n: model.n(),
        tau,
        delta,
        samples: draws.len(),
        barren_plateau: gradient_tail.iter().all(|t| t.value <= delta),
        narrow_gorge: loss_tail.value <= delta,
        gradient_variance,
        gradient_tail,
        loss_mean,
        loss_variance: variance_estimate(&losses),
        loss_tail,
        audit_points,
        audit_max_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::stream_rng;

    #[test]
    fn ry_shift_rule_is_exact() {
        let m = ParametrizedModel::single_qubit_ry();
        for k in 0..10 {
            let t = 0.37 * k as f64 - 1.0;
            assert!((m.loss(&[t]).unwrap() - (1.0 + t.cos()) / 2.0).abs() < 1e-14);
            let g = parameter_shift_gradient(&m, &[t], 0).unwrap();
            assert!((g + t.sin() / 2.0).abs() < 1e-14);
            let fd = finite_difference_gradient(&m, &[t], 0, 1e-5).unwrap();
            assert!((g - fd).abs() < 1e-8);
        }
    }

    #[test]
    fn unused_parameter_has_zero_gradient() {
        let m = ParametrizedModel::new(
            "idle",
            1,
            2,
            vec![Gate::Rotation {
                pauli: single(1, 0, 'Y'),
                param: 0,
            }],
            vec![],
            PureState::basis(2, 0),
            ModelLoss::Expectation(Observable::pauli(single(1, 0, 'Z'))),
        )
        .unwrap();
        assert_eq!(parameter_shift_gradient(&m, &[0.4, 1.3], 1).unwrap(), 0.0);
    }

    #[test]
    fn shared_parameter_is_not_shiftable() {
        let y = single(1, 0, 'Y');
        let gates = vec![
            Gate::Rotation { pauli: y, param: 0 },
            Gate::Rotation { pauli: y, param: 0 },
        ];
        let m = ParametrizedModel::new(
            "shared",
            1,
            1,
            gates,
            vec![],
            PureState::basis(2, 0),
            ModelLoss::Expectation(Observable::pauli(single(1, 0, 'Z'))),
        )
        .unwrap();
        assert!(parameter_shift_gradient(&m, &[0.1], 0).is_err());
    }

    #[test]
    fn self_learn_basis_reaches_target() {
        let m = ParametrizedModel::self_learn_basis(3, 0b101).unwrap();
        assert!(m.loss(&[PI, 0.0, PI]).unwrap().abs() < 1e-12);
        assert!((m.loss(&[0.0; 3]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn models_agree_with_finite_differences() {
        let mut rng = stream_rng(7, 0);
        let z = Observable::pauli(PauliWeyl::from_label("ZZZ").unwrap());
        let data = vec![vec![0.3, -1.2, 0.8], vec![2.0, 0.1, -0.4]];
        let models = vec![
            ParametrizedModel::hardware_efficient(3, 2, z.clone()).unwrap(),
            ParametrizedModel::linear(3, 2, data.clone(), z.clone()).unwrap(),
            ParametrizedModel::data_reupload(3, 2, data, z).unwrap(),
        ];
        for m in &models {
            let theta = ParameterMeasure::UniformAngles.sample(m.num_params(), &mut rng);
            for i in 0..m.num_params() {
                let g = parameter_shift_gradient(m, &theta, i).unwrap();
                let fd = finite_difference_gradient(m, &theta, i, AUDIT_STEP).unwrap();
                assert!((g - fd).abs() < 1e-6, "{} component {i}", m.kind());
            }
        }
    }

    #[test]
    fn losses_stay_in_unit_interval() {
        let h = Observable::dense(
            Observable::pauli(PauliWeyl::from_label("ZI").unwrap())
                .matrix()
                .unwrap()
                + Observable::pauli(PauliWeyl::from_label("XX").unwrap())
                    .matrix()
                    .unwrap(),
        )
        .unwrap();
        let m = ParametrizedModel::vqe(2, 2, &h, 2.0).unwrap();
        let mut rng = stream_rng(8, 0);
        for _ in 0..20 {
            let theta = ParameterMeasure::UniformAngles.sample(m.num_params(), &mut rng);
            let l = m.loss(&theta).unwrap();
            assert!((0.0..=1.0).contains(&l));
        }
    }

    #[test]
    fn probe_reports_audit_and_flags() {
        let m = ParametrizedModel::hardware_efficient(
            2,
            2,
            Observable::pauli(PauliWeyl::from_label("ZZ").unwrap()),
        )
        .unwrap();
        let r = bp_probe(
            &m,
            ParameterMeasure::UniformAngles,
            0.1,
            0.05,
            5,
            MonteCarlo::new(200, 3),
        )
        .unwrap();
        assert_eq!(r.gradient_variance.len(), m.num_params());
        assert!(r.audit_max_error < 1e-4);
        assert!(!r.barren_plateau);
        assert_eq!(r.rows().len(), m.num_params());
    }
}
