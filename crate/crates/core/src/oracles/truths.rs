use std::fmt::Debug;
use std::sync::Arc;

use super::{EvalOracle, GroundTruth, NoisePolicy};
use crate::error::{check_budget, invalid_arg, Error, Result};
use crate::qmath::linalg::{self, ComplexMatrix, C64, DENSE_DIM_LIMIT};
use crate::qmath::states::{expectation, DensityMatrix, Observable, PureState};

const NORM_SLACK: f64 = 1e-9;

fn check_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() || p.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return invalid_arg("distribution entries must be finite and non-negative");
    }
    if (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return invalid_arg("distribution must sum to 1");
    }
    Ok(())
}

fn f64_bytes(xs: &[f64]) -> Vec<u8> {
    xs.iter().flat_map(|x| x.to_le_bytes()).collect()
}

fn matrix_bytes(m: &ComplexMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 * m.len() + 8);
    out.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    for z in m.iter() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

/// A hidden quantum state, kept as a vector when pure.
#[derive(Clone, Debug, PartialEq)]
pub enum QuantumState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl From<PureState> for QuantumState {
    fn from(p: PureState) -> Self {
        QuantumState::Pure(p)
    }
}

impl From<DensityMatrix> for QuantumState {
    fn from(r: DensityMatrix) -> Self {
        QuantumState::Mixed(r)
    }
}

impl QuantumState {
    pub fn dim(&self) -> usize {
        match self {
            QuantumState::Pure(p) => p.dim(),
            QuantumState::Mixed(r) => r.dim(),
        }
    }

    /// `tr[ρ O]`.
    pub fn expectation(&self, o: &Observable) -> Result<f64> {
        match self {
            QuantumState::Pure(p) => o.expectation_pure(p),
            QuantumState::Mixed(r) => expectation(r, o),
        }
    }

    /// `ρ^{⊗k}`.
    pub fn power(&self, k: usize) -> Result<QuantumState> {
        let dim = (self.dim() as u128)
            .checked_pow(k as u32)
            .unwrap_or(u128::MAX);
        match self {
            QuantumState::Pure(p) => Ok(QuantumState::Pure(p.power(k)?)),
            QuantumState::Mixed(r) => {
                check_budget("multi-copy density dimension", dim, DENSE_DIM_LIMIT as u128)?;
                Ok(QuantumState::Mixed(r.power(k)?))
            }
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            QuantumState::Pure(p) => p.to_density(),
            QuantumState::Mixed(r) => r.clone(),
        }
    }

    /// `tr[Q ρ]` for an arbitrary square matrix `Q`.
    pub fn trace_with(&self, q: &ComplexMatrix) -> Result<C64> {
        linalg::check_dims(self.dim(), linalg::check_square(q)?)?;
        Ok(match self {
            QuantumState::Pure(p) => {
                let v = p.amplitudes();
                linalg::inner(v, &linalg::mat_vec(q, v))
            }
            QuantumState::Mixed(r) => linalg::trace_product(q, r.matrix()),
        })
    }
}

/// Finite weighted family of states.
#[derive(Clone, Debug, PartialEq)]
pub struct StateMeasure {
    weights: Vec<f64>,
    states: Vec<QuantumState>,
}

impl StateMeasure {
    pub fn new(weights: Vec<f64>, states: Vec<QuantumState>) -> Result<Self> {
        if weights.len() != states.len() {
            return invalid_arg("state measure needs one weight per state");
        }
        check_distribution(&weights)?;
        let dim = states[0].dim();
        for s in &states {
            linalg::check_dims(dim, s.dim())?;
        }
        Ok(StateMeasure { weights, states })
    }

    pub fn uniform(states: Vec<QuantumState>) -> Result<Self> {
        let w = 1.0 / states.len().max(1) as f64;
        Self::new(vec![w; states.len()], states)
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &QuantumState)> {
        self.weights.iter().copied().zip(&self.states)
    }
}

/// `φ ↦ E_{i∼P}[φ(i)]` for `φ: [N] → [−1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StatTruth {
    p: Vec<f64>,
}

impl StatTruth {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        check_distribution(&p)?;
        Ok(StatTruth { p })
    }

    pub fn distribution(&self) -> &[f64] {
        &self.p
    }
}

impl GroundTruth for StatTruth {
    type Query = [f64];
    type Value = f64;

    fn evaluate(&self, phi: &[f64]) -> Result<f64> {
        if phi.len() != self.p.len() {
            return Err(Error::DimensionMismatch {
                expected: self.p.len(),
                got: phi.len(),
            });
        }
        if phi.iter().any(|x| !(x.abs() <= 1.0 + NORM_SLACK)) {
            return Err(Error::InvalidQuery(
                "statistical query leaves [-1, 1]".into(),
            ));
        }
        Ok(self.p.iter().zip(phi).map(|(p, f)| p * f).sum())
    }

    fn tag(&self, phi: &[f64]) -> String {
        format!("stat[{}]", phi.len())
    }

    fn digest_bytes(&self, phi: &[f64]) -> Vec<u8> {
        f64_bytes(phi)
    }
}

/// `O ↦ tr[ρ^{⊗k} O]`.
#[derive(Clone, Debug, PartialEq)]
pub struct QStatTruth {
    state: QuantumState,
    k: usize,
}

impl QStatTruth {
    pub fn new(state: impl Into<QuantumState>, k: usize) -> Result<Self> {
        if k == 0 {
            return invalid_arg("copy number must be positive");
        }
        let state = state.into();
        let state = if k == 1 { state } else { state.power(k)? };
        Ok(QStatTruth { state, k })
    }

    pub fn copies(&self) -> usize {
        self.k
    }

    /// Dimension of the queried system (`N^k`).
    pub fn dim(&self) -> usize {
        self.state.dim()
    }
}

impl GroundTruth for QStatTruth {
    type Query = Observable;
    type Value = f64;

    fn evaluate(&self, o: &Observable) -> Result<f64> {
        linalg::check_dims(self.state.dim(), o.dim())?;
        o.check_query_norm()?;
        self.state.expectation(o)
    }

    fn tag(&self, o: &Observable) -> String {
        if self.k == 1 {
            format!("qstat:{}", o.tag())
        } else {
            format!("{}qstat:{}", self.k, o.tag())
        }
    }

    fn digest_bytes(&self, o: &Observable) -> Vec<u8> {
        o.digest_bytes()
    }
}

/// `g ↦ E_{i∼λ}[g(i) f(i)]` for `‖g‖_{L²(λ)} ≤ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CsqTruth {
    f: Vec<f64>,
    lambda: Vec<f64>,
}

impl CsqTruth {
    pub fn new(f: Vec<f64>, lambda: Vec<f64>) -> Result<Self> {
        check_distribution(&lambda)?;
        if f.len() != lambda.len() || f.iter().any(|x| !x.is_finite()) {
            return invalid_arg("functional must be finite with one entry per point");
        }
        Ok(CsqTruth { f, lambda })
    }

    /// `‖g‖_{L²(λ)}`.
    pub fn norm(&self, g: &[f64]) -> f64 {
        self.lambda
            .iter()
            .zip(g)
            .map(|(l, x)| l * x * x)
            .sum::<f64>()
            .sqrt()
    }

    pub fn functional(&self) -> &[f64] {
        &self.f
    }
}

impl GroundTruth for CsqTruth {
    type Query = [f64];
    type Value = f64;

    fn evaluate(&self, g: &[f64]) -> Result<f64> {
        if g.len() != self.f.len() {
            return Err(Error::DimensionMismatch {
                expected: self.f.len(),
                got: g.len(),
            });
        }
        let norm = self.norm(g);
        if !(norm <= 1.0 + NORM_SLACK) {
            return Err(Error::InvalidQuery(format!(
                "query L2 norm {norm} exceeds 1"
            )));
        }
        Ok(self
            .lambda
            .iter()
            .zip(g)
            .zip(&self.f)
            .map(|((l, g), f)| l * g * f)
            .sum())
    }

    fn tag(&self, g: &[f64]) -> String {
        format!("csq[{}]", g.len())
    }

    fn digest_bytes(&self, g: &[f64]) -> Vec<u8> {
        f64_bytes(g)
    }
}

/// `B ↦ tr[A† ρ B]` for `‖B‖_{L²(ρ)} = √tr[B† ρ B] ≤ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct McsqTruth {
    a_dag_rho: ComplexMatrix,
    rho: ComplexMatrix,
}

impl McsqTruth {
    pub fn new(a: &ComplexMatrix, rho: &DensityMatrix) -> Result<Self> {
        linalg::check_dims(rho.dim(), linalg::check_square(a)?)?;
        linalg::check_finite(a)?;
        Ok(McsqTruth {
            a_dag_rho: a.adjoint() * rho.matrix(),
            rho: rho.matrix().clone(),
        })
    }

    /// `‖B‖_{L²(ρ)}`.
    pub fn norm(&self, b: &ComplexMatrix) -> f64 {
        linalg::trace_product(&b.adjoint(), &(&self.rho * b))
            .re
            .max(0.0)
            .sqrt()
    }
}

impl GroundTruth for McsqTruth {
    type Query = ComplexMatrix;
    type Value = C64;

    fn evaluate(&self, b: &ComplexMatrix) -> Result<C64> {
        linalg::check_dims(self.rho.nrows(), linalg::check_square(b)?)?;
        linalg::check_finite(b)?;
        let norm = self.norm(b);
        if !(norm <= 1.0 + NORM_SLACK) {
            return Err(Error::InvalidQuery(format!(
                "query L2(rho) norm {norm} exceeds 1"
            )));
        }
        Ok(linalg::trace_product(&self.a_dag_rho, b))
    }

    fn tag(&self, b: &ComplexMatrix) -> String {
        format!("mcsq[{}]", b.nrows())
    }

    fn digest_bytes(&self, b: &ComplexMatrix) -> Vec<u8> {
        matrix_bytes(b)
    }
}

/// `O ↦ E_{ρ∼λ}[tr[ρO] tr[ρM]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct QcsqTruth {
    lambda: StateMeasure,
    weighted_m: Vec<f64>,
}

impl QcsqTruth {
    pub fn new(m: &Observable, lambda: StateMeasure) -> Result<Self> {
        linalg::check_dims(lambda.dim(), m.dim())?;
        let weighted_m = lambda
            .iter()
            .map(|(w, s)| Ok(w * s.expectation(m)?))
            .collect::<Result<_>>()?;
        Ok(QcsqTruth { lambda, weighted_m })
    }
}

impl GroundTruth for QcsqTruth {
    type Query = Observable;
    type Value = f64;

    fn evaluate(&self, o: &Observable) -> Result<f64> {
        linalg::check_dims(self.lambda.dim(), o.dim())?;
        o.check_query_norm()?;
        self.lambda
            .iter()
            .zip(&self.weighted_m)
            .map(|((_, s), wm)| Ok(wm * s.expectation(o)?))
            .sum()
    }

    fn tag(&self, o: &Observable) -> String {
        format!("qcsq:{}", o.tag())
    }

    fn digest_bytes(&self, o: &Observable) -> Vec<u8> {
        o.digest_bytes()
    }
}

/// `Q ↦ E_{ρ∼λ}[tr[U† Q ρ]]` for unitary `Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct QusqTruth {
    u_dag: ComplexMatrix,
    lambda: StateMeasure,
}

impl QusqTruth {
    pub fn new(u: &ComplexMatrix, lambda: StateMeasure) -> Result<Self> {
        linalg::check_dims(lambda.dim(), linalg::check_square(u)?)?;
        if !linalg::is_unitary(u, NORM_SLACK) {
            return invalid_arg("target of a unitary query oracle must be unitary");
        }
        Ok(QusqTruth {
            u_dag: u.adjoint(),
            lambda,
        })
    }
}

impl GroundTruth for QusqTruth {
    type Query = ComplexMatrix;
    type Value = C64;

    fn evaluate(&self, q: &ComplexMatrix) -> Result<C64> {
        linalg::check_dims(self.lambda.dim(), linalg::check_square(q)?)?;
        if !linalg::is_unitary(q, NORM_SLACK) {
            return Err(Error::InvalidQuery("query is not unitary".into()));
        }
        let uq = &self.u_dag * q;
        self.lambda
            .iter()
            .map(|(w, s)| Ok(s.trace_with(&uq)? * w))
            .sum()
    }

    fn tag(&self, q: &ComplexMatrix) -> String {
        format!("qusq[{}]", q.nrows())
    }

    fn digest_bytes(&self, q: &ComplexMatrix) -> Vec<u8> {
        matrix_bytes(q)
    }
}

/// `h ↦ Pr_{i∼P}[h(i) = 1]`, the one-bit pushforward of `P`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneBitTruth {
    p: Vec<f64>,
}

impl OneBitTruth {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        check_distribution(&p)?;
        Ok(OneBitTruth { p })
    }
}

impl GroundTruth for OneBitTruth {
    type Query = [bool];
    type Value = f64;

    fn evaluate(&self, h: &[bool]) -> Result<f64> {
        if h.len() != self.p.len() {
            return Err(Error::DimensionMismatch {
                expected: self.p.len(),
                got: h.len(),
            });
        }
        Ok(self
            .p
            .iter()
            .zip(h)
            .filter(|(_, b)| **b)
            .map(|(p, _)| p)
            .sum::<f64>()
            .min(1.0))
    }

    fn tag(&self, h: &[bool]) -> String {
        format!("1bit[{}]", h.len())
    }

    fn digest_bytes(&self, h: &[bool]) -> Vec<u8> {
        h.iter().map(|b| *b as u8).collect()
    }

    fn admissible(&self, v: f64) -> f64 {
        v.clamp(0.0, 1.0)
    }
}

type LossFn<T> = Arc<dyn Fn(&T) -> Result<f64> + Send + Sync>;

/// `ϑ ↦ l(ϑ)` for a loss `l: Θ → [0, 1]`.
pub struct LossTruth<T: ?Sized> {
    name: String,
    loss: LossFn<T>,
}

impl<T: ?Sized> Clone for LossTruth<T> {
    fn clone(&self) -> Self {
        LossTruth {
            name: self.name.clone(),
            loss: Arc::clone(&self.loss),
        }
    }
}

impl<T: ?Sized> Debug for LossTruth<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LossTruth({})", self.name)
    }
}

impl<T: ?Sized> LossTruth<T> {
    /// `loss` rejects parameters outside `Θ` with an error.
    pub fn new(
        name: impl Into<String>,
        loss: impl Fn(&T) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        LossTruth {
            name: name.into(),
            loss: Arc::new(loss),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl<T: Debug + ?Sized> GroundTruth for LossTruth<T> {
    type Query = T;
    type Value = f64;

    fn evaluate(&self, theta: &T) -> Result<f64> {
        let v = (self.loss)(theta)?;
        if !(-1e-12..=1.0 + 1e-12).contains(&v) {
            return Err(Error::InvalidArgument(format!(
                "loss {} returned {v} outside [0, 1]",
                self.name
            )));
        }
        Ok(v.clamp(0.0, 1.0))
    }

    fn tag(&self, _theta: &T) -> String {
        format!("loss:{}", self.name)
    }

    fn digest_bytes(&self, theta: &T) -> Vec<u8> {
        format!("{theta:?}").into_bytes()
    }

    fn admissible(&self, v: f64) -> f64 {
        v.clamp(0.0, 1.0)
    }
}

pub type StatOracle = EvalOracle<StatTruth>;
pub type QStatOracle = EvalOracle<QStatTruth>;
pub type CsqOracle = EvalOracle<CsqTruth>;
pub type McsqOracle = EvalOracle<McsqTruth>;
pub type QcsqOracle = EvalOracle<QcsqTruth>;
pub type QusqOracle = EvalOracle<QusqTruth>;
pub type OneBitOracle = EvalOracle<OneBitTruth>;
pub type LossOracle<T> = EvalOracle<LossTruth<T>>;

/// Statistical query oracle of a distribution on `[N]`.
pub fn make_stat_oracle(p: Vec<f64>, tau: f64, policy: NoisePolicy) -> Result<StatOracle> {
    EvalOracle::new(StatTruth::new(p)?, tau, policy)
}

/// Quantum statistical query oracle of `ρ`.
pub fn make_qstat_oracle(
    state: impl Into<QuantumState>,
    tau: f64,
    policy: NoisePolicy,
) -> Result<QStatOracle> {
    EvalOracle::new(QStatTruth::new(state, 1)?, tau, policy)
}

/// `k`-copy quantum statistical query oracle of `ρ`.
pub fn make_kqstat_oracle(
    state: impl Into<QuantumState>,
    k: usize,
    tau: f64,
    policy: NoisePolicy,
) -> Result<QStatOracle> {
    EvalOracle::new(QStatTruth::new(state, k)?, tau, policy)
}

/// Correlational statistical query oracle of `f` under `λ`.
pub fn make_csq_oracle(
    f: Vec<f64>,
    lambda: Vec<f64>,
    tau: f64,
    policy: NoisePolicy,
) -> Result<CsqOracle> {
    EvalOracle::new(CsqTruth::new(f, lambda)?, tau, policy)
}

/// Matrix correlational oracle `B ↦ ⟨A, B⟩_ρ`.
pub fn make_mcsq_oracle(
    a: &ComplexMatrix,
    rho: &DensityMatrix,
    tau: f64,
    policy: NoisePolicy<C64>,
) -> Result<McsqOracle> {
    EvalOracle::new(McsqTruth::new(a, rho)?, tau, policy)
}

pub fn make_qcsq_oracle(
    m: &Observable,
    lambda: StateMeasure,
    tau: f64,
    policy: NoisePolicy,
) -> Result<QcsqOracle> {
    EvalOracle::new(QcsqTruth::new(m, lambda)?, tau, policy)
}

pub fn make_qusq_oracle(
    u: &ComplexMatrix,
    lambda: StateMeasure,
    tau: f64,
    policy: NoisePolicy<C64>,
) -> Result<QusqOracle> {
    EvalOracle::new(QusqTruth::new(u, lambda)?, tau, policy)
}

/// Oracle returning a bit distribution within total variation `τ` of the
/// pushforward of `P`; see [`one_bit_distribution`].
pub fn make_1bit_oracle(p: Vec<f64>, tau: f64, policy: NoisePolicy) -> Result<OneBitOracle> {
    EvalOracle::new(OneBitTruth::new(p)?, tau, policy)
}

/// `[p̃(0), p̃(1)]` for the boolean function `h`.
pub fn one_bit_distribution(oracle: &mut OneBitOracle, h: &[bool]) -> Result<[f64; 2]> {
    let p1 = oracle.query(h)?;
    Ok([1.0 - p1, p1])
}

pub fn make_loss_oracle<T: Debug + ?Sized>(
    loss: LossTruth<T>,
    tau: f64,
    policy: NoisePolicy,
) -> Result<LossOracle<T>> {
    EvalOracle::new(loss, tau, policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::linalg::{identity, pauli_z};
    use crate::qmath::PauliWeyl;

    fn z1() -> Observable {
        Observable::pauli(PauliWeyl::from_label("Z").unwrap())
    }

    #[test]
    fn stat_examples() {
        let mut o = make_stat_oracle(vec![0.5, 0.5], 0.0, NoisePolicy::Exact).unwrap();
        assert_eq!(o.query(&[1.0, -1.0]).unwrap(), 0.0);
        let mut o = make_stat_oracle(vec![1.0, 0.0], 0.0, NoisePolicy::Exact).unwrap();
        assert_eq!(o.query(&[1.0, -1.0]).unwrap(), 1.0);
        let mut o = make_stat_oracle(vec![0.25; 4], 0.1, NoisePolicy::default_for(0.1)).unwrap();
        assert!(o.query(&[1.0, 1.0, -1.0, -1.0]).unwrap().abs() <= 0.1);
        assert!(matches!(
            o.query(&[2.0, 0.0, 0.0, 0.0]),
            Err(Error::InvalidQuery(_))
        ));
        assert_eq!(o.query_count(), 1);
    }

    #[test]
    fn qstat_examples() {
        let mut o = make_qstat_oracle(PureState::basis(2, 0), 0.0, NoisePolicy::Exact).unwrap();
        assert_eq!(o.query(&z1()).unwrap(), 1.0);
        let mut o =
            make_qstat_oracle(DensityMatrix::maximally_mixed(2), 0.0, NoisePolicy::Exact).unwrap();
        assert!(o.query(&z1()).unwrap().abs() < 1e-15);
        let big = Observable::dense(pauli_z() * C64::new(1.5, 0.0)).unwrap();
        assert!(o.query(&big).is_err());
        assert_eq!(o.query_count(), 1);
    }

    #[test]
    fn two_copy_swap_gives_purity() {
        let rho = DensityMatrix::mixture(
            &[0.75, 0.25],
            &[PureState::basis(2, 0), PureState::basis(2, 1)],
        )
        .unwrap();
        let mut o = make_kqstat_oracle(rho.clone(), 2, 0.0, NoisePolicy::Exact).unwrap();
        let f = crate::qmath::flip_operator(2).unwrap();
        assert!((o.query(&f).unwrap() - rho.purity()).abs() < 1e-12);
    }

    #[test]
    fn csq_two_point_sum() {
        let mut o =
            make_csq_oracle(vec![1.0, -1.0], vec![0.5, 0.5], 0.0, NoisePolicy::Exact).unwrap();
        let v = o.query(&[2f64.sqrt(), 0.0]).unwrap();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(o.query(&[2.0, 0.0]).is_err());
    }

    #[test]
    fn mcsq_examples() {
        let rho = DensityMatrix::maximally_mixed(2);
        let mut o = make_mcsq_oracle(&identity(2), &rho, 0.0, NoisePolicy::Exact).unwrap();
        assert!((o.query(&identity(2)).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-12);
        let mut o = make_mcsq_oracle(&pauli_z(), &rho, 0.0, NoisePolicy::Exact).unwrap();
        assert!((o.query(&pauli_z()).unwrap().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qusq_identity_query() {
        let lambda = StateMeasure::uniform(vec![PureState::basis(2, 0).into()]).unwrap();
        let u = crate::qmath::linalg::hadamard();
        let mut o = make_qusq_oracle(&u, lambda, 0.1, NoisePolicy::default_for(0.1)).unwrap();
        let v = o.query(&u).unwrap();
        assert!((v - C64::new(1.0, 0.0)).norm() <= 0.1);
        assert!(o.query(&(pauli_z() * C64::new(0.5, 0.0))).is_err());
    }

    #[test]
    fn one_bit_clamped() {
        let mut o = make_1bit_oracle(vec![1.0, 0.0], 0.2, NoisePolicy::default_for(0.2)).unwrap();
        let d = one_bit_distribution(&mut o, &[false, false]).unwrap();
        assert!(d[0] >= 0.8 && d[0] <= 1.0 && d[1] >= 0.0);
    }

    #[test]
    fn loss_rejects_out_of_domain() {
        let l = LossTruth::new("basis", |y: &usize| {
            if *y < 4 {
                Ok(if *y == 2 { 0.0 } else { 1.0 })
            } else {
                Err(Error::InvalidQuery("outside theta".into()))
            }
        });
        let mut o = make_loss_oracle(l, 0.1, NoisePolicy::default_for(0.1)).unwrap();
        assert!(o.query(&2).unwrap() <= 0.1);
        assert!(o.query(&7).is_err());
        assert_eq!(o.query_count(), 1);
    }
}
