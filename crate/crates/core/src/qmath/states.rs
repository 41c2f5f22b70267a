//! Validated state and observable types.

use serde::{Deserialize, Serialize};

use super::linalg::{
    self, check_dims, check_finite, check_square, hermiticity_defect, numeric_policy,
    ComplexMatrix, C64, DENSE_DIM_LIMIT, ONE, ZERO,
};
use super::pauli::PauliWeyl;
use crate::error::{check_budget, Error, Result};

/// Normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amps: Vec<C64>,
}

impl PureState {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidState("empty amplitude vector".into()));
        }
        let norm = linalg::norm_sqr(&amps).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > numeric_policy().normalization_tol {
            return Err(Error::InvalidState(format!("state norm {norm} is not 1")));
        }
        Ok(PureState { amps })
    }

    /// Normalizes a nonzero vector.
    pub fn normalized(mut amps: Vec<C64>) -> Result<Self> {
        let norm = linalg::norm_sqr(&amps).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        for a in amps.iter_mut() {
            *a /= norm;
        }
        Ok(PureState { amps })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        PureState { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        linalg::inner(&self.amps, &other.amps)
    }

    pub fn overlap_sqr(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState {
            amps: linalg::tensor_vec(&self.amps, &other.amps),
        }
    }

    /// `|ψ⟩^{⊗k}`.
    pub fn power(&self, k: usize) -> Result<PureState> {
        check_budget(
            "tensor power dimension",
            (self.dim() as u128).pow(k as u32),
            1 << 24,
        )?;
        let mut out = PureState { amps: vec![ONE] };
        for _ in 0..k {
            out = out.tensor(self);
        }
        Ok(out)
    }

    pub fn apply(&self, u: &ComplexMatrix) -> Result<PureState> {
        check_dims(self.dim(), u.ncols())?;
        PureState::normalized(linalg::mat_vec(u, &self.amps))
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            m: linalg::outer(&self.amps, &self.amps),
        }
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    m: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let dim = check_square(&m)?;
        check_finite(&m)?;
        let pol = numeric_policy();
        let defect = hermiticity_defect(&m);
        if defect > pol.hermitian_tol {
            return Err(Error::InvalidState(format!(
                "not Hermitian (defect {defect:e})"
            )));
        }
        let tr = linalg::trace(&m);
        if (tr.re - 1.0).abs() > pol.trace_tol || tr.im.abs() > pol.trace_tol {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = linalg::hermitian_eigenvalues(&m)
            .first()
            .copied()
            .unwrap_or(0.0);
        if min < -pol.psd_tol {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:e} in {dim}-dimensional state"
            )));
        }
        Ok(DensityMatrix { m })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            m: linalg::identity(dim) * C64::new(1.0 / dim as f64, 0.0),
        }
    }

    /// Mixture `Σ p_i |ψ_i⟩⟨ψ_i|`.
    pub fn mixture(weights: &[f64], states: &[PureState]) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::InvalidArgument(
                "mixture needs matching weights".into(),
            ));
        }
        let dim = states[0].dim();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (w, s) in weights.iter().zip(states) {
            check_dims(dim, s.dim())?;
            m += linalg::outer(s.amplitudes(), s.amplitudes()) * C64::new(*w, 0.0);
        }
        DensityMatrix::new(m)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn purity(&self) -> f64 {
        linalg::trace_product(&self.m, &self.m).re
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        check_budget(
            "density matrix dimension",
            (self.dim() * other.dim()) as u128,
            DENSE_DIM_LIMIT as u128,
        )?;
        Ok(DensityMatrix {
            m: linalg::tensor(&self.m, &other.m),
        })
    }

    pub fn power(&self, k: usize) -> Result<DensityMatrix> {
        let mut out = DensityMatrix {
            m: linalg::identity(1),
        };
        for _ in 0..k {
            out = out.tensor(self)?;
        }
        Ok(out)
    }

    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<DensityMatrix> {
        check_dims(self.dim(), u.ncols())?;
        Ok(DensityMatrix {
            m: u * &self.m * u.adjoint(),
        })
    }
}

/// Change of basis in which a diagonal observable is expressed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    Computational,
    /// Diagonal in the `H^{⊗n}` rotated basis.
    Hadamard,
}

/// Storage of an observable.
#[derive(Clone, Debug, PartialEq)]
pub enum ObservableRepr {
    Dense(ComplexMatrix),
    Pauli { weyl: PauliWeyl, coeff: f64 },
    Diagonal { diag: Vec<f64>, frame: Frame },
}

/// Hermitian operator with a cached operator norm.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    dim: usize,
    repr: ObservableRepr,
    op_norm: f64,
}

impl Observable {
    pub fn dense(m: ComplexMatrix) -> Result<Self> {
        let dim = check_square(&m)?;
        check_finite(&m)?;
        let defect = hermiticity_defect(&m);
        if defect > numeric_policy().hermitian_tol {
            return Err(Error::InvalidObservable(format!(
                "not Hermitian (defect {defect:e})"
            )));
        }
        let op_norm = linalg::op_norm(&m);
        Ok(Observable {
            dim,
            repr: ObservableRepr::Dense(m),
            op_norm,
        })
    }

    pub fn pauli(weyl: PauliWeyl) -> Self {
        Self::scaled_pauli(weyl, 1.0)
    }

    pub fn scaled_pauli(weyl: PauliWeyl, coeff: f64) -> Self {
        Observable {
            dim: weyl.dim(),
            repr: ObservableRepr::Pauli { weyl, coeff },
            op_norm: coeff.abs(),
        }
    }

    pub fn diagonal(diag: Vec<f64>, frame: Frame) -> Result<Self> {
        if diag.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidObservable("non-finite diagonal".into()));
        }
        if frame == Frame::Hadamard && !diag.len().is_power_of_two() {
            return Err(Error::InvalidObservable(
                "Hadamard frame needs a power-of-two dimension".into(),
            ));
        }
        let op_norm = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        Ok(Observable {
            dim: diag.len(),
            repr: ObservableRepr::Diagonal { diag, frame },
            op_norm,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Observable::diagonal(vec![1.0; dim], Frame::Computational).expect("finite")
    }

    /// Rank-one projector `|ψ⟩⟨ψ|`.
    pub fn projector(psi: &PureState) -> Self {
        let m = linalg::outer(psi.amplitudes(), psi.amplitudes());
        Observable {
            dim: psi.dim(),
            repr: ObservableRepr::Dense(m),
            op_norm: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn repr(&self) -> &ObservableRepr {
        &self.repr
    }

    pub fn op_norm(&self) -> f64 {
        self.op_norm
    }

    /// Checks `‖O‖_op ≤ 1` up to the policy slack.
    pub fn check_query_norm(&self) -> Result<()> {
        if self.op_norm > 1.0 + numeric_policy().op_norm_slack {
            Err(Error::InvalidQuery(format!(
                "operator norm {} exceeds 1",
                self.op_norm
            )))
        } else {
            Ok(())
        }
    }

    /// Materialized matrix.
    pub fn matrix(&self) -> Result<ComplexMatrix> {
        check_budget(
            "dense observable dimension",
            self.dim as u128,
            DENSE_DIM_LIMIT as u128,
        )?;
        Ok(match &self.repr {
            ObservableRepr::Dense(m) => m.clone(),
            ObservableRepr::Pauli { weyl, coeff } => weyl.dense() * C64::new(*coeff, 0.0),
            ObservableRepr::Diagonal { diag, frame } => {
                let d = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                    diag.len(),
                    diag.iter().map(|x| C64::new(*x, 0.0)),
                ));
                match frame {
                    Frame::Computational => d,
                    Frame::Hadamard => {
                        let n = linalg::qubits_of(self.dim).expect("checked at construction");
                        let h = linalg::tensor_all(
                            std::iter::repeat_n(&linalg::hadamard(), n).collect::<Vec<_>>(),
                        );
                        &h * d * &h
                    }
                }
            }
        })
    }

    /// `O|v⟩`.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        match &self.repr {
            ObservableRepr::Dense(m) => linalg::mat_vec(m, v),
            ObservableRepr::Pauli { weyl, coeff } => {
                weyl.apply(v).into_iter().map(|z| z * *coeff).collect()
            }
            ObservableRepr::Diagonal { diag, frame } => match frame {
                Frame::Computational => v.iter().zip(diag).map(|(z, d)| z * *d).collect(),
                Frame::Hadamard => {
                    let mut w = v.to_vec();
                    linalg::walsh_hadamard(&mut w);
                    for (z, d) in w.iter_mut().zip(diag) {
                        *z *= *d;
                    }
                    linalg::walsh_hadamard(&mut w);
                    w
                }
            },
        }
    }

    /// `⟨ψ|O|ψ⟩` on a raw amplitude vector.
    pub fn expectation_vec(&self, v: &[C64]) -> f64 {
        match &self.repr {
            ObservableRepr::Dense(m) => linalg::quadratic_form(m, v),
            ObservableRepr::Pauli { weyl, coeff } => coeff * weyl.expectation_vec(v),
            ObservableRepr::Diagonal { diag, frame } => match frame {
                Frame::Computational => v.iter().zip(diag).map(|(z, d)| z.norm_sqr() * d).sum(),
                Frame::Hadamard => {
                    let mut w = v.to_vec();
                    linalg::walsh_hadamard(&mut w);
                    w.iter().zip(diag).map(|(z, d)| z.norm_sqr() * d).sum()
                }
            },
        }
    }

    pub fn expectation_pure(&self, psi: &PureState) -> Result<f64> {
        check_dims(self.dim, psi.dim())?;
        Ok(self.expectation_vec(psi.amplitudes()))
    }

    /// `tr[O^2]`.
    pub fn hs_norm_sqr(&self) -> f64 {
        match &self.repr {
            ObservableRepr::Dense(m) => m.iter().map(|z| z.norm_sqr()).sum(),
            ObservableRepr::Pauli { coeff, .. } => coeff * coeff * self.dim as f64,
            ObservableRepr::Diagonal { diag, .. } => diag.iter().map(|d| d * d).sum(),
        }
    }

    pub fn trace(&self) -> f64 {
        match &self.repr {
            ObservableRepr::Dense(m) => linalg::trace(m).re,
            ObservableRepr::Pauli { weyl, coeff } => {
                if weyl.is_identity() {
                    coeff * weyl.sign() as f64 * self.dim as f64
                } else {
                    0.0
                }
            }
            ObservableRepr::Diagonal { diag, .. } => diag.iter().sum(),
        }
    }

    /// `O ⊗ other` as a dense observable.
    pub fn tensor(&self, other: &Observable) -> Result<Observable> {
        let m = linalg::tensor(&self.matrix()?, &other.matrix()?);
        Ok(Observable {
            dim: self.dim * other.dim,
            repr: ObservableRepr::Dense(m),
            op_norm: self.op_norm * other.op_norm,
        })
    }

    /// Short human-readable description.
    pub fn tag(&self) -> String {
        match &self.repr {
            ObservableRepr::Dense(_) => format!("dense[{}]", self.dim),
            ObservableRepr::Pauli { weyl, coeff } => {
                if *coeff == 1.0 {
                    format!("pauli[{weyl}]")
                } else {
                    format!("pauli[{coeff}*{weyl}]")
                }
            }
            ObservableRepr::Diagonal { frame, .. } => format!("diag[{}:{frame:?}]", self.dim),
        }
    }

    /// Bytes used for content hashing.
    pub fn digest_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match &self.repr {
            ObservableRepr::Dense(m) => {
                out.push(0u8);
                for z in m.iter() {
                    out.extend_from_slice(&z.re.to_le_bytes());
                    out.extend_from_slice(&z.im.to_le_bytes());
                }
            }
            ObservableRepr::Pauli { weyl, coeff } => {
                out.push(1u8);
                out.extend_from_slice(&(weyl.n() as u64).to_le_bytes());
                out.extend_from_slice(&weyl.x_mask().to_le_bytes());
                out.extend_from_slice(&weyl.z_mask().to_le_bytes());
                out.push(weyl.sign() as u8);
                out.extend_from_slice(&coeff.to_le_bytes());
            }
            ObservableRepr::Diagonal { diag, frame } => {
                out.push(2u8);
                out.push(*frame as u8);
                for d in diag {
                    out.extend_from_slice(&d.to_le_bytes());
                }
            }
        }
        out
    }
}

/// Exact `tr[ρ O]`.
pub fn expectation(rho: &DensityMatrix, o: &Observable) -> Result<f64> {
    check_dims(rho.dim(), o.dim())?;
    let v = match o.repr() {
        ObservableRepr::Dense(m) => linalg::trace_product(rho.matrix(), m),
        ObservableRepr::Pauli { weyl, coeff } => weyl.trace_with(rho.matrix()) * *coeff,
        ObservableRepr::Diagonal {
            diag,
            frame: Frame::Computational,
        } => diag
            .iter()
            .enumerate()
            .map(|(i, d)| rho.matrix()[(i, i)] * *d)
            .sum(),
        ObservableRepr::Diagonal { .. } => linalg::trace_product(rho.matrix(), &o.matrix()?),
    };
    Ok(v.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::linalg::{pauli_x, pauli_z};

    fn plus() -> PureState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(vec![C64::new(s, 0.0), C64::new(s, 0.0)]).unwrap()
    }

    #[test]
    fn expectation_examples() {
        let z = Observable::dense(pauli_z()).unwrap();
        let x = Observable::dense(pauli_x()).unwrap();
        let zero = PureState::basis(2, 0).to_density();
        assert!((expectation(&zero, &z).unwrap() - 1.0).abs() < 1e-15);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!(expectation(&mixed, &z).unwrap().abs() < 1e-15);
        assert!((expectation(&plus().to_density(), &x).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            expectation(&DensityMatrix::maximally_mixed(4), &z),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn density_validation() {
        let bad = pauli_z();
        assert!(DensityMatrix::new(bad).is_err());
        let non_psd = ComplexMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.5, 0.0), ZERO, ZERO, C64::new(-0.5, 0.0)],
        );
        assert!(DensityMatrix::new(non_psd).is_err());
        assert!(PureState::new(vec![ONE, ONE]).is_err());
    }

    #[test]
    fn representations_agree() {
        let v: Vec<C64> = (0..8)
            .map(|i| C64::new((i as f64).sin(), (i as f64).cos()))
            .collect();
        let psi = PureState::normalized(v).unwrap();
        let diag: Vec<f64> = (0..8).map(|i| (i as f64 * 0.7).cos()).collect();
        for frame in [Frame::Computational, Frame::Hadamard] {
            let o = Observable::diagonal(diag.clone(), frame).unwrap();
            let dense = Observable::dense(o.matrix().unwrap()).unwrap();
            let a = o.expectation_pure(&psi).unwrap();
            let b = dense.expectation_pure(&psi).unwrap();
            let c = expectation(&psi.to_density(), &o).unwrap();
            assert!((a - b).abs() < 1e-12 && (a - c).abs() < 1e-12);
            assert!((o.op_norm() - dense.op_norm()).abs() < 1e-12);
        }
    }
}
