//! Random unitary ensembles and their moments.

pub mod brickwork;
pub mod clifford;
pub mod haar;
pub mod moments;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{check_budget, invalid_arg, Error, Result};
use crate::qmath::linalg::{self, ComplexMatrix, DENSE_DIM_LIMIT};
use crate::qmath::states::PureState;

pub use brickwork::{sample_brickwork, sample_brickwork_circuit, Circuit, GateSet};
pub use clifford::{
    sample_clifford, single_qubit_cliffords, stabilizer_states, CliffordTableau, StabilizerGroup,
};
pub use haar::{haar_state, random_hermitian, random_observable, sample_haar};
pub use moments::{
    design_deviation, empirical_moment, exact_moment, haar_state_moment, second_moment_channel,
    DesignDeviation, MomentEstimate,
};

/// A measure over `U(N)` that can be sampled.
#[derive(Clone, Debug, PartialEq)]
pub enum UnitaryEnsemble {
    Haar {
        dim: usize,
    },
    CliffordUniform {
        n: usize,
    },
    Brickwork {
        n: usize,
        depth: usize,
        gateset: GateSet,
    },
    ExplicitSet {
        unitaries: Vec<ComplexMatrix>,
        weights: Vec<f64>,
    },
}

impl UnitaryEnsemble {
    /// Finite weighted set; every element must be unitary and the weights a
    /// probability vector.
    pub fn explicit(unitaries: Vec<ComplexMatrix>, weights: Vec<f64>) -> Result<Self> {
        if unitaries.is_empty() || unitaries.len() != weights.len() {
            return invalid_arg("explicit ensemble needs one weight per unitary");
        }
        let dim = linalg::check_square(&unitaries[0])?;
        for u in &unitaries {
            linalg::check_dims(dim, linalg::check_square(u)?)?;
            if !linalg::is_unitary(u, 1e-9) {
                return invalid_arg("explicit ensemble element is not unitary");
            }
        }
        if weights.iter().any(|w| *w < 0.0 || !w.is_finite())
            || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12
        {
            return invalid_arg("explicit ensemble weights must be a probability vector");
        }
        Ok(UnitaryEnsemble::ExplicitSet { unitaries, weights })
    }

    pub fn uniform(unitaries: Vec<ComplexMatrix>) -> Result<Self> {
        let w = 1.0 / unitaries.len().max(1) as f64;
        let weights = vec![w; unitaries.len()];
        Self::explicit(unitaries, weights)
    }

    pub fn dim(&self) -> usize {
        match self {
            UnitaryEnsemble::Haar { dim } => *dim,
            UnitaryEnsemble::CliffordUniform { n } | UnitaryEnsemble::Brickwork { n, .. } => 1 << n,
            UnitaryEnsemble::ExplicitSet { unitaries, .. } => unitaries[0].nrows(),
        }
    }

    pub fn descriptor(&self) -> String {
        match self {
            UnitaryEnsemble::Haar { dim } => format!("haar(N={dim})"),
            UnitaryEnsemble::CliffordUniform { n } => format!("clifford(n={n})"),
            UnitaryEnsemble::Brickwork { n, depth, gateset } => {
                format!("brickwork(n={n},d={depth},{gateset:?})")
            }
            UnitaryEnsemble::ExplicitSet { unitaries, .. } => {
                format!(
                    "explicit(N={},size={})",
                    unitaries[0].nrows(),
                    unitaries.len()
                )
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            UnitaryEnsemble::Haar { dim } if *dim < 2 => invalid_arg("Haar ensemble needs N >= 2"),
            UnitaryEnsemble::CliffordUniform { n } if *n == 0 || *n > 64 => {
                invalid_arg("Clifford ensemble needs 1 <= n <= 64")
            }
            UnitaryEnsemble::Brickwork { n, .. }
                if *n == 0 || *n > brickwork::MAX_BRICKWORK_QUBITS =>
            {
                invalid_arg("brickwork ensemble needs 1 <= n <= 12")
            }
            _ => Ok(()),
        }
    }

    /// A dense sample.
    pub fn sample_unitary<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ComplexMatrix> {
        match self {
            UnitaryEnsemble::Haar { dim } => {
                check_budget(
                    "Haar dense dimension",
                    *dim as u128,
                    DENSE_DIM_LIMIT as u128,
                )?;
                sample_haar(*dim, rng)
            }
            UnitaryEnsemble::CliffordUniform { n } => CliffordTableau::sample(*n, rng)?.to_dense(),
            UnitaryEnsemble::Brickwork { n, depth, gateset } => {
                sample_brickwork(*n, *depth, *gateset, rng)
            }
            UnitaryEnsemble::ExplicitSet { unitaries, weights } => {
                let idx = WeightedIndex::new(weights)
                    .map_err(|e| Error::InvalidArgument(e.to_string()))?;
                Ok(unitaries[idx.sample(rng)].clone())
            }
        }
    }

    /// `U|input⟩` for a sampled `U`, without forming `U` when avoidable.
    pub fn sample_state<R: Rng + ?Sized>(
        &self,
        input: &PureState,
        rng: &mut R,
    ) -> Result<PureState> {
        linalg::check_dims(self.dim(), input.dim())?;
        let is_zero = input.amplitudes()[0].norm_sqr() > 1.0 - 1e-12;
        match self {
            // U|ψ⟩ is Haar distributed for every fixed ψ.
            UnitaryEnsemble::Haar { dim } => Ok(haar_state(*dim, rng)),
            UnitaryEnsemble::CliffordUniform { n }
                if is_zero || *n > clifford::MAX_DENSE_CLIFFORD_QUBITS =>
            {
                if !is_zero {
                    return invalid_arg("Clifford inputs other than |0> need n <= 6");
                }
                CliffordTableau::sample(*n, rng)?.state()
            }
            UnitaryEnsemble::Brickwork { n, depth, gateset } => {
                let c = sample_brickwork_circuit(*n, *depth, *gateset, rng)?;
                let mut v = input.amplitudes().to_vec();
                c.apply(&mut v);
                PureState::normalized(v)
            }
            _ => input.apply(&self.sample_unitary(rng)?),
        }
    }

    /// Weighted output states when the ensemble is a finite set.
    pub fn enumerate_states(&self, input: &PureState) -> Option<Result<Vec<(f64, PureState)>>> {
        match self {
            UnitaryEnsemble::ExplicitSet { unitaries, weights } => Some(
                unitaries
                    .iter()
                    .zip(weights)
                    .map(|(u, w)| Ok((*w, input.apply(u)?)))
                    .collect(),
            ),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::stream_rng;

    #[test]
    fn explicit_validation() {
        let id = linalg::identity(2);
        assert!(UnitaryEnsemble::explicit(vec![id.clone()], vec![0.5]).is_err());
        assert!(UnitaryEnsemble::explicit(
            vec![linalg::pauli_z() * linalg::C64::new(2.0, 0.0)],
            vec![1.0]
        )
        .is_err());
        let e = UnitaryEnsemble::uniform(single_qubit_cliffords()).unwrap();
        assert_eq!(e.dim(), 2);
    }

    #[test]
    fn samplers_are_reproducible() {
        let zero = PureState::basis(4, 0);
        for e in [
            UnitaryEnsemble::Haar { dim: 4 },
            UnitaryEnsemble::CliffordUniform { n: 2 },
            UnitaryEnsemble::Brickwork {
                n: 2,
                depth: 3,
                gateset: GateSet::Haar4,
            },
        ] {
            let a = e.sample_state(&zero, &mut stream_rng(11, 2)).unwrap();
            let b = e.sample_state(&zero, &mut stream_rng(11, 2)).unwrap();
            assert_eq!(a, b);
            let u = e.sample_unitary(&mut stream_rng(11, 2)).unwrap();
            assert!(linalg::is_unitary(&u, 1e-9));
        }
    }
}
