use rand::Rng;
use serde::{Deserialize, Serialize};

use super::clifford::CliffordTableau;
use super::haar::haar_unchecked;
use crate::error::{check_budget, invalid_arg, Result};
use crate::qmath::linalg::{self, ComplexMatrix, C64, DENSE_DIM_LIMIT};
use crate::qmath::states::PureState;

/// Largest qubit count accepted by the brickwork sampler.
pub const MAX_BRICKWORK_QUBITS: usize = 12;

/// Two-qubit gate distribution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateSet {
    /// Haar-random `U(4)` gates.
    Haar4,
    /// Uniform two-qubit Clifford gates.
    CliffordLocal,
}

impl GateSet {
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> ComplexMatrix {
        match self {
            GateSet::Haar4 => haar_unchecked(4, rng),
            GateSet::CliffordLocal => CliffordTableau::sample(2, rng)
                .and_then(|t| t.to_dense())
                .expect("two-qubit Clifford synthesis"),
        }
    }
}

/// Layered circuit of nearest-neighbour gates; layer `l` (1-based) places
/// gates on pairs `(0,1), (2,3), …` when `l` is odd and on `(1,2), (3,4), …`
/// when even. A qubit left without a partner idles.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n: usize,
    layers: Vec<Vec<(usize, ComplexMatrix)>>,
}

impl Circuit {
    pub fn identity(n: usize) -> Self {
        Circuit {
            n,
            layers: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    /// Applies the circuit in place to a state vector.
    pub fn apply(&self, state: &mut [C64]) {
        for layer in &self.layers {
            for (q, g) in layer {
                linalg::apply_gate(state, self.n, g, &[*q, q + 1]);
            }
        }
    }

    /// `U|0…0⟩`.
    pub fn output_state(&self) -> PureState {
        let mut v = PureState::basis(1 << self.n, 0).into_amplitudes();
        self.apply(&mut v);
        PureState::normalized(v).expect("unitary circuits preserve the norm")
    }

    pub fn to_dense(&self) -> Result<ComplexMatrix> {
        let dim = 1usize << self.n;
        check_budget(
            "brickwork dense dimension",
            dim as u128,
            DENSE_DIM_LIMIT as u128,
        )?;
        let mut u = ComplexMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut v = PureState::basis(dim, col).into_amplitudes();
            self.apply(&mut v);
            for (r, z) in v.into_iter().enumerate() {
                u[(r, col)] = z;
            }
        }
        Ok(u)
    }
}

/// Random brickwork circuit of depth `d` on `n` qubits.
pub fn sample_brickwork_circuit<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    gateset: GateSet,
    rng: &mut R,
) -> Result<Circuit> {
    if n == 0 || n > MAX_BRICKWORK_QUBITS {
        return invalid_arg(format!("brickwork needs 1 <= n <= {MAX_BRICKWORK_QUBITS}"));
    }
    let layers = (1..=d)
        .map(|l| {
            let start = if l % 2 == 1 { 0 } else { 1 };
            (start..n.saturating_sub(1))
                .step_by(2)
                .map(|q| (q, gateset.sample(rng)))
                .collect()
        })
        .collect();
    Ok(Circuit { n, layers })
}

/// Dense unitary of a random brickwork circuit.
pub fn sample_brickwork<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    gateset: GateSet,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    sample_brickwork_circuit(n, d, gateset, rng)?.to_dense()
}
