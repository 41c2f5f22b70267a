//! Majorana operators under the Jordan-Wigner mapping and fermionic
//! covariance matrices.
//!
//! Mode `i` (zero based) maps to qubit `i`:
//! `m_{2i} = Z^{⊗i} X I…` and `m_{2i+1} = Z^{⊗i} Y I…`.
//! With this ordering the vacuum `|0…0⟩` has covariance
//! `⊕ [[0, -1], [1, 0]]`.

use nalgebra::DMatrix;

use super::linalg::{check_dims, ComplexMatrix};
use super::pauli::PauliWeyl;
use super::states::{expectation, DensityMatrix, Observable, PureState};
use crate::error::{invalid_arg, Result};

/// Largest mode count for dense Majorana matrices.
pub const MAX_DENSE_MODES: usize = 7;

#[derive(Clone, Debug)]
pub struct MajoranaSet {
    modes: usize,
    labels: Vec<PauliWeyl>,
}

/// Majorana operators as Pauli labels, no dense budget.
pub fn majorana_labels(modes: usize) -> Result<Vec<PauliWeyl>> {
    let mut out = Vec::with_capacity(2 * modes);
    for i in 0..modes {
        for letter in ['X', 'Y'] {
            let s: String = (0..modes)
                .map(|q| match q.cmp(&i) {
                    std::cmp::Ordering::Less => 'Z',
                    std::cmp::Ordering::Equal => letter,
                    std::cmp::Ordering::Greater => 'I',
                })
                .collect();
            out.push(PauliWeyl::from_label(&s)?);
        }
    }
    Ok(out)
}

/// The Majorana operators for `modes` modes.
pub fn majorana_operators(modes: usize) -> Result<MajoranaSet> {
    if modes == 0 || modes > MAX_DENSE_MODES {
        return invalid_arg(format!(
            "mode count must be in 1..={MAX_DENSE_MODES} for dense Majoranas"
        ));
    }
    Ok(MajoranaSet {
        modes,
        labels: majorana_labels(modes)?,
    })
}

impl MajoranaSet {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        1 << self.modes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, i: usize) -> PauliWeyl {
        self.labels[i]
    }

    pub fn dense(&self, i: usize) -> ComplexMatrix {
        self.labels[i].dense()
    }

    /// Observable `iΓ_ij = (i/2)[m_i, m_j]` for `i ≠ j`, whose expectation is
    /// the covariance entry `M_ij`.
    pub fn pair_observable(&self, i: usize, j: usize) -> Result<Observable> {
        if i == j || i >= self.len() || j >= self.len() {
            return invalid_arg("pair observable needs distinct valid indices");
        }
        let (odd, p) = self.labels[i].mul(&self.labels[j]);
        debug_assert_eq!(odd, 1, "distinct Majoranas anticommute");
        // m_i m_j = i·p, so i·m_i m_j = -p.
        Ok(Observable::pauli(p.negated()))
    }
}

/// Real antisymmetric covariance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    modes: usize,
    m: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || !m.nrows().is_multiple_of(2) {
            return invalid_arg("covariance matrix must be 2l x 2l");
        }
        let asym = (&m + m.transpose()).abs().max();
        if asym > 1e-9 {
            return invalid_arg(format!("covariance matrix not antisymmetric ({asym:e})"));
        }
        Ok(CovarianceMatrix {
            modes: m.nrows() / 2,
            m,
        })
    }

    /// `⊕ [[0, -1], [1, 0]]`, the vacuum under the crate's convention.
    pub fn vacuum(modes: usize) -> Self {
        let mut m = DMatrix::zeros(2 * modes, 2 * modes);
        for i in 0..modes {
            m[(2 * i, 2 * i + 1)] = -1.0;
            m[(2 * i + 1, 2 * i)] = 1.0;
        }
        CovarianceMatrix { modes, m }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Absolute values `|λ_i|` of the canonical block entries, descending.
    pub fn block_magnitudes(&self) -> Vec<f64> {
        let sv = self.m.clone().singular_values();
        let mut v: Vec<f64> = sv.iter().copied().collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v.into_iter().step_by(2).collect()
    }

    /// Whether `M Mᵀ = I` within `tol` (pure Gaussian states).
    pub fn is_pure_gaussian(&self, tol: f64) -> bool {
        let p = &self.m * self.m.transpose();
        (p - DMatrix::identity(2 * self.modes, 2 * self.modes))
            .abs()
            .max()
            <= tol
    }
}

/// `M(ρ)_{ij} = (i/2) tr[ρ[m_i, m_j]]`.
pub fn covariance_of_state(rho: &DensityMatrix, mset: &MajoranaSet) -> Result<CovarianceMatrix> {
    check_dims(mset.dim(), rho.dim())?;
    let k = mset.len();
    let mut m = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in (i + 1)..k {
            let v = expectation(rho, &mset.pair_observable(i, j)?)?;
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
    }
    CovarianceMatrix::new(m)
}

/// Covariance of a pure state from its amplitudes (any mode count that fits
/// a state vector).
pub fn covariance_of_pure(psi: &PureState, modes: usize) -> Result<CovarianceMatrix> {
    check_dims(1 << modes, psi.dim())?;
    let labels = majorana_labels(modes)?;
    let k = labels.len();
    let mut m = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in (i + 1)..k {
            let (_, p) = labels[i].mul(&labels[j]);
            let v = -p.expectation_vec(psi.amplitudes());
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
    }
    CovarianceMatrix::new(m)
}
