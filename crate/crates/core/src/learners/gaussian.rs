//! Learning pure fermionic Gaussian states from their covariance entries.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid_arg, Error, Result};
use crate::oracles::QStatOracle;
use crate::qmath::fermion::{majorana_operators, CovarianceMatrix, MajoranaSet};
use crate::qmath::linalg::{self, ComplexMatrix, C64};
use crate::qmath::states::PureState;

use super::{Diagnostics, LearnerResult};

/// Hypothesis of the Gaussian learner.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianEstimate {
    /// Entries as answered by the oracle.
    pub raw: DMatrix<f64>,
    /// Nearest pure-state covariance matrix.
    pub covariance: CovarianceMatrix,
    pub state: PureState,
}

/// `Σ_{i<j} c_ij (i m_i m_j)` as a dense matrix.
fn quadratic_hamiltonian(mset: &MajoranaSet, c: &DMatrix<f64>) -> Result<ComplexMatrix> {
    let dim = mset.dim();
    let mut h = ComplexMatrix::zeros(dim, dim);
    for i in 0..mset.len() {
        for j in (i + 1)..mset.len() {
            if c[(i, j)] != 0.0 {
                h += mset.pair_observable(i, j)?.matrix()? * C64::new(c[(i, j)], 0.0);
            }
        }
    }
    Ok(h)
}

/// `exp(−i ½ Σ_{i<j} A_ij (i m_i m_j))` applied to a random occupation basis
/// state, with `A` a random real antisymmetric matrix.
pub fn random_pure_gaussian<R: Rng + ?Sized>(modes: usize, rng: &mut R) -> Result<PureState> {
    let mset = majorana_operators(modes)?;
    let k = 2 * modes;
    let mut a = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in (i + 1)..k {
            let x: f64 = rng.sample(StandardNormal);
            a[(i, j)] = x;
            a[(j, i)] = -x;
        }
    }
    let h = quadratic_hamiltonian(&mset, &(a * 0.5))?;
    let u = linalg::unitary_evolution(&h, 1.0);
    PureState::basis(mset.dim(), rng.random_range(0..mset.dim())).apply(&u)
}

/// Queries all `l(2l − 1)` covariance entries, rounds the estimate to the
/// nearest orthogonal antisymmetric matrix and returns the top eigenvector of
/// the associated quadratic Hamiltonian.
pub fn gaussian_state_learner(
    oracle: &mut QStatOracle,
    modes: usize,
) -> Result<LearnerResult<GaussianEstimate>> {
    let mset = majorana_operators(modes)?;
    if oracle.tolerance() >= 1.0 {
        return invalid_arg("tolerance must be below 1");
    }
    let k = 2 * modes;
    let start = oracle.query_count();
    let mut raw = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in (i + 1)..k {
            let v = oracle.query(&mset.pair_observable(i, j)?)?;
            raw[(i, j)] = v;
            raw[(j, i)] = -v;
        }
    }
    let radius = k as f64 * oracle.tolerance();
    let svd = raw.clone().svd(true, true);
    let worst = svd
        .singular_values
        .iter()
        .map(|s| (s - 1.0).abs())
        .fold(0.0, f64::max);
    if worst > radius + 1e-9 {
        return Err(Error::LearnerFailure(format!(
            "singular value {worst} away from 1 exceeds 2l*tau = {radius}; input is not a pure Gaussian state"
        )));
    }
    let (u, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let polar = u * vt;
    let rounded = (&polar - polar.transpose()) * 0.5;
    let h = quadratic_hamiltonian(&mset, &rounded)?;
    let (vals, vecs) = linalg::hermitian_eigen(&h);
    let top = vals.len() - 1;
    let amps: Vec<C64> = vecs.column(top).iter().copied().collect();
    let state = PureState::normalized(amps)?;
    let mut diag = Diagnostics::default();
    diag.set("max_singular_deviation", worst);
    diag.set("top_eigenvalue", vals[top]);
    if top > 0 {
        diag.set("spectral_gap", vals[top] - vals[top - 1]);
    }
    Ok(LearnerResult {
        hypothesis: GaussianEstimate {
            raw,
            covariance: CovarianceMatrix::new(rounded)?,
            state,
        },
        queries_used: oracle.query_count() - start,
        success: true,
        diagnostics: diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::stream_rng;
    use crate::oracles::{make_qstat_oracle, NoisePolicy};
    use crate::qmath::fermion::covariance_of_pure;

    #[test]
    fn random_gaussian_is_pure_gaussian() {
        let mut rng = stream_rng(31, 0);
        for l in 1..=3 {
            let psi = random_pure_gaussian(l, &mut rng).unwrap();
            assert!(covariance_of_pure(&psi, l).unwrap().is_pure_gaussian(1e-9));
        }
    }

    #[test]
    fn vacuum_is_recovered_exactly() {
        let psi = PureState::basis(4, 0);
        let mut o = make_qstat_oracle(psi.clone(), 0.0, NoisePolicy::Exact).unwrap();
        let r = gaussian_state_learner(&mut o, 2).unwrap();
        assert_eq!(r.queries_used, 6);
        assert!(r.hypothesis.state.overlap_sqr(&psi) > 1.0 - 1e-12);
        let diff = r.hypothesis.covariance.matrix() - CovarianceMatrix::vacuum(2).matrix();
        assert!(diff.abs().max() < 1e-12);
    }

    #[test]
    fn mixed_input_is_rejected() {
        let rho = crate::qmath::states::DensityMatrix::maximally_mixed(4);
        let mut o = make_qstat_oracle(rho, 0.01, NoisePolicy::Exact).unwrap();
        assert!(matches!(
            gaussian_state_learner(&mut o, 2),
            Err(Error::LearnerFailure(_))
        ));
    }
}
