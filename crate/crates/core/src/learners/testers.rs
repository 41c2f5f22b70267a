//! Single-query property testers on multi-copy oracles.

use rand::Rng;
use serde::Serialize;

use crate::ensembles::haar_state;
use crate::error::{check_budget, invalid_arg, Result};
use crate::oracles::{QStatOracle, QuantumState};
use crate::qmath::linalg::{self, ComplexMatrix, C64, DENSE_DIM_LIMIT};
use crate::qmath::pauli::PauliWeyl;
use crate::qmath::states::{DensityMatrix, Observable, PureState};
use crate::qmath::symmetric::flip_operator;

use super::{Diagnostics, LearnerResult};

/// Verdict of a threshold test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TestOutcome {
    pub accept: bool,
    pub response: f64,
    pub threshold: f64,
}

fn threshold_test(
    oracle: &mut QStatOracle,
    observable: &Observable,
    threshold: f64,
    margin: f64,
) -> Result<LearnerResult<TestOutcome>> {
    let tau = oracle.tolerance();
    if !(tau < margin) {
        return invalid_arg(format!(
            "tolerance {tau} must be below the test margin {margin}"
        ));
    }
    let start = oracle.query_count();
    let response = oracle.query(observable)?;
    let mut diagnostics = Diagnostics::default();
    diagnostics.set("response", response);
    diagnostics.set("threshold", threshold);
    Ok(LearnerResult {
        hypothesis: TestOutcome {
            accept: response > threshold,
            response,
            threshold,
        },
        queries_used: oracle.query_count() - start,
        success: true,
        diagnostics,
    })
}

/// Accepts iff `tr[F ρ^{⊗2}] > 1 − δ/2`, separating pure states from states of
/// purity at most `1 − δ`. The oracle answers two-copy queries on `C^dim`.
pub fn purity_tester(
    oracle: &mut QStatOracle,
    dim: usize,
    delta: f64,
) -> Result<LearnerResult<TestOutcome>> {
    if !(delta > 0.0 && delta <= 1.0) {
        return invalid_arg("purity gap must lie in (0, 1]");
    }
    threshold_test(oracle, &flip_operator(dim)?, 1.0 - delta / 2.0, delta / 2.0)
}

/// Accepts iff `⟨ψ|ρ|ψ⟩ > 1 − ε²/2`, separating `ρ = ψ` from states at trace
/// distance at least `ε`.
pub fn pure_state_tester(
    oracle: &mut QStatOracle,
    reference: &PureState,
    eps: f64,
) -> Result<LearnerResult<TestOutcome>> {
    if !(eps > 0.0 && eps <= 1.0) {
        return invalid_arg("distance must lie in (0, 1]");
    }
    let margin = eps * eps / 2.0;
    threshold_test(
        oracle,
        &Observable::projector(reference),
        1.0 - margin,
        margin,
    )
}

/// A random instance of the purity-testing promise on `C^dim`: a Haar-random
/// pure state when `pure`, otherwise `(1 − λ)ψ + λI/N` with `λ` uniform over
/// the range giving purity at most `1 − δ`.
pub fn purity_instance<R: Rng + ?Sized>(
    dim: usize,
    delta: f64,
    pure: bool,
    rng: &mut R,
) -> Result<QuantumState> {
    let n = dim as f64;
    let a = delta / (1.0 - 1.0 / n);
    if dim < 2 || !(delta > 0.0 && a <= 1.0) {
        return invalid_arg("purity gap must lie in (0, 1 - 1/N]");
    }
    let psi = haar_state(dim, rng);
    if pure {
        return Ok(psi.into());
    }
    let lo = 1.0 - (1.0 - a).sqrt();
    let lambda = lo + (1.0 - lo) * rng.random::<f64>();
    let m = psi.to_density().matrix() * C64::new(1.0 - lambda, 0.0)
        + linalg::identity(dim) * C64::new(lambda / n, 0.0);
    Ok(DensityMatrix::new(m)?.into())
}

/// A pure state at trace distance uniform in `[ε, 1]` from `reference`.
pub fn far_pure_state<R: Rng + ?Sized>(
    reference: &PureState,
    eps: f64,
    rng: &mut R,
) -> Result<PureState> {
    if !(eps > 0.0 && eps <= 1.0) || reference.dim() < 2 {
        return invalid_arg("distance must lie in (0, 1] on a space of dimension at least 2");
    }
    let chi = haar_state(reference.dim(), rng);
    let ov = reference.inner(&chi);
    let perp: Vec<C64> = chi
        .amplitudes()
        .iter()
        .zip(reference.amplitudes())
        .map(|(c, r)| c - r * ov)
        .collect();
    let perp = PureState::normalized(perp)?;
    let s = eps + (1.0 - eps) * rng.random::<f64>();
    let c = (1.0 - s * s).max(0.0).sqrt();
    PureState::normalized(
        reference
            .amplitudes()
            .iter()
            .zip(perp.amplitudes())
            .map(|(r, p)| r * c + p * s)
            .collect(),
    )
}

/// `|Φ_x⟩ = (W_x ⊗ I)|Φ⁺⟩` for the Pauli with symplectic index `x`.
fn bell_projector(n: usize, x: u64) -> ComplexMatrix {
    let d = 1usize << n;
    let w = PauliWeyl::all(n).nth(x as usize).expect("index in range");
    let mut phi = vec![C64::new(0.0, 0.0); d * d];
    let amp = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        let col = w.column_coefficient(i) * amp;
        let row = (w.x_mask() as usize) ^ i;
        phi[row * d + i] += col;
    }
    linalg::outer(&phi, &phi)
}

/// Accept projector of Bell difference sampling on six copies of an `n`-qubit
/// state: Bell measurements on copies (1,2) and (3,4) give `x, y`, then
/// `W_{x+y}^{⊗2}` is measured on copies (5,6) and `+1` accepts.
pub fn stabilizer_test_povm(n: usize) -> Result<Observable> {
    if n == 0 {
        return invalid_arg("stabilizer test needs n >= 1");
    }
    check_budget(
        "six-copy dimension",
        1u128 << (6 * n),
        DENSE_DIM_LIMIT as u128,
    )?;
    let paulis = 1u64 << (2 * n);
    let bells: Vec<ComplexMatrix> = (0..paulis).map(|x| bell_projector(n, x)).collect();
    let pair_dim = 1usize << (2 * n);
    let mut out = ComplexMatrix::zeros(1 << (6 * n), 1 << (6 * n));
    for a in 0..paulis {
        let mut q = ComplexMatrix::zeros(pair_dim * pair_dim, pair_dim * pair_dim);
        for x in 0..paulis {
            q += linalg::tensor(&bells[x as usize], &bells[(x ^ a) as usize]);
        }
        let w = PauliWeyl::all(n).nth(a as usize).expect("index in range");
        let ww = w.tensor(&w)?.dense();
        let p = (linalg::identity(pair_dim) + ww) * C64::new(0.5, 0.0);
        out += linalg::tensor(&q, &p);
    }
    Observable::dense(out)
}

/// Accepts iff the six-copy accept probability exceeds `1 − ε²/8`. Stabilizer
/// states are accepted with certainty and states at fidelity distance `ε`
/// from every stabilizer state with probability at most `1 − ε²/4`.
pub fn stabilizer_tester(
    oracle: &mut QStatOracle,
    n: usize,
    eps: f64,
) -> Result<LearnerResult<TestOutcome>> {
    if !(eps > 0.0 && eps <= 1.0) {
        return invalid_arg("distance must lie in (0, 1]");
    }
    let margin = eps * eps / 8.0;
    threshold_test(oracle, &stabilizer_test_povm(n)?, 1.0 - margin, margin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{haar_state, stabilizer_states};
    use crate::exec::stream_rng;
    use crate::oracles::{make_kqstat_oracle, make_qstat_oracle, NoisePolicy};
    use crate::qmath::states::DensityMatrix;

    #[test]
    fn bell_basis_is_complete() {
        for n in 1..=2 {
            let d = 1usize << (2 * n);
            let sum = (0..1u64 << (2 * n)).fold(ComplexMatrix::zeros(d, d), |acc, x| {
                acc + bell_projector(n, x)
            });
            assert!(linalg::max_abs_diff(&sum, &linalg::identity(d)) < 1e-12);
        }
    }

    #[test]
    fn povm_is_a_projector() {
        let p = stabilizer_test_povm(1).unwrap().matrix().unwrap();
        assert!(linalg::max_abs_diff(&(&p * &p), &p) < 1e-12);
    }

    #[test]
    fn stabilizer_states_always_pass() {
        let povm = stabilizer_test_povm(1).unwrap();
        for s in stabilizer_states(1).unwrap() {
            let v = povm.expectation_pure(&s.power(6).unwrap()).unwrap();
            assert!((v - 1.0).abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn far_states_are_penalized() {
        let povm = stabilizer_test_povm(1).unwrap();
        let stabs = stabilizer_states(1).unwrap();
        let mut rng = stream_rng(41, 0);
        for _ in 0..20 {
            let psi = haar_state(2, &mut rng);
            let eps2 = 1.0
                - stabs
                    .iter()
                    .map(|s| s.overlap_sqr(&psi))
                    .fold(0.0, f64::max);
            let v = povm.expectation_pure(&psi.power(6).unwrap()).unwrap();
            assert!(
                v <= 1.0 - eps2 / 4.0 + 1e-12,
                "accept {v} with eps^2 {eps2}"
            );
        }
    }

    #[test]
    fn promise_instances() {
        let mut rng = stream_rng(42, 0);
        for _ in 0..20 {
            let rho = purity_instance(4, 0.3, false, &mut rng)
                .unwrap()
                .to_density();
            assert!(rho.purity() <= 0.7 + 1e-12);
            let psi = haar_state(4, &mut rng);
            let phi = far_pure_state(&psi, 0.4, &mut rng).unwrap();
            assert!((1.0 - psi.overlap_sqr(&phi)).sqrt() >= 0.4 - 1e-12);
        }
        assert!(purity_instance(2, 0.6, false, &mut rng).is_err());
    }

    #[test]
    fn purity_and_identity_tests() {
        let psi = PureState::basis(2, 0);
        let mut o = make_kqstat_oracle(psi.clone(), 2, 0.1, NoisePolicy::Exact).unwrap();
        assert!(purity_tester(&mut o, 2, 0.5).unwrap().hypothesis.accept);
        let mut o = make_kqstat_oracle(
            DensityMatrix::maximally_mixed(2),
            2,
            0.1,
            NoisePolicy::Exact,
        )
        .unwrap();
        assert!(!purity_tester(&mut o, 2, 0.5).unwrap().hypothesis.accept);
        let mut o = make_qstat_oracle(PureState::basis(2, 1), 0.1, NoisePolicy::Exact).unwrap();
        let r = pure_state_tester(&mut o, &psi, 0.9).unwrap();
        assert!(!r.hypothesis.accept);
        assert_eq!(r.queries_used, 1);
    }
}
