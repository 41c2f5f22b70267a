use rand::Rng;
use serde::{Deserialize, Serialize};

use super::UnitaryEnsemble;
use crate::error::{check_budget, invalid_arg, Result};
use crate::exec::{self, mean_estimate, stream_rng, Estimate, Execution};
use crate::qmath::linalg::{self, ComplexMatrix, C64, DENSE_DIM_LIMIT};
use crate::qmath::states::{Observable, PureState};
use crate::qmath::symmetric::{symmetric_dimension, symmetric_projector_matrix};

/// Number of bootstrap replicates behind a design-deviation error bar.
pub const BOOTSTRAP_REPLICATES: usize = 16;

/// Estimate of the state moment `E[ρ(U)^{⊗t}]` and of requested
/// functionals `tr[O K]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentEstimate {
    pub t: usize,
    /// Full operator, present when `N^t` fits the dense budget.
    pub operator: Option<ComplexMatrix>,
    pub functionals: Vec<Estimate>,
    pub samples: usize,
    /// Largest functional standard error (0 for exact enumerations).
    pub standard_error: f64,
}

/// Trace-norm distance between an empirical moment and the Haar moment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignDeviation {
    pub value: f64,
    /// Bootstrap standard deviation of the statistic.
    pub stderr: f64,
    pub samples: usize,
}

fn moment_dim(n: usize, t: usize) -> Result<usize> {
    let d = (n as u128).checked_pow(t as u32).unwrap_or(u128::MAX);
    check_budget("moment operator dimension", d, DENSE_DIM_LIMIT as u128)?;
    Ok(d as usize)
}

/// `binom(N+t-1, t)^{-1} P_sym`, the `t`-th moment of Haar random states.
pub fn haar_state_moment(n: usize, t: usize) -> Result<ComplexMatrix> {
    if n < 1 || t < 1 {
        return invalid_arg("haar_state_moment needs N >= 1 and t >= 1");
    }
    moment_dim(n, t)?;
    let p = symmetric_projector_matrix(n, t)?;
    Ok(p / C64::new(symmetric_dimension(n, t), 0.0))
}

/// `E_U[U⊗U A U†⊗U†]` over Haar `U(N)`, from the symmetric and
/// antisymmetric projectors.
pub fn second_moment_channel(a: &ComplexMatrix, n: usize) -> Result<ComplexMatrix> {
    if n < 2 {
        return invalid_arg("second moment channel needs N >= 2");
    }
    linalg::check_dims(n * n, linalg::check_square(a)?)?;
    let p_sym = symmetric_projector_matrix(n, 2)?;
    let p_anti = linalg::identity(n * n) - &p_sym;
    let nf = n as f64;
    let c_sym = linalg::trace_product(a, &p_sym) * (2.0 / (nf * (nf + 1.0)));
    let c_anti = linalg::trace_product(a, &p_anti) * (2.0 / (nf * (nf - 1.0)));
    Ok(p_sym * c_sym + p_anti * c_anti)
}

fn power_vectors(states: &[PureState], t: usize) -> Result<Vec<Vec<C64>>> {
    states
        .iter()
        .map(|s| s.power(t).map(PureState::into_amplitudes))
        .collect()
}

/// `Σ_i w_i |v_i⟩⟨v_i|`, accumulated in blocks.
fn weighted_gram(vs: &[Vec<C64>], weights: &[f64]) -> ComplexMatrix {
    let d = vs[0].len();
    let mut acc = ComplexMatrix::zeros(d, d);
    const BLOCK: usize = 256;
    for (chunk, ws) in vs.chunks(BLOCK).zip(weights.chunks(BLOCK)) {
        let m = ComplexMatrix::from_fn(d, chunk.len(), |r, c| chunk[c][r] * ws[c].sqrt());
        acc += &m * m.adjoint();
    }
    acc
}

/// Coordinates of `|ψ⟩^{⊗t}` in the orthonormal basis of the symmetric
/// subspace indexed by multisets `i_1 ≤ … ≤ i_t`.
fn symmetric_coordinates(psi: &[C64], t: usize) -> Vec<C64> {
    let n = psi.len();
    let t_fact: f64 = (1..=t).map(|x| x as f64).product();
    let mut idx = vec![0usize; t];
    let mut out = Vec::new();
    loop {
        // Amplitude times sqrt(t! / Π k_j!) for the multiplicities k_j.
        let (mut amp, mut denom, mut run) = (linalg::ONE, 1.0, 0);
        for j in 0..t {
            amp *= psi[idx[j]];
            run = if j > 0 && idx[j] == idx[j - 1] {
                run + 1
            } else {
                1
            };
            denom *= run as f64;
        }
        out.push(amp * (t_fact / denom).sqrt());
        let mut j = t;
        loop {
            if j == 0 {
                return out;
            }
            j -= 1;
            if idx[j] + 1 < n {
                break;
            }
        }
        let v = idx[j] + 1;
        idx[j..].iter_mut().for_each(|x| *x = v);
    }
}

fn sample_states(
    ensemble: &UnitaryEnsemble,
    input: &PureState,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<PureState>> {
    exec::sample_many(exec, seed, samples, |rng| ensemble.sample_state(input, rng))
        .into_iter()
        .collect()
}

/// Exact moment of a finite ensemble.
pub fn exact_moment(
    ensemble: &UnitaryEnsemble,
    t: usize,
    input: &PureState,
) -> Result<ComplexMatrix> {
    moment_dim(ensemble.dim(), t)?;
    let Some(states) = ensemble.enumerate_states(input) else {
        return invalid_arg("exact moments need an explicit ensemble");
    };
    let (ws, ss): (Vec<f64>, Vec<PureState>) = states?.into_iter().unzip();
    Ok(weighted_gram(&power_vectors(&ss, t)?, &ws))
}

/// Moment `E[(U|ψ⟩⟨ψ|U†)^{⊗t}]` with functionals `tr[O_j K]`.
///
/// Finite ensembles are enumerated exactly; others are sampled with the
/// seeded-stream contract of [`crate::exec`].
pub fn empirical_moment(
    ensemble: &UnitaryEnsemble,
    t: usize,
    input: &PureState,
    samples: usize,
    functionals: &[Observable],
    seed: u64,
    exec: Execution,
) -> Result<MomentEstimate> {
    if t == 0 {
        return invalid_arg("moment order must be positive");
    }
    let big_d = (ensemble.dim() as u128)
        .checked_pow(t as u32)
        .unwrap_or(u128::MAX);
    for o in functionals {
        linalg::check_dims(big_d.min(usize::MAX as u128) as usize, o.dim())?;
    }
    let dense_ok = big_d <= DENSE_DIM_LIMIT as u128;

    let (weights, states) = match ensemble.enumerate_states(input) {
        Some(list) => list?.into_iter().unzip(),
        None => {
            if samples < 2 {
                return invalid_arg("empirical moments need at least 2 samples");
            }
            let s = sample_states(ensemble, input, samples, seed, exec)?;
            (vec![1.0 / samples as f64; samples], s)
        }
    };
    let exact = ensemble.enumerate_states(input).is_some();
    let vs = power_vectors(&states, t)?;

    let functionals: Vec<Estimate> = functionals
        .iter()
        .map(|o| {
            let vals: Vec<f64> = vs.iter().map(|v| o.expectation_vec(v)).collect();
            if exact {
                Estimate::exact(vals.iter().zip(&weights).map(|(v, w)| v * w).sum())
            } else {
                mean_estimate(&vals)
            }
        })
        .collect();
    let standard_error = functionals.iter().map(|e| e.stderr).fold(0.0, f64::max);
    Ok(MomentEstimate {
        t,
        operator: dense_ok.then(|| weighted_gram(&vs, &weights)),
        functionals,
        samples: states.len(),
        standard_error,
    })
}

/// `‖K_emp − K_Haar‖_tr` for state moments of order `t` from `|0⟩`, with a
/// bootstrap error bar. Finite ensembles are enumerated exactly.
pub fn design_deviation(
    ensemble: &UnitaryEnsemble,
    t: usize,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<DesignDeviation> {
    let n = ensemble.dim();
    if t == 0 {
        return invalid_arg("moment order must be positive");
    }
    check_budget(
        "symmetric subspace dimension",
        symmetric_dimension(n, t) as u128,
        DENSE_DIM_LIMIT as u128,
    )?;
    let input = PureState::basis(n, 0);
    if let Some(list) = ensemble.enumerate_states(&input) {
        let haar = haar_state_moment(n, t)?;
        let (ws, ss): (Vec<f64>, Vec<PureState>) = list?.into_iter().unzip();
        let k = weighted_gram(&power_vectors(&ss, t)?, &ws);
        return Ok(DesignDeviation {
            value: linalg::trace_norm(&(k - haar)),
            stderr: 0.0,
            samples: ss.len(),
        });
    }
    if samples < 2 {
        return invalid_arg("design deviation needs at least 2 samples");
    }
    // Both moments live on the symmetric subspace, where the Haar moment is
    // the normalized identity.
    let states = sample_states(ensemble, &input, samples, seed, exec)?;
    let vs: Vec<Vec<C64>> = states
        .iter()
        .map(|s| symmetric_coordinates(s.amplitudes(), t))
        .collect();
    let dsym = vs[0].len();
    let haar = linalg::identity(dsym) / C64::new(dsym as f64, 0.0);
    let uniform = vec![1.0 / samples as f64; samples];
    let value = linalg::trace_norm(&(weighted_gram(&vs, &uniform) - &haar));
    let replicates = exec::map_indexed(exec, BOOTSTRAP_REPLICATES, |b| {
        let mut rng = stream_rng(seed ^ 0xb007_57a9, b as u64);
        let mut counts = vec![0.0; samples];
        for _ in 0..samples {
            counts[rng.random_range(0..samples)] += 1.0 / samples as f64;
        }
        linalg::trace_norm(&(weighted_gram(&vs, &counts) - &haar))
    });
    let stderr = exec::variance_estimate(&replicates).value.max(0.0).sqrt();
    Ok(DesignDeviation {
        value,
        stderr,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{haar, single_qubit_cliffords, GateSet};
    use crate::qmath::linalg::{identity, max_abs_diff, trace};
    use crate::qmath::symmetric::flip_operator;

    #[test]
    fn haar_moment_closed_forms() {
        for n in 2..5 {
            let k1 = haar_state_moment(n, 1).unwrap();
            assert!(max_abs_diff(&k1, &(identity(n) / C64::new(n as f64, 0.0))) < 1e-14);
            let k2 = haar_state_moment(n, 2).unwrap();
            let f = flip_operator(n).unwrap().matrix().unwrap();
            let expect = (identity(n * n) + f) / C64::new((n * (n + 1)) as f64, 0.0);
            assert!(max_abs_diff(&k2, &expect) < 1e-14);
            assert!((trace(&haar_state_moment(n, 3).unwrap()).re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn second_moment_fixed_points() {
        for n in 2..4 {
            let id = identity(n * n);
            assert!(max_abs_diff(&second_moment_channel(&id, n).unwrap(), &id) < 1e-12);
            let f = flip_operator(n).unwrap().matrix().unwrap();
            assert!(max_abs_diff(&second_moment_channel(&f, n).unwrap(), &f) < 1e-12);
        }
        assert!(second_moment_channel(&identity(8), 2).is_err());
    }

    #[test]
    fn second_moment_matches_monte_carlo() {
        let n = 2;
        let mut rng = stream_rng(21, 0);
        let a = haar::random_hermitian(4, &mut rng);
        let exact = second_moment_channel(&a, n).unwrap();
        let samples = 10_000;
        let mut entries: Vec<Vec<f64>> = (0..16).map(|_| Vec::with_capacity(samples)).collect();
        for _ in 0..samples {
            let u = haar::sample_haar(n, &mut rng).unwrap();
            let uu = linalg::tensor(&u, &u);
            let m = &uu * &a * uu.adjoint();
            for (k, z) in m.iter().enumerate() {
                entries[k].push(z.re);
            }
        }
        for (k, vals) in entries.iter().enumerate() {
            let e = mean_estimate(vals);
            assert!(
                (e.value - exact[k].re).abs() <= 3.0 * e.stderr + 1e-12,
                "entry {k}"
            );
        }
    }

    #[test]
    fn point_ensemble_is_exact() {
        let e = UnitaryEnsemble::uniform(vec![linalg::hadamard()]).unwrap();
        let zero = PureState::basis(2, 0);
        let m = empirical_moment(&e, 2, &zero, 0, &[], 0, Execution::Sequential).unwrap();
        let plus = zero.apply(&linalg::hadamard()).unwrap().power(2).unwrap();
        let expect = linalg::outer(plus.amplitudes(), plus.amplitudes());
        assert!(max_abs_diff(m.operator.as_ref().unwrap(), &expect) < 1e-14);
        assert_eq!(m.standard_error, 0.0);

        let id = UnitaryEnsemble::uniform(vec![identity(2)]).unwrap();
        let d = design_deviation(&id, 1, 0, 0, Execution::Sequential).unwrap();
        assert!((d.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clifford_group_is_exact_design() {
        let e = UnitaryEnsemble::uniform(single_qubit_cliffords()).unwrap();
        for t in 1..=3 {
            let d = design_deviation(&e, t, 0, 0, Execution::Sequential).unwrap();
            assert!(d.value < 1e-12, "t={t}: {}", d.value);
        }
        assert!(
            design_deviation(&e, 4, 0, 0, Execution::Sequential)
                .unwrap()
                .value
                > 1e-3
        );
    }

    #[test]
    fn haar_first_moment_within_error() {
        let e = UnitaryEnsemble::Haar { dim: 2 };
        let z = Observable::dense(linalg::pauli_z()).unwrap();
        let m = empirical_moment(
            &e,
            1,
            &PureState::basis(2, 0),
            4000,
            &[z],
            5,
            Execution::Parallel,
        )
        .unwrap();
        let f = m.functionals[0];
        assert!(f.value.abs() <= 3.0 * f.stderr);
        let k = m.operator.unwrap();
        assert!((k[(0, 0)].re - 0.5).abs() < 0.03);
    }

    #[test]
    fn symmetric_coordinates_preserve_overlaps() {
        let mut rng = stream_rng(4, 0);
        let a = haar::haar_state(3, &mut rng);
        let b = haar::haar_state(3, &mut rng);
        for t in 1..=3 {
            let ca = symmetric_coordinates(a.amplitudes(), t);
            let cb = symmetric_coordinates(b.amplitudes(), t);
            assert!((ca.len() as f64 - symmetric_dimension(3, t)).abs() < 1e-9);
            let direct = a.inner(&b).powu(t as u32);
            assert!((linalg::inner(&ca, &cb) - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn execution_modes_agree() {
        let e = UnitaryEnsemble::Brickwork {
            n: 2,
            depth: 2,
            gateset: GateSet::Haar4,
        };
        let a = design_deviation(&e, 2, 300, 17, Execution::Sequential).unwrap();
        let b = design_deviation(&e, 2, 300, 17, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
