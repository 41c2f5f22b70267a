//! Parity learning from quantum example states with `n` queries.

use crate::error::{invalid_arg, Error, Result};
use crate::oracles::QStatOracle;
use crate::qmath::linalg::C64;
use crate::qmath::states::{Frame, Observable, PureState};

use super::{Diagnostics, IterationRecord, LearnerResult};

/// Largest `n` handled by the dense parity routines.
pub const MAX_PARITY_BITS: usize = 20;

fn check_bits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_PARITY_BITS {
        return invalid_arg(format!("parity learning needs 1 <= n <= {MAX_PARITY_BITS}"));
    }
    Ok(())
}

/// `2^{-n/2} Σ_x |x, s·x⟩` on `n + 1` qubits, label qubit last.
pub fn qpac_parity_state(s: &[bool], n: usize) -> Result<PureState> {
    check_bits(n)?;
    if s.len() != n {
        return invalid_arg("secret must have n bits");
    }
    let amp = C64::new((0.5f64).powf(n as f64 / 2.0), 0.0);
    let mut amps = vec![C64::new(0.0, 0.0); 1 << (n + 1)];
    for x in 0..1usize << n {
        let label = (0..n)
            .filter(|i| s[*i] && (x >> (n - 1 - i)) & 1 == 1)
            .count()
            & 1;
        amps[(x << 1) | label] = amp;
    }
    PureState::new(amps)
}

/// `2 Π_i − I`, where `Π_i` projects onto `y_i = 1` and label `1` after
/// `H^{⊗(n+1)}`. Its value is `−1` when `s_i = 0` and `0` when `s_i = 1`.
pub fn parity_observable(n: usize, i: usize) -> Result<Observable> {
    check_bits(n)?;
    if i >= n {
        return invalid_arg("bit index out of range");
    }
    let mask = 1usize << (n - i);
    let diag = (0..1usize << (n + 1))
        .map(|y| {
            if y & 1 == 1 && y & mask != 0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    Observable::diagonal(diag, Frame::Hadamard)
}

/// Recovers the secret `s` from the oracle of `|ψ_s⟩` with `n` queries.
/// Requires tolerance `τ < 1/4`.
pub fn parity_learner(oracle: &mut QStatOracle, n: usize) -> Result<LearnerResult<Vec<bool>>> {
    check_bits(n)?;
    let tau = oracle.tolerance();
    if !(tau < 0.25) {
        return invalid_arg("parity learning needs tolerance below 1/4");
    }
    let start = oracle.query_count();
    let mut diag = Diagnostics::default();
    let mut s = Vec::with_capacity(n);
    for i in 0..n {
        let v = oracle.query(&parity_observable(n, i)?)?;
        let bit = v > -0.5;
        let expected = if bit { 0.0 } else { -1.0 };
        if (v - expected).abs() > tau + 1e-12 {
            return Err(Error::InconsistentResponse(format!(
                "response {v} to bit {i} is within {tau} of neither -1 nor 0"
            )));
        }
        diag.iterations.push(IterationRecord {
            step: i,
            query: i,
            response: v,
            prediction: expected,
            gap: (v - expected).abs(),
        });
        s.push(bit);
    }
    diag.set("tolerance", tau);
    Ok(LearnerResult {
        hypothesis: s,
        queries_used: oracle.query_count() - start,
        success: true,
        diagnostics: diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{make_qstat_oracle, NoisePolicy};

    #[test]
    fn observable_values_match_secret() {
        let s = [true, false, true];
        let psi = qpac_parity_state(&s, 3).unwrap();
        for (i, bit) in s.iter().enumerate() {
            let v = parity_observable(3, i)
                .unwrap()
                .expectation_pure(&psi)
                .unwrap();
            assert!((v - if *bit { 0.0 } else { -1.0 }).abs() < 1e-12);
        }
    }

    #[test]
    fn recovers_zero_secret() {
        let psi = qpac_parity_state(&[false; 4], 4).unwrap();
        let mut o = make_qstat_oracle(psi, 0.2, NoisePolicy::Exact).unwrap();
        let r = parity_learner(&mut o, 4).unwrap();
        assert_eq!(r.hypothesis, vec![false; 4]);
        assert_eq!(r.queries_used, 4);
    }

    #[test]
    fn rejects_large_tolerance() {
        let psi = qpac_parity_state(&[true], 1).unwrap();
        let mut o = make_qstat_oracle(psi, 0.25, NoisePolicy::Exact).unwrap();
        assert!(parity_learner(&mut o, 1).is_err());
        assert_eq!(o.query_count(), 0);
    }
}
