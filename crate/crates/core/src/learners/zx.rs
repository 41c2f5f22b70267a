//! Learning ZX-Pauli strings from a stabilizer-state loss oracle.
//!
//! The hidden string is `P_x = ⊗_i (X if x_i else Z)` and the loss of a
//! stabilizer state `σ` is `½(tr[P_x σ] + 1)`, which lies in `{0, ½, 1}`.

use crate::ensembles::StabilizerGroup;
use crate::error::{invalid_arg, Error, Result};
use crate::oracles::{make_loss_oracle, LossOracle, LossTruth, NoisePolicy};
use crate::qmath::pauli::{PauliWeyl, MAX_PAULI_QUBITS};

use super::{Diagnostics, IterationRecord, LearnerResult};

/// `⊗_i (X if x_i else Z)`.
pub fn zx_string(x: &[bool]) -> Result<PauliWeyl> {
    let label: String = x.iter().map(|b| if *b { 'X' } else { 'Z' }).collect();
    PauliWeyl::from_label(&label)
}

/// Loss oracle for the hidden string `p` over maximal stabilizer groups.
pub fn zx_loss_oracle(
    p: PauliWeyl,
    tau: f64,
    policy: NoisePolicy,
) -> Result<LossOracle<StabilizerGroup>> {
    let truth = LossTruth::new(
        format!("zx_loss[{}]", p.label()),
        move |s: &StabilizerGroup| {
            if s.n() != p.n() || s.generators().len() != s.n() {
                return Err(Error::InvalidQuery(
                    "loss queries must be maximal stabilizer groups on n qubits".into(),
                ));
            }
            Ok(0.5 * (s.expectation(&p) + 1.0))
        },
    );
    make_loss_oracle(truth, tau, policy)
}

fn pauli_at(n: usize, letters: &[(usize, char)]) -> Result<PauliWeyl> {
    let mut label = vec!['I'; n];
    for (q, c) in letters {
        label[*q] = *c;
    }
    PauliWeyl::from_label(&label.into_iter().collect::<String>())
}

/// Conjugation by a Hadamard on qubit `q`.
fn hadamard_conjugate(p: &PauliWeyl, q: usize) -> Result<PauliWeyl> {
    let bit = 1u64 << (p.n() - 1 - q);
    let (x, z) = (p.x_mask(), p.z_mask());
    let sign = if x & z & bit != 0 {
        -p.sign()
    } else {
        p.sign()
    };
    let swap = |m: u64, o: u64| (m & !bit) | (o & bit);
    PauliWeyl::from_masks(p.n(), swap(x, z), swap(z, x), sign)
}

/// The parity group `S` and, for each qubit `i`, the groups `S_i^e`, `S_i^o`
/// that detect `x_i` for even and odd strings.
pub fn zx_query_groups(
    n: usize,
) -> Result<(StabilizerGroup, Vec<StabilizerGroup>, Vec<StabilizerGroup>)> {
    if n == 0 || n > MAX_PAULI_QUBITS {
        return invalid_arg(format!("ZX learning needs 1 <= n <= {MAX_PAULI_QUBITS}"));
    }
    let zall = PauliWeyl::from_label(&"Z".repeat(n))?;
    let pair = |j: usize, i: Option<usize>| -> Result<PauliWeyl> {
        match i {
            Some(i) if j + 1 == i => pauli_at(n, &[(j, 'Y'), (i, 'X')]),
            Some(i) if j == i => pauli_at(n, &[(i, 'X'), (i + 1, 'Y')]),
            _ => pauli_at(n, &[(j, 'Y'), (j + 1, 'Y')]),
        }
    };
    let build = |i: Option<usize>| -> Result<Vec<PauliWeyl>> {
        let mut gens = vec![zall];
        for j in 0..n - 1 {
            gens.push(pair(j, i)?);
        }
        Ok(gens)
    };
    let parity = StabilizerGroup::new(build(None)?)?;
    let mut even = Vec::with_capacity(n);
    let mut odd = Vec::with_capacity(n);
    for i in 0..n {
        let gens = build(Some(i))?;
        let odd_gens = if n == 1 {
            gens.clone()
        } else {
            let h = if i + 1 < n { i + 1 } else { i - 1 };
            gens.iter()
                .map(|g| hadamard_conjugate(g, h))
                .collect::<Result<Vec<_>>>()?
        };
        even.push(StabilizerGroup::new(gens)?);
        odd.push(StabilizerGroup::new(odd_gens)?);
    }
    Ok((parity, even, odd))
}

/// Reads `|tr[Pσ]|` from a loss response: `1` near `0` or `1`, `0` near `½`.
fn decode(v: f64, tau: f64, what: &str) -> Result<bool> {
    if v <= tau + 1e-12 || v >= 1.0 - tau - 1e-12 {
        Ok(true)
    } else if (v - 0.5).abs() <= tau + 1e-12 {
        Ok(false)
    } else {
        Err(Error::InconsistentResponse(format!(
            "loss {v} for {what} is within {tau} of none of 0, 1/2, 1"
        )))
    }
}

/// Recovers `x` with `n + 1` loss queries. Requires `τ < 1/4`.
pub fn zx_string_learner(
    oracle: &mut LossOracle<StabilizerGroup>,
    n: usize,
) -> Result<LearnerResult<Vec<bool>>> {
    let tau = oracle.tolerance();
    if !(tau < 0.25) {
        return invalid_arg("ZX learning needs tolerance below 1/4");
    }
    let (parity, even, odd) = zx_query_groups(n)?;
    let start = oracle.query_count();
    let mut diag = Diagnostics::default();
    let v = oracle.query(&parity)?;
    let is_even = decode(v, tau, "the parity query")?;
    diag.set("parity_response", v);
    let groups = if is_even { &even } else { &odd };
    let mut x = Vec::with_capacity(n);
    for (i, g) in groups.iter().enumerate() {
        let v = oracle.query(g)?;
        let in_group = decode(v, tau, &format!("bit {i}"))?;
        x.push(!in_group);
        diag.iterations.push(IterationRecord {
            step: i + 1,
            query: i,
            response: v,
            prediction: in_group as u8 as f64,
            gap: 0.0,
        });
    }
    let weight = x.iter().filter(|b| **b).count();
    if (weight % 2 == 0) != is_even {
        return Err(Error::InconsistentResponse(format!(
            "decoded string has weight {weight}, contradicting the parity query"
        )));
    }
    Ok(LearnerResult {
        hypothesis: x,
        queries_used: oracle.query_count() - start,
        success: true,
        diagnostics: diag,
    })
}
