//! Mirror-descent learners for linear evaluation families.
//!
//! Each round looks for a pool query whose response differs from the current
//! hypothesis by more than `2τ/3` and steps along that query. The run ends when
//! no pool query distinguishes the hypothesis, which certifies it against
//! every query in the pool.

use std::f64::consts::LN_2;

use crate::error::{invalid_arg, Error, Result};
use crate::oracles::{QStatOracle, StatOracle};
use crate::qmath::linalg::{self, C64};
use crate::qmath::states::{DensityMatrix, Observable};

use super::mirror::{md_update, Constraint, MDState, MirrorMap, Point};
use super::{Diagnostics, IterationRecord, LearnerResult};

/// `T = ⌈18 r / (ζ τ²)⌉` updates suffice for radius `r = max D(s, f₁)`.
pub fn update_budget(radius: f64, zeta: f64, tau: f64) -> Result<usize> {
    if !(radius >= 0.0 && radius.is_finite()) || !(zeta > 0.0) || !(tau > 0.0) {
        return invalid_arg("update budget needs finite radius and positive zeta, tau");
    }
    Ok((18.0 * radius / (zeta * tau * tau)).ceil().max(1.0) as usize)
}

/// `max_s KL(s ‖ uniform)` in nats over a family of distributions.
pub fn kl_radius(family: &[Vec<f64>]) -> Result<f64> {
    let first = family
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty family".into()))?;
    let n = first.len() as f64;
    let mut radius: f64 = 0.0;
    for p in family {
        if p.len() != first.len() {
            return invalid_arg("family members must share a support");
        }
        let h: f64 = p.iter().filter(|x| **x > 0.0).map(|x| -x * x.ln()).sum();
        radius = radius.max(n.ln() - h);
    }
    Ok(radius)
}

fn check_tolerance(oracle_tau: f64, tau: f64) -> Result<()> {
    if !(tau > 0.0) {
        return invalid_arg("target tolerance must be positive");
    }
    if oracle_tau > tau / 3.0 + 1e-12 {
        return invalid_arg(format!(
            "oracle tolerance {oracle_tau} exceeds tau/3 = {}",
            tau / 3.0
        ));
    }
    Ok(())
}

/// Shared loop: `respond(j)` queries pool item `j`, `predict(f, j)` evaluates
/// the hypothesis and `direction(j, sign)` is the loss gradient `±φ_j`.
fn run<R, P, D>(
    mut state: MDState,
    pool_len: usize,
    tau: f64,
    budget: usize,
    mut respond: R,
    predict: P,
    direction: D,
) -> Result<(MDState, Diagnostics)>
where
    R: FnMut(usize) -> Result<f64>,
    P: Fn(&Point, usize) -> Result<f64>,
    D: Fn(usize, f64) -> Point,
{
    if pool_len == 0 {
        return invalid_arg("query pool is empty");
    }
    let mut cache: Vec<Option<f64>> = vec![None; pool_len];
    let mut diag = Diagnostics::default();
    loop {
        let mut worst: Option<(usize, f64, f64)> = None;
        for (j, slot) in cache.iter_mut().enumerate() {
            let v = match *slot {
                Some(v) => v,
                None => {
                    let v = respond(j)?;
                    *slot = Some(v);
                    v
                }
            };
            let pred = predict(&state.iterate, j)?;
            if worst.is_none_or(|(_, w, p)| (v - pred).abs() > (w - p).abs()) {
                worst = Some((j, v, pred));
            }
        }
        let (j, v, pred) = worst.expect("pool is non-empty");
        let gap = (v - pred).abs();
        if gap <= 2.0 * tau / 3.0 {
            diag.set("certificate_max_gap", gap);
            break;
        }
        if state.t >= budget {
            return Err(Error::LearnerFailure(format!(
                "no certificate after {budget} updates; the oracle or the radius is inconsistent"
            )));
        }
        let sign = if pred > v { 1.0 } else { -1.0 };
        state = md_update(&state, &direction(j, sign))?;
        diag.iterations.push(IterationRecord {
            step: state.t,
            query: j,
            response: v,
            prediction: pred,
            gap,
        });
    }
    diag.set("updates", state.t as f64);
    diag.set("update_budget", budget as f64);
    diag.set("eta", state.eta);
    Ok((state, diag))
}

/// Learns a distribution on `[N]` from a `τ/3` statistical oracle so that
/// every pool query is answered within `τ` by the hypothesis.
pub fn mw_distribution_learner(
    oracle: &mut StatOracle,
    pool: &[Vec<f64>],
    radius: f64,
    tau: f64,
) -> Result<LearnerResult<Vec<f64>>> {
    check_tolerance(oracle.tolerance(), tau)?;
    let n = pool.first().map(|p| p.len()).unwrap_or(0);
    if n == 0 || pool.iter().any(|p| p.len() != n) {
        return invalid_arg("pool queries must share a non-empty support");
    }
    if pool
        .iter()
        .any(|p| p.iter().any(|x| !(x.abs() <= 1.0 + 1e-12)))
    {
        return invalid_arg("pool queries must take values in [-1, 1]");
    }
    let map = MirrorMap::NegEntropy;
    let eta = tau * map.zeta() / 3.0;
    let budget = update_budget(radius, map.zeta(), tau)?;
    let start = oracle.query_count();
    let state = MDState::new(map, Constraint::Simplex, Point::uniform(n), eta)?;
    let (state, mut diag) = run(
        state,
        pool.len(),
        tau,
        budget,
        |j| oracle.query(&pool[j]),
        |f, j| Point::Vector(pool[j].clone()).pair(f),
        |j, s| Point::Vector(pool[j].iter().map(|x| s * x).collect()),
    )?;
    diag.set("radius", radius);
    let Point::Vector(p) = state.iterate else {
        unreachable!()
    };
    Ok(LearnerResult {
        hypothesis: p,
        queries_used: oracle.query_count() - start,
        success: true,
        diagnostics: diag,
    })
}

/// Learns a state from a `τ/3` quantum statistical oracle so that every pool
/// observable is predicted within `τ`.
pub fn mmw_state_learner(
    oracle: &mut QStatOracle,
    pool: &[Observable],
    tau: f64,
) -> Result<LearnerResult<DensityMatrix>> {
    check_tolerance(oracle.tolerance(), tau)?;
    let dim = pool.first().map(|o| o.dim()).unwrap_or(0);
    if dim == 0 || pool.iter().any(|o| o.dim() != dim) {
        return invalid_arg("pool observables must share a dimension");
    }
    for o in pool {
        o.check_query_norm()?;
    }
    let mats = pool
        .iter()
        .map(|o| o.matrix())
        .collect::<Result<Vec<_>>>()?;
    let map = MirrorMap::VonNeumann;
    let eta = tau * map.zeta() / 3.0;
    let radius = (dim as f64).log2();
    let budget = update_budget(radius, map.zeta(), tau)?;
    let start = oracle.query_count();
    let state = MDState::new(
        map,
        Constraint::DensityMatrices,
        Point::maximally_mixed(dim),
        eta,
    )?;
    let (state, mut diag) = run(
        state,
        pool.len(),
        tau,
        budget,
        |j| oracle.query(&pool[j]),
        |f, j| Ok(linalg::trace_product(&mats[j], f.as_matrix().expect("matrix iterate")).re),
        |j, s| Point::Hermitian(&mats[j] * C64::new(s, 0.0)),
    )?;
    diag.set("radius", radius);
    diag.set("radius_nats", radius * LN_2);
    let Point::Hermitian(m) = state.iterate else {
        unreachable!()
    };
    Ok(LearnerResult {
        hypothesis: DensityMatrix::new(linalg::hermitian_part(&m))?,
        queries_used: oracle.query_count() - start,
        success: true,
        diagnostics: diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::stream_rng;
    use crate::oracles::{make_qstat_oracle, make_stat_oracle, NoisePolicy};
    use crate::qmath::pauli::PauliWeyl;
    use rand::Rng;

    fn sign_pool(n: usize) -> Vec<Vec<f64>> {
        (0..1usize << n)
            .map(|m| {
                (0..n)
                    .map(|i| if m >> i & 1 == 1 { 1.0 } else { -1.0 })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn radius_of_point_mass() {
        let r = kl_radius(&[vec![1.0, 0.0, 0.0, 0.0], vec![0.25; 4]]).unwrap();
        assert!((r - 4f64.ln()).abs() < 1e-15);
        assert_eq!(update_budget(1.0, 1.0, 0.5).unwrap(), 72);
    }

    #[test]
    fn learns_distribution_within_tau() {
        let mut rng = stream_rng(51, 0);
        let tau = 0.1;
        let w: Vec<f64> = (0..6).map(|_| rng.random::<f64>()).collect();
        let z: f64 = w.iter().sum();
        let p: Vec<f64> = w.iter().map(|x| x / z).collect();
        let pool = sign_pool(6);
        let radius = kl_radius(std::slice::from_ref(&p)).unwrap();
        let mut o =
            make_stat_oracle(p.clone(), tau / 3.0, NoisePolicy::default_for(tau / 3.0)).unwrap();
        let r = mw_distribution_learner(&mut o, &pool, radius, tau).unwrap();
        for phi in &pool {
            let truth: f64 = phi.iter().zip(&p).map(|(a, b)| a * b).sum();
            let pred: f64 = phi.iter().zip(&r.hypothesis).map(|(a, b)| a * b).sum();
            assert!((truth - pred).abs() <= tau + 1e-12);
        }
        assert!(r.queries_used <= pool.len());
        assert!(r.diagnostics.values["updates"] <= r.diagnostics.values["update_budget"]);
    }

    #[test]
    fn learns_qubit_state_on_pauli_pool() {
        let tau = 0.15;
        let psi = crate::ensembles::haar_state(4, &mut stream_rng(52, 0));
        let pool: Vec<Observable> = PauliWeyl::all(2).skip(1).map(Observable::pauli).collect();
        let mut o = make_qstat_oracle(psi.clone(), tau / 3.0, NoisePolicy::Exact).unwrap();
        let r = mmw_state_learner(&mut o, &pool, tau).unwrap();
        for obs in &pool {
            let truth = obs.expectation_pure(&psi).unwrap();
            let pred = crate::qmath::states::expectation(&r.hypothesis, obs).unwrap();
            assert!((truth - pred).abs() <= tau + 1e-9);
        }
    }

    #[test]
    fn loose_oracle_is_rejected() {
        let mut o = make_stat_oracle(vec![0.5, 0.5], 0.1, NoisePolicy::Exact).unwrap();
        assert!(mw_distribution_learner(&mut o, &sign_pool(2), 1.0, 0.1).is_err());
    }
}
