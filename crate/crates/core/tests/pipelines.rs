use evalq::ensembles::{design_deviation, haar_state, single_qubit_cliffords, UnitaryEnsemble};
use evalq::exec::stream_rng;
use evalq::hardness::{
    bp_probe, state_variance, KCopyObservable, ParameterMeasure, ParametrizedModel,
};
use evalq::learners::{parity_learner, qpac_parity_state};
use evalq::oracles::{make_qstat_oracle, NoisePolicy};
use evalq::problems::{boost, boost_repetitions};
use evalq::qmath::{Observable, PauliWeyl};
use evalq::{Execution, MonteCarlo};
use rand::Rng;

#[test]
fn transcripts_are_reproducible() {
    let run = || {
        let psi = haar_state(4, &mut stream_rng(3, 0));
        let mut o = make_qstat_oracle(
            psi,
            0.1,
            NoisePolicy::SeededUniform {
                width: 0.1,
                seed: 9,
            },
        )
        .unwrap();
        for label in ["ZI", "XX", "YZ"] {
            o.query(&Observable::pauli(PauliWeyl::from_label(label).unwrap()))
                .unwrap();
        }
        let mut buf = Vec::new();
        o.export_transcript(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    };
    let a = run();
    assert_eq!(a, run());
    assert_eq!(a.lines().count(), 3);
    for line in a.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["digest"].as_str().unwrap().len(), 64);
    }
}

#[test]
fn boosted_parity_learning_under_noise() {
    let n = 6;
    let mut rng = stream_rng(11, 0);
    let s: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
    let sources = vec![s.clone()];
    let b = boost_repetitions(0.4, 0.05).unwrap();
    let out = boost(
        b,
        &sources,
        |a, t| a == t,
        |run| {
            let policy = NoisePolicy::SeededUniform {
                width: 0.2,
                seed: run as u64,
            };
            let mut o = make_qstat_oracle(qpac_parity_state(&s, n)?, 0.2, policy)?;
            let r = parity_learner(&mut o, n)?;
            Ok((r.hypothesis, r.queries_used))
        },
    )
    .unwrap();
    assert_eq!(out.target, s);
    assert_eq!(out.queries, b * n);
}

#[test]
fn variance_is_identical_across_execution_modes() {
    let o = KCopyObservable::pauli_power(&PauliWeyl::from_label("ZXI").unwrap(), 2).unwrap();
    let e = UnitaryEnsemble::CliffordUniform { n: 3 };
    let seq = state_variance(
        &e,
        &o,
        MonteCarlo::new(500, 4).with_exec(Execution::Sequential),
    )
    .unwrap();
    let par = state_variance(
        &e,
        &o,
        MonteCarlo::new(500, 4).with_exec(Execution::Parallel),
    )
    .unwrap();
    assert_eq!(seq, par);
    let mut csv = Vec::new();
    seq.write_csv(&mut csv, true).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 2);
}

#[test]
fn clifford_group_is_a_three_design_but_not_four() {
    let e = UnitaryEnsemble::uniform(single_qubit_cliffords()).unwrap();
    let d3 = design_deviation(&e, 3, 0, 1, Execution::Sequential).unwrap();
    let d4 = design_deviation(&e, 4, 0, 1, Execution::Sequential).unwrap();
    assert!(d3.value < 1e-10, "{d3:?}");
    assert!(d4.value > 1e-2, "{d4:?}");
}

#[test]
fn global_cost_concentrates_and_local_cost_does_not() {
    let mc = MonteCarlo::new(300, 21);
    let global = ParametrizedModel::self_learn_basis(6, 0).unwrap();
    let r = bp_probe(&global, ParameterMeasure::UniformAngles, 0.1, 0.05, 5, mc).unwrap();
    assert!(r.narrow_gorge, "{r:?}");
    assert!(r.audit_max_error < 1e-6);
    let local = ParametrizedModel::hardware_efficient(
        2,
        1,
        Observable::pauli(PauliWeyl::from_label("ZI").unwrap()),
    )
    .unwrap();
    let r = bp_probe(&local, ParameterMeasure::UniformAngles, 0.05, 0.05, 5, mc).unwrap();
    assert!(!r.barren_plateau, "{r:?}");
}
