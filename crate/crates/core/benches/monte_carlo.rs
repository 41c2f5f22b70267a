use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use evalq::ensembles::UnitaryEnsemble;
use evalq::hardness::{state_variance, KCopyObservable};
use evalq::qmath::PauliWeyl;
use evalq::{Execution, MonteCarlo};

fn variance(c: &mut Criterion) {
    let mut group = c.benchmark_group("haar_variance");
    group.sample_size(10);
    let o = KCopyObservable::pauli_power(&PauliWeyl::from_label("ZZIIXIII").unwrap(), 2).unwrap();
    let ensemble = UnitaryEnsemble::Haar { dim: 256 };
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(
            BenchmarkId::new(format!("{exec:?}"), 4096),
            &exec,
            |b, &exec| {
                b.iter(|| {
                    state_variance(&ensemble, &o, MonteCarlo::new(4096, 7).with_exec(exec)).unwrap()
                })
            },
        );
    }
    group.finish();
}

fn clifford(c: &mut Criterion) {
    let mut group = c.benchmark_group("clifford_variance");
    group.sample_size(10);
    let o = KCopyObservable::pauli_power(&PauliWeyl::from_label("ZIIIX").unwrap(), 2).unwrap();
    let ensemble = UnitaryEnsemble::CliffordUniform { n: 5 };
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(
            BenchmarkId::new(format!("{exec:?}"), 2048),
            &exec,
            |b, &exec| {
                b.iter(|| {
                    state_variance(&ensemble, &o, MonteCarlo::new(2048, 7).with_exec(exec)).unwrap()
                })
            },
        );
    }
    group.finish();
}

criterion_group!(benches, variance, clifford);
criterion_main!(benches);
