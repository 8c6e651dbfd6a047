use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use treescramble::magnon::{evolve_magnon, time_grid};
use treescramble::quantum::{quench_entanglement, PartitionKind};
use treescramble::semiclassical::{run_sensitivity, SensitivityOptions};
use treescramble::{CouplingModel, Execution};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn trajectories(c: &mut Criterion) {
    let model = CouplingModel::periodic(128, 0.0).unwrap();
    let opts = SensitivityOptions {
        trajectories: 32,
        tmax: 1.0,
        ..SensitivityOptions::default()
    };
    let mut g = c.benchmark_group("semiclassical_n128_t32");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| run_sensitivity(&model, &opts, exec).unwrap())
        });
    }
    g.finish();
}

fn bipartitions(c: &mut Criterion) {
    let model = CouplingModel::periodic(12, 0.0).unwrap();
    let mut g = c.benchmark_group("min_entropy_n12_l6");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| {
                quench_entanglement(&model, &[1.0], &[6], &[PartitionKind::Arbitrary], exec)
                    .unwrap()
            })
        });
    }
    g.finish();
}

fn magnon(c: &mut Criterion) {
    let model = CouplingModel::periodic(1024, 0.0).unwrap();
    let times = time_grid(20.0, 0.02).unwrap();
    let mut g = c.benchmark_group("magnon_n1024");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| evolve_magnon(&model, 512, &times, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, trajectories, bipartitions, magnon);
criterion_main!(benches);
