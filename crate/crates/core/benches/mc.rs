use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use irs_mmse::channel::SystemConfig;
use irs_mmse::estimator::EstimatorKind;
use irs_mmse::mc::{run_point_with, Execution, PointOptions};

fn point(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_point");
    group.sample_size(10);
    let config = SystemConfig::normalized(8, 20, 20);
    let trials = 2_000;

    let mut modes = vec![("sequential", Execution::Sequential)];
    #[cfg(feature = "parallel")]
    modes.push(("parallel", Execution::Parallel { workers: None }));

    for (name, exec) in modes {
        group.bench_with_input(BenchmarkId::new(name, trials), &exec, |b, &exec| {
            b.iter(|| run_point_with(&config, EstimatorKind::Mmse, trials, PointOptions::default(), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, point);
criterion_main!(benches);
