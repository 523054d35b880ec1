use std::hint::black_box;

use asos::bench::{run_bench, BenchConfig, Family};
use asos::relaxation::Method;
use criterion::{criterion_group, criterion_main, Criterion};

fn config(parallel: bool) -> BenchConfig {
    let mut cfg = BenchConfig::new(Family::BoxQp, 3, vec![Method::Lasserre, Method::Adaptive], 2);
    cfg.count = 8;
    cfg.seed = 1;
    cfg.parallel = parallel;
    cfg
}

fn batch(c: &mut Criterion) {
    let mut group = c.benchmark_group("boxqp_n3_x8");
    group.sample_size(20);
    for (name, parallel) in [("sequential", false), ("parallel", true)] {
        let cfg = config(parallel);
        group.bench_function(name, |b| b.iter(|| run_bench(black_box(&cfg)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, batch);
criterion_main!(benches);
