use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use opstable::exec::Execution;
use opstable::mc_oracle::{mc_price, SimConfig};
use opstable::{ContinuationMode, MarketModel, OptionContract};

fn mc_pricing(c: &mut Criterion) {
    let model =
        MarketModel::one_dimensional(1.7, 0.02, 1.0, 0.03, ContinuationMode::RealPart).unwrap();
    let opt = OptionContract::call(1.0, 0.25).unwrap();
    let mut group = c.benchmark_group("mc_price");
    group.sample_size(10);
    for n in [100_000usize, 400_000] {
        for exec in [Execution::Parallel, Execution::Sequential] {
            let cfg = SimConfig::new(n, 7).with_execution(exec);
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), n), &cfg, |b, cfg| {
                b.iter(|| mc_price(black_box(&model), &opt, 1.0, 0.0, cfg).unwrap().price)
            });
        }
    }
    group.finish();
}

criterion_group!(benches, mc_pricing);
criterion_main!(benches);
