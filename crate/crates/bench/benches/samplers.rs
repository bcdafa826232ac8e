use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use osnwalk::crawl::{CacheMode, Frontend};
use osnwalk::diagnostics::{gelman_rubin_r, geweke_z};
use osnwalk::estimators::{Binning, HistKind, Histogram};
use osnwalk::graph::{gen_synthetic, SyntheticModel};
use osnwalk::rng::{family, StreamFamily};
use osnwalk::samplers::{run_parallel_chains, select_seeds, Execution, Method};
use osnwalk_bench::planted_ba;

fn generators(c: &mut Criterion) {
    let mut group = c.benchmark_group("generate");
    group.sample_size(10);
    for n in [1_000usize, 10_000] {
        group.bench_with_input(BenchmarkId::new("ba_m5", n), &n, |b, &n| {
            b.iter(|| gen_synthetic(SyntheticModel::BarabasiAlbert { n, m: 5 }, 1, true).unwrap())
        });
    }
    group.finish();
}

fn walks(c: &mut Criterion) {
    let g = planted_ba(10_000, 5, 3);
    let seeds = select_seeds(&g, 8, 7).unwrap();
    let budget = 5_000;
    let mut group = c.benchmark_group("walk");
    group.sample_size(10);
    group.throughput(Throughput::Elements((seeds.len() * budget) as u64));
    for method in [Method::Rw, Method::Mhrw, Method::Bfs] {
        for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            group.bench_function(BenchmarkId::new(method.name(), name), |b| {
                b.iter(|| {
                    let fe = Frontend::new(&g, CacheMode::Shared);
                    run_parallel_chains(&fe, method, &seeds, budget, 7, exec).unwrap()
                })
            });
        }
    }
    group.finish();
}

fn uni(c: &mut Criterion) {
    let g = planted_ba(10_000, 5, 3);
    let mut group = c.benchmark_group("uni");
    group.sample_size(10);
    group.bench_function("1000_accepts", |b| {
        b.iter(|| {
            let fe = Frontend::new(&g, CacheMode::Shared);
            let mut rng = StreamFamily::new(1, family::UNI).split(0);
            osnwalk::samplers::uni_sample(&fe, 1000, 1 << 32, &mut rng).unwrap()
        })
    });
    group.finish();
}

fn diagnostics(c: &mut Criterion) {
    let chains: Vec<Vec<f64>> =
        (0..28).map(|i| (0..10_000).map(|t| ((t * 7919 + i * 104_729) % 1000) as f64).collect()).collect();
    c.bench_function("geweke_10k", |b| b.iter(|| geweke_z(&chains[0], 0.1, 0.5).unwrap()));
    c.bench_function("gelman_rubin_28x10k", |b| b.iter(|| gelman_rubin_r(&chains).unwrap()));
    c.bench_function("log_histogram_280k", |b| {
        let values: Vec<f64> = chains.iter().flatten().map(|v| v + 1.0).collect();
        b.iter(|| Histogram::from_values(&values, Binning::LOG10, HistKind::Pdf).unwrap())
    });
}

criterion_group!(benches, generators, walks, uni, diagnostics);
criterion_main!(benches);
