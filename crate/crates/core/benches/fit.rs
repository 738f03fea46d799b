//! One outer round and a full fit, on a single thread versus the default
//! rayon pool. Without the `parallel` feature only the single-threaded
//! variant runs.
//!
//! Run with: cargo bench -p one-core

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use one_core::one::{fit, initialize, run_round, HyperParams, LossWeights};
use one_core::seeder::{seed_outliers, synth_network, SeedingPlan, SynthConfig};
use one_core::AttributedNetwork;

fn network(n_nodes: usize, n_attrs: usize) -> AttributedNetwork {
    let cfg = SynthConfig {
        n_nodes,
        n_attrs,
        p_in: 15.0 / n_nodes as f64,
        p_out: 1.5 / n_nodes as f64,
        ..SynthConfig::default()
    };
    let net = synth_network(&cfg).expect("valid config");
    seed_outliers(&net, &SeedingPlan::default()).expect("labeled").network
}

/// Runs closures on a dedicated pool, or inline without rayon.
struct Runner {
    name: &'static str,
    #[cfg(feature = "parallel")]
    pool: rayon::ThreadPool,
}

impl Runner {
    fn run<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        #[cfg(feature = "parallel")]
        {
            self.pool.install(f)
        }
        #[cfg(not(feature = "parallel"))]
        {
            f()
        }
    }
}

#[cfg(feature = "parallel")]
fn runners() -> Vec<Runner> {
    let pool = |threads| rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("pool");
    vec![
        Runner { name: "sequential", pool: pool(1) },
        // Zero means rayon's default size.
        Runner { name: "parallel", pool: pool(0) },
    ]
}

#[cfg(not(feature = "parallel"))]
fn runners() -> Vec<Runner> {
    vec![Runner { name: "sequential" }]
}

fn bench_round(c: &mut Criterion) {
    let mut group = c.benchmark_group("round");
    group.sample_size(10);
    for (n, d) in [(300, 300), (1000, 1000)] {
        let net = network(n, d);
        let hp = HyperParams::for_network(&net).expect("labels");
        let (model, scores) = initialize(&net, &hp).expect("init");
        let weights = LossWeights::default();
        for runner in runners() {
            group.bench_with_input(BenchmarkId::new(runner.name, n), &n, |b, _| {
                b.iter(|| {
                    let (mut m, mut s) = (model.clone(), scores.clone());
                    runner
                        .run(|| run_round(net.adjacency(), net.attributes(), &mut m, &mut s, weights, &hp))
                        .expect("round");
                    black_box(m)
                })
            });
        }
    }
    group.finish();
}

fn bench_fit(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit");
    group.sample_size(10);
    let net = network(300, 300);
    let hp = HyperParams::for_network(&net).expect("labels");
    for runner in runners() {
        group.bench_function(runner.name, |b| b.iter(|| black_box(runner.run(|| fit(&net, &hp).expect("fit")))));
    }
    group.finish();
}

criterion_group!(benches, bench_round, bench_fit);
criterion_main!(benches);
