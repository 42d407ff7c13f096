use std::sync::Arc;

use amorph_core::bench::{run_episode, SimConfig};
use amorph_core::worldgen::generate;
use amorph_core::Method;
use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

fn episodes(c: &mut Criterion) {
    let sim = SimConfig::default();
    let map = Arc::new(generate(&sim.worldgen, 7).unwrap());
    let mut g = c.benchmark_group("episode");
    g.sample_size(20);
    for method in Method::ALL {
        for theta in [0.7, 0.2] {
            let mut seed = 0u64;
            g.bench_function(format!("{method} θ={theta}"), |b| {
                b.iter_batched(
                    || {
                        seed += 1;
                        seed
                    },
                    |s| run_episode(map.clone(), method, theta, s, &sim, |_| {}).unwrap(),
                    BatchSize::SmallInput,
                )
            });
        }
    }
    g.finish();
}

criterion_group!(benches, episodes);
criterion_main!(benches);
