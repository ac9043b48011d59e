use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cascade_nfn::{
    generate_lorenz, CascadeConfig, CascadeNetwork, Dataset, Execution, Learner, LorenzConfig,
    NeuronTemplate,
};

fn network(hs: &[usize], cascades: usize) -> CascadeNetwork {
    let pool = hs
        .iter()
        .map(|&h| NeuronTemplate::new(h, Learner::Rls))
        .collect();
    let mut cfg = CascadeConfig::new(3, 3, pool);
    cfg.max_cascades = cascades;
    let mut net = CascadeNetwork::new(cfg).unwrap();
    while net.cascades().len() < cascades {
        net.grow().unwrap();
    }
    net
}

fn lorenz() -> Dataset {
    let cfg = LorenzConfig {
        n_samples: 2001,
        ..LorenzConfig::default()
    };
    Dataset::normalize(&generate_lorenz(&cfg).unwrap()).unwrap()
}

fn step(c: &mut Criterion) {
    let data = lorenz();
    let pairs = data.pairs(0, 2000).unwrap();
    let mut group = c.benchmark_group("step");
    for (label, hs, cascades) in [
        ("q3_m1", &[3, 5, 7][..], 1),
        ("q3_m8", &[3, 5, 7][..], 8),
        ("q6_m8", &[3, 4, 5, 6, 7, 8][..], 8),
    ] {
        for execution in [Execution::Sequential, Execution::Parallel] {
            let mut net = network(hs, cascades).with_execution(execution);
            let mut k = 0;
            group.bench_with_input(
                BenchmarkId::new(format!("{execution:?}"), label),
                &(),
                |b, _| {
                    b.iter(|| {
                        let p = &pairs[k % pairs.len()];
                        k += 1;
                        black_box(net.step(p.input, p.target).unwrap())
                    })
                },
            );
        }
    }
    group.finish();
}

criterion_group!(benches, step);
criterion_main!(benches);
