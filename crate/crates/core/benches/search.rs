//! Discovery throughput on the bundled datasets.
//!
//! With the default `parallel` feature each case runs twice: on a one-thread
//! rayon pool and on the global pool. Build with `--no-default-features` to
//! measure the plain sequential iterators instead.

use std::hint::black_box;
use std::path::Path;

use criterion::{Criterion, criterion_group, criterion_main};
use igsd::{Dataset, RefineConfig, SchemaHints, SearchConfig, ThresholdMode, load_csv, mine};

fn dataset(file: &str, target: &str) -> Dataset {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(file);
    load_csv(path, &SchemaHints::new())
        .and_then(|d| d.resolve_target(&[target], 2))
        .expect("bundled dataset loads")
}

fn cases() -> Vec<(&'static str, Dataset, SearchConfig)> {
    let ttt = dataset("tic-tac-toe.csv", "class");
    let iris = dataset("iris.csv", "class");
    vec![
        (
            "tic-tac-toe/dynamic/d4",
            ttt.clone(),
            SearchConfig {
                dmax: Some(4),
                ..SearchConfig::default()
            },
        ),
        (
            "tic-tac-toe/maximum",
            ttt,
            SearchConfig {
                t_mode: ThresholdMode::Maximum,
                ..SearchConfig::default()
            },
        ),
        ("iris/dynamic", iris, SearchConfig::default()),
    ]
}

fn bench_mine(c: &mut Criterion) {
    let refine = RefineConfig::default();
    let mut group = c.benchmark_group("mine");
    group.sample_size(10);
    for (name, d, cfg) in cases() {
        #[cfg(feature = "parallel")]
        {
            let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
            group.bench_function(format!("{name}/1-thread"), |b| {
                b.iter(|| single.install(|| black_box(mine(&d, &cfg, &refine).unwrap())))
            });
            group.bench_function(format!("{name}/pool-{}", rayon::current_num_threads()), |b| {
                b.iter(|| black_box(mine(&d, &cfg, &refine).unwrap()))
            });
        }
        #[cfg(not(feature = "parallel"))]
        group.bench_function(format!("{name}/sequential"), |b| {
            b.iter(|| black_box(mine(&d, &cfg, &refine).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_mine);
criterion_main!(benches);
