//! Sequential against rayon execution for the two data-parallel sweeps:
//! the double description (candidate rays are checked in parallel) and the
//! property suite (worlds are independent).
//!
//! `cargo bench -p medbounds --bench sweeps`

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use medbounds::catalog::local_combinations;
use medbounds::par::Execution;
use medbounds::sim::{run_property_suite, SuiteConfig};
use medbounds::vertex::{build_dual, enumerate_vertices, VertexOptions};
use medbounds::{AssumptionSet, CausalParameter, Direction};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn vertex_enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("vertex_enumeration");
    group.sample_size(10);
    let cases = [
        ("nde0_none", CausalParameter::Nde(medbounds::Arm::Zero), AssumptionSet::NONE),
        ("acme1_a4", CausalParameter::Acme(medbounds::Arm::One), "a4".parse().unwrap()),
    ];
    for (label, p, s) in cases {
        let dual = build_dual(p, s, Direction::Lower);
        for (mode, execution) in MODES {
            let options = VertexOptions { execution, ..VertexOptions::new() };
            group.bench_with_input(BenchmarkId::new(mode, label), &dual, |b, dual| {
                b.iter(|| enumerate_vertices(black_box(&dual.polyhedron), &options).unwrap())
            });
        }
    }
    group.finish();
}

fn property_suite(c: &mut Criterion) {
    let mut group = c.benchmark_group("property_suite");
    group.sample_size(10);
    for (mode, execution) in MODES {
        let config = SuiteConfig { nesting: false, execution, ..SuiteConfig::new(local_combinations(), 8, 5) };
        group.bench_function(BenchmarkId::new(mode, "7 sets x 8 worlds"), |b| b.iter(|| run_property_suite(black_box(&config))));
    }
    group.finish();
}

criterion_group!(benches, vertex_enumeration, property_suite);
criterion_main!(benches);
