//! Sequential versus data-parallel evaluation of the numerical integrals
//! and of the curvature calibration.

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kzcocycle::integrator::kontsevich::kontsevich_z_with;
use kzcocycle::integrator::{gramain, z1_with, MorseKnot, QuadratureConfig, Z1Options};
use kzcocycle::vassiliev::calibrate;

fn knot(name: &str) -> MorseKnot {
    let path = format!("{}/fixtures/knots/{name}.json", env!("CARGO_MANIFEST_DIR"));
    MorseKnot::from_json_str(&std::fs::read_to_string(path).expect("fixture exists")).expect("fixture parses")
}

fn modes() -> [(&'static str, bool); 2] {
    [("sequential", false), ("parallel", true)]
}

fn kontsevich(c: &mut Criterion) {
    let k = knot("trefoil_a");
    let q = QuadratureConfig { tol: 1e-8, ..QuadratureConfig::default() };
    let mut g = c.benchmark_group("kontsevich_z trefoil");
    for (name, parallel) in modes() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &parallel, |b, &p| {
            b.iter(|| kontsevich_z_with(black_box(&k), 2, &q, p).unwrap())
        });
    }
    g.finish();
}

fn z1_rotation(c: &mut Criterion) {
    let path = gramain(knot("hump"));
    let q = QuadratureConfig { tol: 1e-5, ..QuadratureConfig::default() };
    let mut g = c.benchmark_group("z1 hump rotation");
    g.sample_size(10).measurement_time(Duration::from_secs(30));
    for (name, parallel) in modes() {
        let opts = Z1Options { parallel, ..Z1Options::default() };
        g.bench_with_input(BenchmarkId::from_parameter(name), &opts, |b, o| {
            b.iter(|| z1_with(black_box(&path), 3, &q, o).unwrap())
        });
    }
    g.finish();
}

fn calibration(c: &mut Criterion) {
    let mut g = c.benchmark_group("curvature calibration");
    g.sample_size(10);
    for (name, parallel) in modes() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &parallel, |b, &p| b.iter(|| calibrate(p).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, kontsevich, z1_rotation, calibration);
criterion_main!(benches);
