use std::hint::black_box;

use c2e_core::conformal::{e0, ek, ConformalPoint};
use c2e_core::geometry::chart_by_name;
use c2e_core::np::{reconstruct_weyl, summarize, NPScalars, NullFrame};
use c2e_core::suites::{run_suite, Suite, SuiteConfig};
use c2e_core::{Bundle, Flavor};
use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const POINT: [f64; 4] = [0.1, -0.2, 0.3, 0.15];

fn conformal_point(c: &mut Criterion) {
    let chart = chart_by_name("s2xs2").unwrap();
    c.bench_function("conformal point, s2xs2, order 6", |b| {
        b.iter(|| ConformalPoint::new(chart.as_ref(), black_box(&POINT), 6).unwrap())
    });
}

fn composition(c: &mut Criterion) {
    let chart = chart_by_name("perturbed").unwrap();
    let cp = ConformalPoint::new(chart.as_ref(), &POINT, 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let sigma = Bundle::scalar(1.0).random_section(4, 6, Flavor::Conformal, Some(cp.metric()), &mut rng).unwrap();
    c.bench_function("E1 E0 on a random section", |b| {
        b.iter(|| ek(1, &e0(black_box(&sigma), &cp).unwrap(), &cp).unwrap())
    });
}

fn weyl_algebra(c: &mut Criterion) {
    let frame = NullFrame::canonical();
    let psi = NPScalars::new([0.3, -0.2, 1.0, 0.5, 0.1].map(|x| Complex64::new(x, 0.5 * x)));
    c.bench_function("reconstruct and summarize", |b| {
        b.iter(|| {
            reconstruct_weyl(black_box(&psi), &frame).unwrap();
            summarize(&psi, &frame, 1e-10).unwrap()
        })
    });
}

fn suite(c: &mut Criterion) {
    let mut cfg = SuiteConfig::new(Suite::BggFlat);
    cfg.points = 1;
    cfg.trials = 1;
    let mut g = c.benchmark_group("suite");
    g.sample_size(10);
    g.bench_function("bgg-flat, one point", |b| b.iter(|| run_suite(black_box(&cfg)).unwrap()));
    g.finish();
}

criterion_group!(benches, conformal_point, composition, weyl_algebra, suite);
criterion_main!(benches);
