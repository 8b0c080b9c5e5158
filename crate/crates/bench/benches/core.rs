use std::hint::black_box;

use bergman_core::bergman::{extremal_g, project_deriv};
use bergman_core::norms::{m_function, m_function_series};
use bergman_core::specfun::{hyp2f1, log_gamma, HypParams};
use bergman_core::{BallPoint, CVector, Complex64, MCConfig, MultiIndex, Params};
use criterion::{criterion_group, criterion_main, Criterion};

fn special_functions(c: &mut Criterion) {
    c.bench_function("log_gamma", |b| b.iter(|| log_gamma(black_box(7.25)).unwrap()));
    let near_one = HypParams::new(1.5, 1.5, 3.5, 0.99);
    c.bench_function("hyp2f1 x=0.99", |b| b.iter(|| hyp2f1(black_box(&near_one), 1e-13).unwrap()));
}

fn profile(c: &mut Criterion) {
    let params = Params::new(2, 2, 1.0).unwrap();
    c.bench_function("m_function r=0.99", |b| b.iter(|| m_function(&params, black_box(0.99)).unwrap()));
    c.bench_function("m_function_series r=0.99", |b| {
        b.iter(|| m_function_series(&params, black_box(0.99), 2100).unwrap())
    });
}

fn projection(c: &mut Criterion) {
    let params = Params::new(1, 1, 0.0).unwrap();
    let z = BallPoint::new(CVector::new([Complex64::new(0.9, 0.0)]).unwrap()).unwrap();
    let g = extremal_g(&params, &z).unwrap();
    let m = MultiIndex::first_axis(1, 1);
    let cfg = MCConfig::new(100_000, 1);
    let mut group = c.benchmark_group("projection");
    group.sample_size(10);
    group.bench_function("project_deriv 1e5 samples", |b| {
        b.iter(|| project_deriv(&params, &g, &m, &z, &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, special_functions, profile, projection);
criterion_main!(benches);
