use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rmerton::valuation::corner_value_samples;
use rmerton::verify::{linspace, minimax_gap};
use rmerton::{
    ou_exact_step, select_corner, simulate_path, value_classical, variance_step, MarketConstants, ParamQuadruple,
    SelectorMode, ValuePoint, WorstCase,
};
use rmerton_bench::reference;

fn steps(c: &mut Criterion) {
    let g = ParamQuadruple::new(1.0, 0.05, 1.5, 0.04);
    c.bench_function("ou_exact_step", |b| {
        b.iter(|| ou_exact_step(black_box(0.07), &g, 0.2, 1.0 / 256.0, black_box(0.3)))
    });
    c.bench_function("variance_step", |b| {
        b.iter(|| variance_step(black_box(0.04), &g, 0.5, 1.0 / 256.0, black_box(-0.3)))
    });
    let (bx, _) = reference(1);
    c.bench_function("select_corner", |b| {
        b.iter(|| select_corner(black_box(0.03), black_box(0.12), &bx, SelectorMode::SignLogic))
    });
}

fn paths(c: &mut Criterion) {
    let (bx, cfg) = reference(1);
    let consts = MarketConstants::from(&bx);
    let worst = WorstCase {
        bx: &bx,
        mode: SelectorMode::Paper,
    };
    c.bench_function("simulate_path/center", |b| {
        b.iter(|| simulate_path(&cfg, &consts, &bx.center(), &cfg.initial, black_box(3)))
    });
    c.bench_function("simulate_path/worst_case", |b| {
        b.iter(|| simulate_path(&cfg, &consts, &worst, &cfg.initial, black_box(3)))
    });
}

fn estimators(c: &mut Criterion) {
    let (bx, cfg) = reference(1000);
    let point = ValuePoint {
        t: 0.0,
        mu: cfg.initial.mu,
        nu: cfg.initial.nu,
        x: cfg.initial.x,
    };
    let consts = MarketConstants::from(&bx);
    let mut g = c.benchmark_group("estimators_1000_paths");
    g.sample_size(10);
    g.bench_function("value_classical", |b| {
        b.iter(|| value_classical(&point, &bx.center(), &consts, &cfg))
    });
    g.bench_function("corner_value_samples", |b| {
        b.iter(|| corner_value_samples(&point, &bx, &cfg))
    });
    g.bench_function("minimax_gap_41x16", |b| {
        b.iter(|| minimax_gap(&point, &bx, &linspace(-3.0, 3.0, 41), &cfg))
    });
    g.finish();
}

criterion_group!(benches, steps, paths, estimators);
criterion_main!(benches);
