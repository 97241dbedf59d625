//! Hot-path benchmarks: the threshold solver, the backoff kernel, event
//! queue churn, one radio reception evaluation over a full vehicle set, and
//! complete scenario runs at both scales.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use drg_core::config::{self, DrgConfig, ScenarioConfig, ScenarioKind};
use drg_core::engine::Engine;
use drg_core::geom::solve_theta_min_root;
use drg_core::protocol::drg::{compute_backoff, DrgParams};
use drg_core::protocol::ProtocolKind;

fn theta_solver(c: &mut Criterion) {
    c.bench_function("solve_theta_min_root(0.391)", |b| {
        b.iter(|| solve_theta_min_root(black_box(0.391)).unwrap())
    });
}

fn backoff_kernel(c: &mut Criterion) {
    let p = DrgParams {
        max_bo_d: 0.05,
        s_d: 1.0,
        max_retx: 3,
        long_bo_d: 9.0,
        max_long_bo_d: 9.0,
        cr_threshold: 0.6,
        theta_min: 1.5761201469930999,
        epsilon: 1.0,
        cw_min: 0.0,
        cw_max: 0.5,
        jitter_cw: 0.00032,
        ttl: 15.0,
    };
    c.bench_function("compute_backoff over 1k distances", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for i in 0..1000 {
                acc += compute_backoff(black_box(i as f64 * 0.3), 300.0, &p);
            }
            acc
        })
    });
}

fn engine_churn(c: &mut Criterion) {
    c.bench_function("engine schedule+pop 10k events", |b| {
        b.iter_batched(
            Engine::<u32>::new,
            |mut e| {
                for i in 0..10_000u32 {
                    e.schedule_at(f64::from(i % 97) * 0.01, i);
                }
                let mut n = 0;
                while e.pop_due(f64::INFINITY).is_some() {
                    n += 1;
                }
                n
            },
            BatchSize::SmallInput,
        )
    });
}

fn highway_run(c: &mut Criterion) {
    let mut scaled = ScenarioConfig {
        drg: DrgConfig { max_bo_d_s: Some(0.05), ttl_s: 6.0, ..DrgConfig::default() },
        sim_end_s: 12.0,
        ..ScenarioConfig::default()
    };
    scaled.highway.length_m = 2000.0;
    c.bench_function("highway 2km density 10 drg full run", |b| {
        b.iter(|| config::run_single(black_box(&scaled), ProtocolKind::Drg, 10.0, 1))
    });

    let full = ScenarioConfig::default();
    c.bench_function("highway 10km density 10 drg full run", |b| {
        b.iter(|| config::run_single(black_box(&full), ProtocolKind::Drg, 10.0, 1))
    });
}

fn city_run(c: &mut Criterion) {
    let cfg = ScenarioConfig {
        scenario: ScenarioKind::Grid,
        drg: DrgConfig { max_bo_d_s: Some(0.05), epsilon: 0.3, ..DrgConfig::default() },
        ..ScenarioConfig::default()
    };
    c.bench_function("grid 160 vehicles drg full run", |b| {
        b.iter(|| config::run_single(black_box(&cfg), ProtocolKind::Drg, 160.0, 1))
    });
}

criterion_group!(benches, theta_solver, backoff_kernel, engine_churn, highway_run, city_run);
criterion_main!(benches);
