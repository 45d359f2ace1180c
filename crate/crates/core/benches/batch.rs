//! Batch workloads on the rayon path versus the sequential path.
//!
//! Without the `parallel` feature both paths are sequential, which makes
//! the comparison a check of the fallback's overhead.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use surrogate_core::ann::init_network;
use surrogate_core::frame::{simulate_frame, IntegratorConfig, ShearFrame};
use surrogate_core::parallel::{map, map_sequential};
use surrogate_core::pipeline::{feature_width, fit_normalizer, rollout};
use surrogate_core::rocking::{block_constants, simulate_rocking, DEFAULT_ROCKING_DT};
use surrogate_core::signals::{response_spectrum, scale_to_pga, scale_to_sa, synthetic_record, GroundMotionRecord, SyntheticSpec};

fn records(n: u64, duration: f64) -> Vec<GroundMotionRecord> {
    (0..n).map(|seed| synthetic_record(&SyntheticSpec { seed, duration, ..SyntheticSpec::default() }).unwrap()).collect()
}

fn frame_batch(c: &mut Criterion) {
    let frame = ShearFrame::reference().unwrap();
    let cfg = IntegratorConfig::default();
    let recs: Vec<_> = records(8, 10.0).iter().map(|r| scale_to_sa(r, 0.55, 0.05, 3.0).unwrap().0).collect();
    let mut g = c.benchmark_group("frame_batch");
    g.sample_size(10);
    g.bench_function("parallel", |b| b.iter(|| map(&recs, |r| simulate_frame(&frame, r, &cfg).unwrap().history.len())));
    g.bench_function("sequential", |b| b.iter(|| map_sequential(&recs, |r| simulate_frame(&frame, r, &cfg).unwrap().history.len())));
    g.finish();
}

fn rocking_batch(c: &mut Criterion) {
    let block = block_constants(4.0, 12.0, 1.0).unwrap();
    let recs: Vec<_> = records(8, 10.0).iter().map(|r| scale_to_pga(r, 1.5).unwrap().0).collect();
    let mut g = c.benchmark_group("rocking_batch");
    g.sample_size(10);
    g.bench_function("parallel", |b| b.iter(|| map(&recs, |r| simulate_rocking(&block, r, DEFAULT_ROCKING_DT).unwrap().steps)));
    g.bench_function("sequential", |b| {
        b.iter(|| map_sequential(&recs, |r| simulate_rocking(&block, r, DEFAULT_ROCKING_DT).unwrap().steps))
    });
    g.finish();
}

fn spectrum(c: &mut Criterion) {
    let recs = records(4, 20.0);
    let periods: Vec<f64> = (1..=100).map(|i| 0.04 * i as f64).collect();
    let mut g = c.benchmark_group("spectrum");
    g.sample_size(10);
    g.bench_function("parallel", |b| b.iter(|| map(&recs, |r| response_spectrum(r, &periods, 0.05).unwrap())));
    g.bench_function("sequential", |b| b.iter(|| map_sequential(&recs, |r| response_spectrum(r, &periods, 0.05).unwrap())));
    g.finish();
}

fn oracle_vs_rollout(c: &mut Criterion) {
    let block = block_constants(4.0, 12.0, 1.0).unwrap();
    let rec = scale_to_pga(&records(1, 20.0)[0], 1.5).unwrap().0;
    let norm = fit_normalizer(&[&rec], block.alpha).unwrap();
    let net = init_network(feature_width(1), 1, 0);
    let mut g = c.benchmark_group("rocking_motion");
    g.sample_size(20);
    g.bench_with_input(BenchmarkId::new("oracle", "1e-4 s"), &rec, |b, r| {
        b.iter(|| simulate_rocking(&block, black_box(r), DEFAULT_ROCKING_DT).unwrap().steps)
    });
    g.bench_with_input(BenchmarkId::new("rollout", "0.01 s"), &rec, |b, r| {
        b.iter(|| rollout(&net, black_box(r), &norm, 1, usize::MAX).unwrap().len())
    });
    g.finish();
}

criterion_group!(benches, frame_batch, rocking_batch, spectrum, oracle_vs_rollout);
criterion_main!(benches);
