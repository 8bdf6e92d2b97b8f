use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sqf_bench::{daily_rain, forecasts, model_config, samples, WeekIndex};
use sqf_core::baselines::{compute_climatology, ClimatologyOp};
use sqf_core::data::{Aggregation, YearRange};
use sqf_core::evaluation::{q_risk, LeadFilter};
use sqf_core::model::{loss_and_gradients, predict_batch, TftWeights, CHUNK};
use sqf_core::numerics::{Tape, Tensor};

fn matmul(c: &mut Criterion) {
    let mut group = c.benchmark_group("tape_matmul");
    for n in [16usize, 64, 256] {
        let a = Tensor::new(&[n, n], (0..n * n).map(|i| (i % 7) as f64 * 0.1).collect()).unwrap();
        let b = Tensor::new(&[n, n], (0..n * n).map(|i| (i % 5) as f64 * 0.2).collect()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, _| {
            bench.iter(|| {
                let mut tape = Tape::new();
                let (x, y) = (tape.parameter(a.clone()), tape.parameter(b.clone()));
                let z = tape.matmul(x, y).unwrap();
                let s = tape.sum(z).unwrap();
                black_box(tape.backward(s).unwrap());
            })
        });
    }
    group.finish();
}

fn model(c: &mut Criterion) {
    let config = model_config();
    let weights = TftWeights::init(&config, 1).unwrap();
    let batch = samples(&config, CHUNK, 2);
    let refs: Vec<_> = batch.iter().collect();
    let mut group = c.benchmark_group("tft_chunk");
    group.sample_size(20);
    group.bench_function("forward", |b| b.iter(|| black_box(predict_batch(&weights, &refs).unwrap())));
    group.bench_function("forward_backward", |b| b.iter(|| black_box(loss_and_gradients(&weights, &refs, Some(3)).unwrap())));
    group.finish();
}

fn metrics(c: &mut Criterion) {
    let rain = daily_rain(4, 5, (1981, 2019), 4);
    c.bench_function("climatology_quantiles_39y_4x5", |b| {
        b.iter(|| black_box(compute_climatology(&rain, Aggregation::Max, ClimatologyOp::Quantiles, YearRange::new(1981, 2010)).unwrap()))
    });

    let start = WeekIndex::new(2015, 1).unwrap();
    let weekly = sqf_core::data::aggregate_weekly(&daily_rain(4, 5, (2015, 2019), 5), Aggregation::Max).unwrap();
    let fs = forecasts(&weekly.grid, start, 200, 26, 6);
    c.bench_function("q_risk_20_locations_200_issues", |b| {
        b.iter(|| black_box(q_risk(&weekly, &fs, 0.9, LeadFilter::All).unwrap()))
    });
}

criterion_group!(benches, matmul, model, metrics);
criterion_main!(benches);
