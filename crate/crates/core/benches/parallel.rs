//! Parallel-vs-sequential benchmarks for the data-parallel inner loops:
//! harvest evaluation, batch gradients, and sizing feasibility probes.
//!
//! `par::map`/`chunked_map` use the rayon pool when the crate's `parallel`
//! feature (default) is on; the `*_seq` variants are the single-thread
//! baseline, so each group shows the speedup directly. Building with
//! `--no-default-features` collapses both sides to sequential.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sunsite_core::forecast::{batch_gradients, CondLstmModel, PreparedSample, Variant};
use sunsite_core::pv::{harvest_hour, PanelSpec};
use sunsite_core::sizing::{simulate_battery, SizingProblem};
use sunsite_core::traffic::{consumption_series, synth_traffic, PowerParams};
use sunsite_core::weather::{synth_weather, Location};
use sunsite_core::{par, weather};

fn iowa() -> Location {
    Location::new(41.6, -93.6, -6.0, "IA").unwrap()
}

fn bench_harvest(c: &mut Criterion) {
    let location = iowa();
    let series = synth_weather(&location, 1, 7).unwrap();
    let panel = PanelSpec::default_for(48_940.0, location.latitude);
    let records = series.records();

    let mut group = c.benchmark_group("harvest_year");
    group.bench_function(BenchmarkId::new("map", "parallel"), |b| {
        b.iter(|| par::map(records, |rec| harvest_hour(rec, &location, &panel)))
    });
    group.bench_function(BenchmarkId::new("map", "sequential"), |b| {
        b.iter(|| par::map_seq(records, |rec| harvest_hour(rec, &location, &panel)))
    });
    group.finish();
}

fn bench_batch_gradients(c: &mut Criterion) {
    let location = iowa();
    let series = synth_weather(&location, 1, 3).unwrap().slice(0..600);
    let model = CondLstmModel::init(Variant::Lstm, 24, 5);
    let features = weather::feature_matrix(&series).unwrap();
    let d = model.variant.input_dim();
    let lookback = model.lookback;
    let samples: Vec<PreparedSample<'_>> = (lookback - 1..series.len())
        .map(|t| PreparedSample {
            window: &features.data[(t + 1 - lookback) * d..(t + 1) * d],
            target: 0.5,
            gate: 1.0,
        })
        .collect();

    let mut group = c.benchmark_group("batch_gradients_577");
    group.sample_size(20);
    group.bench_function(BenchmarkId::new("bptt", "chunked"), |b| {
        b.iter(|| batch_gradients(&model.weights, lookback, &samples))
    });
    group.bench_function(BenchmarkId::new("bptt", "sequential"), |b| {
        b.iter(|| {
            // same kernel, forced through the sequential chunk map
            let chunks = par::chunked_map_seq(&samples, 32, |chunk| {
                let mut grad = sunsite_core::forecast::Gradients::zeros(
                    model.weights.hidden,
                    model.weights.input_dim,
                );
                let mut sq = 0.0;
                for s in chunk {
                    let (g, l) = batch_gradients(&model.weights, lookback, std::slice::from_ref(s));
                    grad.add_scaled(&g, 1.0);
                    sq += l;
                }
                (grad, sq)
            });
            chunks.len()
        })
    });
    group.finish();
}

fn bench_sizing_probes(c: &mut Criterion) {
    let location = iowa();
    let series = synth_weather(&location, 1, 9).unwrap().slice(0..24 * 28);
    let panel = PanelSpec::default_for(430.0, location.latitude);
    let harvest = sunsite_core::pv::harvest_series(&series, &location, &panel);
    let profile = synth_traffic(24 * 28, 14_000, 3);
    let consumption = consumption_series(&profile, &PowerParams::default()).unwrap();
    let problem = SizingProblem::new(harvest, consumption).unwrap();
    let grid: Vec<(u32, u32)> = (0..128).map(|k| (40 + (k % 16), 18 + (k / 16))).collect();

    let mut group = c.benchmark_group("sizing_probe_grid");
    group.bench_function(BenchmarkId::new("simulate", "parallel"), |b| {
        b.iter(|| {
            par::map(&grid, |&(n, m)| {
                simulate_battery(&problem, n, m).unwrap().outage_hours()
            })
        })
    });
    group.bench_function(BenchmarkId::new("simulate", "sequential"), |b| {
        b.iter(|| {
            par::map_seq(&grid, |&(n, m)| {
                simulate_battery(&problem, n, m).unwrap().outage_hours()
            })
        })
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_harvest,
    bench_batch_gradients,
    bench_sizing_probes
);
criterion_main!(benches);
