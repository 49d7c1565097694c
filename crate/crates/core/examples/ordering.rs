//! Desk-scale ordering experiment: trains the LSTM and Cond-LSTM variants on
//! a seeded 6-year synthetic study and prints per-epoch validation losses and
//! test nRMSE, alongside the Markov baseline.
//!
//! Usage: ordering <seed> <lstm_epochs> <lstm_lr> [cond_epochs] [cond_lr] [latitude] [lstm_batch] [cond_batch]

use sunsite_core::forecast::{train, SplitTargets, TrainConfig, Variant};
use sunsite_core::markov::{fit_markov, predict_day_ahead_series};
use sunsite_core::metrics::error_report;
use sunsite_core::pv::{harvest_series, PanelSpec};
use sunsite_core::weather::{split_chronological, synth_weather, Location, HOURS_PER_YEAR};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(101);
    let lstm_epochs: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(25);
    let lstm_lr: f64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(1e-3);
    let cond_epochs: usize = args
        .get(4)
        .map(|s| s.parse().unwrap())
        .unwrap_or(lstm_epochs);
    let cond_lr: f64 = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(lstm_lr);
    let latitude: f64 = args.get(6).map(|s| s.parse().unwrap()).unwrap_or(41.6);
    let lstm_batch: usize = args.get(7).map(|s| s.parse().unwrap()).unwrap_or(256);
    let cond_batch: usize = args.get(8).map(|s| s.parse().unwrap()).unwrap_or(256);

    let location = Location::new(latitude, -93.6, -6.0, "IA").unwrap();
    let series = synth_weather(&location, 6, seed).unwrap();
    let panel = PanelSpec::default_for(48_940.0, location.latitude);
    let harvest = harvest_series(&series, &location, &panel);
    let split = split_chronological(&series, 4, 1, 1).unwrap();
    let targets = SplitTargets {
        train: harvest[..4 * HOURS_PER_YEAR].to_vec(),
        validation: harvest[4 * HOURS_PER_YEAR..5 * HOURS_PER_YEAR].to_vec(),
    };
    let test_start = 5 * HOURS_PER_YEAR;
    let actual = &harvest[test_start..test_start + HOURS_PER_YEAR];

    let markov_model = fit_markov(&harvest[..5 * HOURS_PER_YEAR], 5).unwrap();
    let markov_pred = predict_day_ahead_series(
        &markov_model,
        &harvest[test_start - 24..test_start + HOURS_PER_YEAR],
        (test_start / 24 - 1) % 365,
    )
    .unwrap();
    let markov_nrmse = error_report(actual, &markov_pred).unwrap().nrmse_hourly;
    println!(
        "seed {seed} lat {latitude} | lstm {lstm_epochs}@{lstm_lr} cond {cond_epochs}@{cond_lr}"
    );
    println!("markov nRMSE = {markov_nrmse:.3}%");

    for (variant, max_epochs, lr, batch_size) in [
        (Variant::Lstm, lstm_epochs, lstm_lr, lstm_batch),
        (Variant::Cond, cond_epochs, cond_lr, cond_batch),
    ] {
        let config = TrainConfig {
            max_epochs,
            patience: max_epochs.saturating_sub(1).max(1),
            initial_lr: lr,
            batch_size,
            seed: seed.wrapping_add(31),
            ..TrainConfig::default()
        };
        let started = std::time::Instant::now();
        let (model, log) = train(&split, &targets, &config, variant).unwrap();
        let stitched = series.slice(test_start - 23..test_start + HOURS_PER_YEAR);
        let preds = model.predict_series(&stitched).unwrap();
        let preds = &preds[preds.len() - HOURS_PER_YEAR..];
        let nrmse = error_report(actual, preds).unwrap().nrmse_hourly;
        let vals: Vec<String> = log
            .epochs
            .iter()
            .map(|e| format!("{:.5}", e.val_mse))
            .collect();
        println!(
            "{variant}: nRMSE = {nrmse:.3}% after {} epochs in {:.0?} | val: {}",
            log.epochs.len(),
            started.elapsed(),
            vals.join(" ")
        );
    }
}
