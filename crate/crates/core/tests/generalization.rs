//! Transfer behavior of the forecasters: a model trained in one region keeps
//! its accuracy in another, and the gated variant holds its edge across
//! growing-window folds.

use sunsite_core::forecast::{train, CondLstmModel, SplitTargets, TrainConfig, Variant};
use sunsite_core::metrics::error_report;
use sunsite_core::pv::{harvest_series, PanelSpec};
use sunsite_core::weather::{
    split_chronological, synth_weather, Location, WeatherSeries, HOURS_PER_YEAR,
};

fn location(latitude: f64, label: &str) -> Location {
    Location::new(latitude, -93.6, -6.0, label).unwrap()
}

fn variant_config(variant: Variant, max_epochs: usize, seed: u64) -> TrainConfig {
    match variant {
        Variant::Lstm => TrainConfig {
            max_epochs,
            patience: max_epochs.saturating_sub(1).max(1),
            seed,
            ..TrainConfig::default()
        },
        Variant::Cond => TrainConfig {
            max_epochs,
            patience: max_epochs.saturating_sub(1).max(1),
            batch_size: 128,
            initial_lr: 3e-3,
            seed,
            ..TrainConfig::default()
        },
    }
}

fn predict_test(model: &CondLstmModel, series: &WeatherSeries, test_start: usize) -> Vec<f64> {
    let stitched = series.slice(test_start - (model.lookback - 1)..test_start + HOURS_PER_YEAR);
    let preds = model.predict_series(&stitched).unwrap();
    preds[preds.len() - HOURS_PER_YEAR..].to_vec()
}

/// Trains on a (3 train / 1 val / 1 test) study and returns the model plus
/// its local test nRMSE.
fn train_and_score(loc: &Location, seed: u64, variant: Variant) -> (CondLstmModel, f64) {
    let series = synth_weather(loc, 5, seed).unwrap();
    let panel = PanelSpec::default_for(48_940.0, loc.latitude);
    let harvest = harvest_series(&series, loc, &panel);
    let split = split_chronological(&series, 3, 1, 1).unwrap();
    let targets = SplitTargets {
        train: harvest[..3 * HOURS_PER_YEAR].to_vec(),
        validation: harvest[3 * HOURS_PER_YEAR..4 * HOURS_PER_YEAR].to_vec(),
    };
    let config = variant_config(variant, 18, seed.wrapping_add(7));
    let (model, _) = train(&split, &targets, &config, variant).unwrap();
    let test_start = 4 * HOURS_PER_YEAR;
    let actual = &harvest[test_start..test_start + HOURS_PER_YEAR];
    let preds = predict_test(&model, &series, test_start);
    let nrmse = error_report(actual, &preds).unwrap().nrmse_hourly;
    (model, nrmse)
}

/// A model trained at one latitude predicting a region that differs only in
/// latitude stays within 3 percentage points of the locally trained model.
#[test]
fn cross_latitude_generalization_within_three_points() {
    let home = location(41.6, "home");
    let away = location(36.5, "away");

    let (home_model, _) = train_and_score(&home, 51, Variant::Cond);
    let (_, away_local_nrmse) = train_and_score(&away, 51, Variant::Cond);

    // evaluate the pre-trained model on the away region, no retraining
    let away_series = synth_weather(&away, 5, 51).unwrap();
    let panel = PanelSpec::default_for(48_940.0, away.latitude);
    let away_harvest = harvest_series(&away_series, &away, &panel);
    let test_start = 4 * HOURS_PER_YEAR;
    let actual = &away_harvest[test_start..test_start + HOURS_PER_YEAR];
    let preds = predict_test(&home_model, &away_series, test_start);
    let general_nrmse = error_report(actual, &preds).unwrap().nrmse_hourly;

    let gap = general_nrmse - away_local_nrmse;
    assert!(
        gap < 3.0,
        "generalized nRMSE {general_nrmse:.3}% vs local {away_local_nrmse:.3}% (gap {gap:.3})"
    );
}

/// Growing-window folds: the gated variant matches or beats the plain LSTM
/// in at least 3 of 4 folds.
#[test]
fn cond_holds_edge_across_growing_folds() {
    let loc = location(41.6, "IA");
    let series = synth_weather(&loc, 5, 77).unwrap();
    let panel = PanelSpec::default_for(48_940.0, loc.latitude);
    let harvest = harvest_series(&series, &loc, &panel);

    let mut cond_wins = 0;
    let mut detail = String::new();
    for train_years in 1..=4usize {
        let fit_years = (train_years - 1).max(1);
        let val_years = train_years - fit_years;
        let split = split_chronological(&series, fit_years, val_years, 1).unwrap();
        let a = fit_years * HOURS_PER_YEAR;
        let b = train_years * HOURS_PER_YEAR;
        let targets = SplitTargets {
            train: harvest[..a].to_vec(),
            validation: harvest[a..b].to_vec(),
        };
        let test_start = b;
        let actual = &harvest[test_start..test_start + HOURS_PER_YEAR];

        let mut nrmse = |variant: Variant| -> f64 {
            let config = variant_config(variant, 18, 19);
            let (model, _) = train(&split, &targets, &config, variant).unwrap();
            let stitched =
                series.slice(test_start - (model.lookback - 1)..test_start + HOURS_PER_YEAR);
            let preds = model.predict_series(&stitched).unwrap();
            let preds = &preds[preds.len() - HOURS_PER_YEAR..];
            error_report(actual, preds).unwrap().nrmse_hourly
        };
        let lstm = nrmse(Variant::Lstm);
        let cond = nrmse(Variant::Cond);
        if cond <= lstm {
            cond_wins += 1;
        }
        detail.push_str(&format!(
            "fold {train_years}y: cond {cond:.3}% vs lstm {lstm:.3}%; "
        ));
    }
    assert!(cond_wins >= 3, "cond won only {cond_wins}/4 folds: {detail}");
}
