//! Acceptance suite: one test per exit criterion, each printing a PASS/FAIL
//! line. Run with `cargo test --test acceptance -- --nocapture` to see the
//! per-criterion lines.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sunsite_core::forecast::{
    batch_gradients, load_checkpoint, sample_loss, save_checkpoint, train, CondLstmModel,
    LstmWeights, PreparedSample, SplitTargets, TrainConfig, Variant,
};
use sunsite_core::markov::{fit_markov, predict_day_ahead_series};
use sunsite_core::matrix::Matrix;
use sunsite_core::metrics::{cost_difference, error_report};
use sunsite_core::pv::{harvest_series, PanelSpec};
use sunsite_core::sizing::{
    full_charge_capacity, optimize_bigm_milp, optimize_enumeration, simulate_battery, SizingProblem,
};
use sunsite_core::weather::{
    feature_matrix, split_chronological, synth_weather, Location, WeatherSeries, FEATURE_COUNT,
    HOURS_PER_YEAR,
};
use sunsite_core::Error;

fn check(name: &str, ok: bool, detail: String) {
    println!("{}: {} ({detail})", name, if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{name} failed: {detail}");
}

fn iowa() -> Location {
    Location::new(41.6, -93.6, -6.0, "IA").unwrap()
}

// ---------------------------------------------------------------------------
// Cost identities, exact to the cent (Tables IV and V arithmetic).
// ---------------------------------------------------------------------------
#[test]
fn criterion_cost_identities() {
    let cost = |n: u32, m: u32| n as f64 * 244.22 + m as f64 * 2093.37;
    let cents = |x: f64| (x * 100.0).round() as i64;
    let truth = cost(48, 22);

    let mut ok = cents(truth) == 5_777_670;
    let mut detail = format!("cost(48,22) = {:.2}", truth);

    // (configuration, expected cost-difference %, expected cost in cents)
    let rows: [(u32, u32, f64, Option<i64>); 6] = [
        (47, 22, 0.423, None),
        (69, 19, 1.993, None),
        (50, 22, 0.845, Some(5_826_514)),
        (49, 23, 4.046, None),
        (57, 21, 0.0, Some(5_788_131)),
        (86, 35, 0.0, Some(9_427_087)),
    ];
    for (n, m, expected_diff, expected_cents) in rows {
        let c = cost(n, m);
        if let Some(e) = expected_cents {
            ok &= cents(c) == e;
        }
        if expected_diff > 0.0 {
            let diff = cost_difference(c, truth).unwrap();
            ok &= (diff - expected_diff).abs() < 5e-4;
            detail.push_str(&format!("; ({n},{m}) diff {:.3}%", diff));
        }
    }
    check("cost identities", ok, detail);
}

// ---------------------------------------------------------------------------
// Parameter-count pinning: 5793 (LSTM, 12 features) / 5665 (Cond-LSTM, 11).
// ---------------------------------------------------------------------------
#[test]
fn criterion_parameter_counts() {
    let lstm = CondLstmModel::init(Variant::Lstm, 24, 1);
    let cond = CondLstmModel::init(Variant::Cond, 24, 1);
    let ok = lstm.param_count() == 5793 && cond.param_count() == 5665;
    check(
        "parameter counts",
        ok,
        format!(
            "lstm = {}, cond = {}",
            lstm.param_count(),
            cond.param_count()
        ),
    );
}

// ---------------------------------------------------------------------------
// Battery-capacity identity: m = 22 -> 66 kWh nameplate, 52.8 kWh usable.
// ---------------------------------------------------------------------------
#[test]
fn criterion_battery_capacity_identity() {
    let (nameplate, usable) = full_charge_capacity(22, 3000.0, 0.2);
    let ok = nameplate == 66_000.0 && usable == 52_800.0;
    check(
        "battery capacity identity",
        ok,
        format!("nameplate {nameplate} Wh, usable {usable} Wh"),
    );
}

// ---------------------------------------------------------------------------
// Gradient correctness: analytic BPTT vs central finite differences,
// relative error < 1e-4 over 100 random tiny models.
// ---------------------------------------------------------------------------
#[test]
fn criterion_gradient_correctness() {
    let (hidden, input_dim, lookback, batch) = (4usize, 3usize, 5usize, 4usize);
    let mut worst: f64 = 0.0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = LstmWeights::glorot(hidden, input_dim, seed.wrapping_add(900));
        let windows: Vec<f64> = (0..batch * lookback * input_dim)
            .map(|_| rng.random::<f64>() * 2.0 - 1.0)
            .collect();
        let targets: Vec<f64> = (0..batch)
            .map(|_| rng.random::<f64>() * 2.0 - 1.0)
            .collect();
        let samples: Vec<PreparedSample<'_>> = (0..batch)
            .map(|k| PreparedSample {
                window: &windows[k * lookback * input_dim..(k + 1) * lookback * input_dim],
                target: targets[k],
                gate: 1.0,
            })
            .collect();
        let (grad, _) = batch_gradients(&w, lookback, &samples);
        let loss = |w: &LstmWeights| -> f64 {
            samples
                .iter()
                .map(|s| sample_loss(w, lookback, s))
                .sum::<f64>()
                / batch as f64
        };

        let h = 1e-5;
        let mut probe = |analytic: f64, bump: &mut dyn FnMut(&mut LstmWeights, f64)| {
            let mut wp = w.clone();
            bump(&mut wp, h);
            let mut wm = w.clone();
            bump(&mut wm, -h);
            let numeric = (loss(&wp) - loss(&wm)) / (2.0 * h);
            let denom = analytic.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max((analytic - numeric).abs() / denom);
        };
        for idx in 0..w.w_ih.len() {
            probe(grad.w_ih[idx], &mut |w, d| w.w_ih[idx] += d);
        }
        for idx in 0..w.w_hh.len() {
            probe(grad.w_hh[idx], &mut |w, d| w.w_hh[idx] += d);
        }
        for idx in 0..w.bias.len() {
            probe(grad.bias[idx], &mut |w, d| w.bias[idx] += d);
        }
        for idx in 0..w.dense_w.len() {
            probe(grad.dense_w[idx], &mut |w, d| w.dense_w[idx] += d);
        }
        probe(grad.dense_b, &mut |w, d| w.dense_b += d);
    }
    check(
        "gradient correctness",
        worst < 1e-4,
        format!("worst relative error {worst:.3e} over 100 models"),
    );
}

// ---------------------------------------------------------------------------
// Optimizer oracle equivalence: enumeration vs big-M branch-and-bound on
// 50 random 168-hour instances.
// ---------------------------------------------------------------------------

/// Random week-long sizing instance: diurnal harvest with per-day cloudiness,
/// diurnal consumption with noise.
fn random_instance(seed: u64, hours: usize) -> SizingProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amplitude = 200.0 + rng.random::<f64>() * 250.0;
    let base_draw = 400.0 + rng.random::<f64>() * 2000.0;
    let mut harvest = Vec::with_capacity(hours);
    let mut consumption = Vec::with_capacity(hours);
    let mut cloud = 0.5;
    for t in 0..hours {
        let h = t % 24;
        if h == 0 {
            cloud = (0.2 + rng.random::<f64>() * 0.8).min(1.0);
        }
        let x = (h as f64 - 12.0) / 3.5;
        let sun = if (6..19).contains(&h) {
            (-x * x).exp()
        } else {
            0.0
        };
        harvest.push(amplitude * sun * cloud);
        let diurnal = 0.7 + 0.3 * ((h as f64 - 15.0) * std::f64::consts::PI / 12.0).cos();
        consumption.push(base_draw * diurnal * (0.9 + 0.2 * rng.random::<f64>()));
    }
    SizingProblem::new(harvest, consumption).unwrap()
}

#[test]
fn criterion_optimizer_oracle_equivalence() {
    let mut agreements = 0usize;
    let mut detail = String::new();
    let mut ok = true;
    for seed in 0..50u64 {
        let problem = random_instance(seed, 168);
        let enumeration = optimize_enumeration(&problem);
        let milp = optimize_bigm_milp(&problem);
        match (enumeration, milp) {
            (Ok(a), Ok(b)) => {
                if a.total_cost == b.total_cost {
                    agreements += 1;
                } else {
                    ok = false;
                    detail = format!(
                        "seed {seed}: enumeration ({}, {}) ${:.2} vs milp ({}, {}) ${:.2}",
                        a.n, a.m, a.total_cost, b.n, b.m, b.total_cost
                    );
                    break;
                }
            }
            (Err(Error::Infeasible(_)), Err(Error::Infeasible(_))) => {
                agreements += 1;
            }
            (a, b) => {
                ok = false;
                detail = format!("seed {seed}: divergent outcomes {a:?} vs {b:?}");
                break;
            }
        }
    }
    if ok {
        detail = format!("{agreements}/50 instances agree exactly");
    }
    check("optimizer oracle equivalence", ok, detail);
}

// ---------------------------------------------------------------------------
// Battery-simulation invariants: trace bounds over 10 000 randomized hours,
// zero outages for K = 0 solutions, and feasibility monotonicity on 100
// random lattice probes.
// ---------------------------------------------------------------------------
#[test]
fn criterion_battery_simulation_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);

    // trace bounds on a fully random 10 000-hour instance
    let hours = 10_000;
    let harvest: Vec<f64> = (0..hours).map(|_| rng.random::<f64>() * 430.0).collect();
    let consumption: Vec<f64> = (0..hours).map(|_| rng.random::<f64>() * 4000.0).collect();
    let problem = SizingProblem::new(harvest, consumption).unwrap();
    let mut bounds_ok = true;
    for &(n, m) in &[(0u32, 1u32), (5, 2), (40, 10), (200, 40)] {
        let trace = simulate_battery(&problem, n, m).unwrap();
        let cap = m as f64 * problem.battery_capacity_cb;
        bounds_ok &= trace
            .e_battery_trim
            .iter()
            .all(|&e| (0.0..=cap + 1e-9).contains(&e));
    }

    // K = 0 optima show zero outage hours
    let mut zero_outage_ok = true;
    for seed in [3u64, 17, 29] {
        let problem = random_instance(seed, 24 * 14);
        if let Ok(solution) = optimize_enumeration(&problem) {
            zero_outage_ok &= solution.outage_hours == 0;
        }
    }

    // feasibility monotonicity on random lattice probes
    let probe_problem = random_instance(777, 1000);
    let feasible = |n: u32, m: u32| {
        simulate_battery(&probe_problem, n, m)
            .unwrap()
            .outage_hours()
            <= probe_problem.max_outage_hours
    };
    let mut monotone_ok = true;
    for _ in 0..100 {
        let n = rng.random_range(0..120u32);
        let m = rng.random_range(1..40u32);
        if feasible(n, m) {
            monotone_ok &= feasible(n + 1, m) && feasible(n, m + 1);
        }
    }

    check(
        "battery simulation invariants",
        bounds_ok && zero_outage_ok && monotone_ok,
        format!("bounds {bounds_ok}, zero-outage {zero_outage_ok}, monotone {monotone_ok}"),
    );
}

// ---------------------------------------------------------------------------
// Gate soundness: 10 000 random windows with DHI = 0 at the prediction hour
// predict exactly zero.
// ---------------------------------------------------------------------------
#[test]
fn criterion_gate_soundness() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut ok = true;
    let mut tested = 0usize;
    for model_seed in 0..20u64 {
        let model = CondLstmModel::init(Variant::Cond, 24, model_seed);
        for _ in 0..500 {
            let mut window = Matrix::zeros(24, FEATURE_COUNT);
            for i in 0..24 {
                for j in 0..FEATURE_COUNT {
                    window.set(i, j, rng.random::<f64>() * 900.0);
                }
            }
            // non-sunlight prediction hour
            window.set(23, 3, 0.0);
            let pred = model.forward(&window).unwrap();
            ok &= pred == 0.0;
            tested += 1;
        }
    }
    check(
        "gate soundness",
        ok && tested == 10_000,
        format!("{tested} gated windows, all exactly zero: {ok}"),
    );
}

// ---------------------------------------------------------------------------
// Method ordering at desk scale: median hourly nRMSE over 3 seeds satisfies
// Cond-LSTM < LSTM < Markov and Cond-LSTM < 3% on a 6-year synthetic study
// (4 train / 1 val / 1 test).
// ---------------------------------------------------------------------------

fn predict_test_with_context(
    model: &CondLstmModel,
    series: &WeatherSeries,
    test_start: usize,
    test_len: usize,
) -> Vec<f64> {
    let start = test_start - (model.lookback - 1);
    let stitched = series.slice(start..test_start + test_len);
    let preds = model.predict_series(&stitched).unwrap();
    preds[preds.len() - test_len..].to_vec()
}

fn median(values: &mut Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values[values.len() / 2]
}

#[test]
fn criterion_method_ordering_desk_scale() {
    let location = iowa();
    let panel = PanelSpec::default_for(48_940.0, location.latitude);
    let test_start = 5 * HOURS_PER_YEAR;
    let test_len = HOURS_PER_YEAR;

    let nrmse = |variant: Option<Variant>, seed: u64| -> f64 {
        let series = synth_weather(&location, 6, seed).unwrap();
        let harvest = harvest_series(&series, &location, &panel);
        let actual = &harvest[test_start..test_start + test_len];
        let predicted = match variant {
            Some(v) => {
                let split = split_chronological(&series, 4, 1, 1).unwrap();
                let targets = SplitTargets {
                    train: harvest[..4 * HOURS_PER_YEAR].to_vec(),
                    validation: harvest[4 * HOURS_PER_YEAR..5 * HOURS_PER_YEAR].to_vec(),
                };
                // The Cond-LSTM's robust-scaled targets span several times
                // the min-max range, so it takes a proportionally larger
                // step size (and smaller batches) to converge in comparable
                // wall time.
                let config = match v {
                    Variant::Lstm => TrainConfig {
                        max_epochs: 22,
                        patience: 12,
                        seed: seed.wrapping_add(31),
                        ..TrainConfig::default()
                    },
                    Variant::Cond => TrainConfig {
                        max_epochs: 25,
                        patience: 12,
                        batch_size: 128,
                        initial_lr: 3e-3,
                        seed: seed.wrapping_add(31),
                        ..TrainConfig::default()
                    },
                };
                let (model, _) = train(&split, &targets, &config, v).unwrap();
                predict_test_with_context(&model, &series, test_start, test_len)
            }
            None => {
                let model = fit_markov(&harvest[..5 * HOURS_PER_YEAR], 5).unwrap();
                let slice = &harvest[test_start - 24..test_start + test_len];
                predict_day_ahead_series(&model, slice, (test_start / 24 - 1) % 365).unwrap()
            }
        };
        error_report(actual, &predicted).unwrap().nrmse_hourly
    };

    let seeds = [101u64, 202, 303];
    let mut markov: Vec<f64> = seeds.iter().map(|&s| nrmse(None, s)).collect();
    let mut lstm: Vec<f64> = seeds
        .iter()
        .map(|&s| nrmse(Some(Variant::Lstm), s))
        .collect();
    let mut cond: Vec<f64> = seeds
        .iter()
        .map(|&s| nrmse(Some(Variant::Cond), s))
        .collect();

    let (m_md, l_md, c_md) = (median(&mut markov), median(&mut lstm), median(&mut cond));
    // the day-state baseline should trail the gated model by a wide margin
    let ok = c_md < l_md && l_md < m_md && c_md < 3.0 && m_md >= 5.0 * c_md;
    check(
        "method ordering at desk scale",
        ok,
        format!("median nRMSE: cond {c_md:.3}% < lstm {l_md:.3}% < markov {m_md:.3}%"),
    );
}

// ---------------------------------------------------------------------------
// Metric definitions: the nRMSE formula on hand cases plus scale
// equivariance.
// ---------------------------------------------------------------------------
#[test]
fn criterion_metric_definitions() {
    // hand case: range 100, constant +10 error
    let mut actual = vec![50.0; 48];
    actual[0] = 0.0;
    actual[1] = 100.0;
    let predicted: Vec<f64> = actual.iter().map(|a| a + 10.0).collect();
    let r = error_report(&actual, &predicted).unwrap();
    let mut ok = (r.rmse_hourly - 10.0).abs() < 1e-12 && (r.nrmse_hourly - 10.0).abs() < 1e-12;

    // scale equivariance across several factors
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a: Vec<f64> = (0..96).map(|_| rng.random::<f64>() * 1000.0).collect();
    let p: Vec<f64> = a.iter().map(|v| v + rng.random::<f64>() * 50.0).collect();
    let base = error_report(&a, &p).unwrap();
    for k in [0.5, 3.0, 250.0] {
        let ka: Vec<f64> = a.iter().map(|v| v * k).collect();
        let kp: Vec<f64> = p.iter().map(|v| v * k).collect();
        let scaled = error_report(&ka, &kp).unwrap();
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1e-9);
        ok &= close(scaled.rmse_hourly, base.rmse_hourly * k);
        ok &= close(scaled.nrmse_hourly, base.nrmse_hourly);
        ok &= close(scaled.mpe_daily, base.mpe_daily);
        ok &= close(scaled.mae_daily, base.mae_daily * k);
    }
    check(
        "metric definitions",
        ok,
        "nRMSE hand case + scale equivariance".into(),
    );
}

// ---------------------------------------------------------------------------
// Checkpoint round trip: save -> load -> predict is bit-identical.
// ---------------------------------------------------------------------------
#[test]
fn criterion_checkpoint_round_trip() {
    let location = iowa();
    let series = synth_weather(&location, 1, 8).unwrap();
    let train_slice = series.slice(0..24 * 40);
    let val_slice = series.slice(24 * 40..24 * 50);
    let test_slice = series.slice(24 * 50..24 * 60);
    let panel = PanelSpec::default_for(48_940.0, location.latitude);
    let harvest = harvest_series(&series, &location, &panel);
    let split = sunsite_core::weather::DatasetSplit {
        train: train_slice,
        validation: val_slice,
        test: test_slice.clone(),
    };
    let targets = SplitTargets {
        train: harvest[..24 * 40].to_vec(),
        validation: harvest[24 * 40..24 * 50].to_vec(),
    };
    let config = TrainConfig {
        max_epochs: 3,
        patience: 2,
        batch_size: 128,
        seed: 55,
        ..TrainConfig::default()
    };
    let (model, log) = train(&split, &targets, &config, Variant::Cond).unwrap();

    let dir = std::env::temp_dir().join("sunsite-acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("roundtrip.json");
    save_checkpoint(
        &model,
        &config,
        log.epochs.len(),
        log.best_val().unwrap(),
        &path,
    )
    .unwrap();
    let (loaded, _) = load_checkpoint(&path).unwrap();
    std::fs::remove_file(&path).ok();

    let before = model.predict_series(&test_slice).unwrap();
    let after = loaded.predict_series(&test_slice).unwrap();
    let ok = before == after && model == loaded;
    check(
        "checkpoint round trip",
        ok,
        format!("{} predictions bit-identical", before.len()),
    );
}

// ---------------------------------------------------------------------------
// Feature-matrix and split properties used throughout the suites.
// ---------------------------------------------------------------------------
#[test]
fn criterion_feature_and_split_contracts() {
    let location = iowa();
    let series = synth_weather(&location, 2, 3).unwrap();
    let m = feature_matrix(&series).unwrap();
    let mut ok = m.rows == series.len() && m.cols == FEATURE_COUNT;
    for (i, rec) in series.records().iter().enumerate().take(200) {
        ok &= m.get(i, 3) == rec.dhi;
    }
    let split = split_chronological(&series, 1, 0, 1).unwrap();
    ok &= split.train.len() == HOURS_PER_YEAR && split.test.len() == HOURS_PER_YEAR;
    check(
        "feature matrix and split contracts",
        ok,
        format!("{}x{} features", m.rows, m.cols),
    );
}
