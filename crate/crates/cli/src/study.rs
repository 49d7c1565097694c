//! Pipeline steps behind the subcommands: data preparation, ground truth,
//! training, prediction, evaluation, sizing, and the experiment suites.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sunsite_core::forecast::{
    load_checkpoint, save_checkpoint, train, CondLstmModel, SplitTargets, TrainConfig, Variant,
};
use sunsite_core::markov::{fit_markov, predict_day_ahead_series, MarkovModel};
use sunsite_core::metrics::{cost_difference, error_report, render_report_table, ErrorReport};
use sunsite_core::pv::harvest_series;
use sunsite_core::sizing::{
    optimize_bigm_milp, optimize_enumeration, render_sizing_table, SizingProblem, SizingSolution,
};
use sunsite_core::traffic::{consumption_series, synth_traffic};
use sunsite_core::weather::{
    parse_psm3_csv, read_canonical_csv_file, read_value_csv, split_chronological, synth_weather,
    write_canonical_csv_file, write_value_csv, DatasetSplit, Location, WeatherSeries,
    HOURS_PER_YEAR,
};
use sunsite_core::{Error, Result};

use crate::config::StudyConfig;
use crate::svg;

/// Which harvest source a command operates on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Lstm,
    Cond,
    Markov,
    Truth,
}

impl Method {
    pub fn parse(s: &str) -> Result<Method> {
        match s {
            "lstm" => Ok(Method::Lstm),
            "cond" => Ok(Method::Cond),
            "markov" => Ok(Method::Markov),
            "truth" => Ok(Method::Truth),
            other => Err(Error::Domain(format!(
                "unknown variant {other:?} (expected lstm, cond, markov or truth)"
            ))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Method::Lstm => "lstm",
            Method::Cond => "cond",
            Method::Markov => "markov",
            Method::Truth => "truth",
        }
    }

    fn nn_variant(&self) -> Option<Variant> {
        match self {
            Method::Lstm => Some(Variant::Lstm),
            Method::Cond => Some(Variant::Cond),
            _ => None,
        }
    }
}

pub struct Study {
    pub config: StudyConfig,
}

impl Study {
    pub fn new(config: StudyConfig) -> Result<Self> {
        std::fs::create_dir_all(&config.out_dir)?;
        Ok(Study { config })
    }

    fn out(&self, name: &str) -> PathBuf {
        self.config.out_dir.join(name)
    }

    /// Per-variant training config with the master seed folded in so either
    /// knob moves the stream.
    fn train_config(&self, variant: Variant) -> Result<TrainConfig> {
        let mut tc = self.config.train_for(variant)?;
        tc.seed = self
            .config
            .seed
            .wrapping_mul(0x9E37_79B9)
            .wrapping_add(tc.seed);
        Ok(tc)
    }

    // ---- data steps -----------------------------------------------------

    pub fn cmd_ingest(&self, input: Option<&Path>) -> Result<()> {
        let path = input
            .map(Path::to_path_buf)
            .or_else(|| self.config.data.psm3_path.clone())
            .ok_or_else(|| {
                Error::Domain("ingest needs --input or data.psm3_path in the config".into())
            })?;
        let (location, series) = parse_psm3_csv(&path)?;
        self.write_weather(&location, &series)?;
        println!(
            "ingested {} hours from {} ({})",
            series.len(),
            path.display(),
            location.region_label
        );
        Ok(())
    }

    pub fn cmd_synth(&self) -> Result<()> {
        let location = self.config.location.to_location()?;
        let series = synth_weather(&location, self.config.data.synth_years, self.config.seed)?;
        self.write_weather(&location, &series)?;
        println!(
            "synthesized {} years ({} hours) at {}",
            self.config.data.synth_years,
            series.len(),
            location.region_label
        );
        Ok(())
    }

    fn write_weather(&self, location: &Location, series: &WeatherSeries) -> Result<()> {
        write_canonical_csv_file(series, self.out("weather.csv"))?;
        std::fs::write(
            self.out("location.json"),
            serde_json::to_string_pretty(location)?,
        )?;
        Ok(())
    }

    pub fn read_weather(&self) -> Result<(Location, WeatherSeries)> {
        let loc_path = self.out("location.json");
        let text = std::fs::read_to_string(&loc_path).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", loc_path.display()),
            ))
        })?;
        let location: Location = serde_json::from_str(&text)?;
        let series = read_canonical_csv_file(self.out("weather.csv"))?;
        Ok((location, series))
    }

    pub fn cmd_truth(&self) -> Result<()> {
        let (location, series) = self.read_weather()?;
        let panel = self.config.panel.to_panel(location.latitude);
        let harvest = harvest_series(&series, &location, &panel);
        write_value_csv(
            &series,
            &harvest,
            "wh",
            std::fs::File::create(self.out("harvest_truth.csv"))?,
        )?;
        println!(
            "computed {} hourly harvest values for a {:.2} kW array",
            harvest.len(),
            panel.rated_power_stc / 1000.0
        );
        Ok(())
    }

    pub fn read_truth(&self) -> Result<Vec<f64>> {
        let path = self.out("harvest_truth.csv");
        let file = std::fs::File::open(&path).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            ))
        })?;
        read_value_csv(std::io::BufReader::new(file))
    }

    fn split(&self, series: &WeatherSeries) -> Result<DatasetSplit> {
        split_chronological(
            series,
            self.config.split.train_years,
            self.config.split.val_years,
            self.config.split.test_years,
        )
    }

    fn split_targets(&self, harvest: &[f64]) -> SplitTargets {
        let a = self.config.split.train_years * HOURS_PER_YEAR;
        let b = a + self.config.split.val_years * HOURS_PER_YEAR;
        SplitTargets {
            train: harvest[..a].to_vec(),
            validation: harvest[a..b].to_vec(),
        }
    }

    // ---- model steps ----------------------------------------------------

    pub fn cmd_train(&self, method: Method) -> Result<()> {
        let (_, series) = self.read_weather()?;
        let harvest = self.read_truth()?;
        self.check_weather_truth_alignment(&series, &harvest)?;
        match method {
            Method::Markov => {
                let years = self.config.split.train_years + self.config.split.val_years;
                let model = fit_markov(&harvest[..years * HOURS_PER_YEAR], years)?;
                std::fs::write(self.out("markov_model.json"), model.to_json()?)?;
                println!("fitted markov model on {years} years");
            }
            Method::Truth => {
                return Err(Error::Domain("cannot train the ground-truth method".into()))
            }
            _ => {
                let variant = method.nn_variant().expect("nn method");
                let split = self.split(&series)?;
                let targets = self.split_targets(&harvest);
                let tc = self.train_config(variant)?;
                let (model, log) = train(&split, &targets, &tc, variant)?;
                let best_val = log.best_val().unwrap_or(f64::NAN);
                let best_epoch = log
                    .epochs
                    .iter()
                    .min_by(|a, b| a.val_mse.partial_cmp(&b.val_mse).unwrap())
                    .map(|e| e.epoch)
                    .unwrap_or(0);
                save_checkpoint(
                    &model,
                    &tc,
                    best_epoch,
                    best_val,
                    self.out(&format!("checkpoint_{}.json", method.label())),
                )?;
                std::fs::write(
                    self.out(&format!("training_log_{}.csv", method.label())),
                    log.to_csv_string(),
                )?;
                println!(
                    "trained {} for {} epochs (best val mse {:.6} at epoch {})",
                    method.label(),
                    log.epochs.len(),
                    best_val,
                    best_epoch
                );
            }
        }
        Ok(())
    }

    fn check_weather_truth_alignment(&self, series: &WeatherSeries, harvest: &[f64]) -> Result<()> {
        if series.len() != harvest.len() {
            return Err(Error::Alignment(format!(
                "weather has {} hours but harvest_truth.csv has {}",
                series.len(),
                harvest.len()
            )));
        }
        Ok(())
    }

    /// Predictions covering the whole test split. NN models see a context
    /// window stitched from the tail of the preceding data.
    fn predict_test(
        &self,
        method: Method,
        series: &WeatherSeries,
        harvest: &[f64],
    ) -> Result<Vec<f64>> {
        let test_start =
            (self.config.split.train_years + self.config.split.val_years) * HOURS_PER_YEAR;
        let test_len = self.config.split.test_years * HOURS_PER_YEAR;
        match method {
            Method::Truth => Ok(harvest[test_start..test_start + test_len].to_vec()),
            Method::Markov => {
                let years = self.config.split.train_years + self.config.split.val_years;
                let model = fit_markov(&harvest[..years * HOURS_PER_YEAR], years)?;
                self.markov_day_ahead(&model, harvest, test_start, test_len)
            }
            _ => {
                let path = self.out(&format!("checkpoint_{}.json", method.label()));
                let (model, _) = load_checkpoint(&path)?;
                self.predict_with_model(&model, series, test_start, test_len)
            }
        }
    }

    fn predict_with_model(
        &self,
        model: &CondLstmModel,
        series: &WeatherSeries,
        test_start: usize,
        test_len: usize,
    ) -> Result<Vec<f64>> {
        let context = model.lookback - 1;
        let start = test_start.saturating_sub(context);
        let stitched = series.slice(start..test_start + test_len);
        let preds = model.predict_series(&stitched)?;
        // predictions align to the last `test_len` hours
        Ok(preds[preds.len() - test_len..].to_vec())
    }

    fn markov_day_ahead(
        &self,
        model: &MarkovModel,
        harvest: &[f64],
        test_start: usize,
        test_len: usize,
    ) -> Result<Vec<f64>> {
        // one context day ahead of the test window
        let slice = &harvest[test_start - 24..test_start + test_len];
        let start_doy = (test_start / 24 - 1) % 365;
        predict_day_ahead_series(model, slice, start_doy)
    }

    pub fn cmd_predict(&self, method: Method) -> Result<()> {
        let (_, series) = self.read_weather()?;
        let harvest = self.read_truth()?;
        self.check_weather_truth_alignment(&series, &harvest)?;
        let preds = self.predict_test(method, &series, &harvest)?;
        let test_start =
            (self.config.split.train_years + self.config.split.val_years) * HOURS_PER_YEAR;
        let test = series.slice(test_start..test_start + preds.len());
        write_value_csv(
            &test,
            &preds,
            "wh",
            std::fs::File::create(self.out(&format!("predictions_{}.csv", method.label())))?,
        )?;
        println!(
            "wrote {} hourly predictions ({})",
            preds.len(),
            method.label()
        );
        Ok(())
    }

    pub fn cmd_evaluate(&self, method: Method) -> Result<ErrorReport> {
        let harvest = self.read_truth()?;
        let test_start =
            (self.config.split.train_years + self.config.split.val_years) * HOURS_PER_YEAR;
        let test_len = self.config.split.test_years * HOURS_PER_YEAR;
        let actual = &harvest[test_start..test_start + test_len];

        let pred_path = self.out(&format!("predictions_{}.csv", method.label()));
        let file = std::fs::File::open(&pred_path).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", pred_path.display()),
            ))
        })?;
        let predicted = read_value_csv(std::io::BufReader::new(file))?;
        let report = error_report(actual, &predicted)?;

        std::fs::write(
            self.out(&format!("error_report_{}.json", method.label())),
            serde_json::to_string_pretty(&report)?,
        )?;
        let table = render_report_table(&[(method.label().to_string(), report.clone())]);
        std::fs::write(
            self.out(&format!("error_report_{}.txt", method.label())),
            &table,
        )?;

        // two-week detail plot plus the numbers behind it
        let days = 14.min(actual.len() / 24);
        let window = days * 24;
        let chart = svg::line_chart(
            &format!(
                "hourly harvest, first {days} test days ({})",
                method.label()
            ),
            &[
                ("actual", &actual[..window]),
                ("predicted", &predicted[..window]),
            ],
        );
        std::fs::write(
            self.out(&format!("predicted_vs_actual_{}.svg", method.label())),
            chart,
        )?;
        let mut csv_text = String::from("hour,actual_wh,predicted_wh\n");
        for i in 0..window {
            csv_text.push_str(&format!("{i},{},{}\n", actual[i], predicted[i]));
        }
        std::fs::write(
            self.out(&format!("predicted_vs_actual_{}.csv", method.label())),
            csv_text,
        )?;
        print!("{table}");
        Ok(report)
    }

    // ---- sizing ---------------------------------------------------------

    /// Builds the sizing instance over the configured window of a harvest
    /// series that starts at the beginning of the test split.
    fn sizing_problem(&self, harvest_from_test: &[f64], seed: u64) -> Result<SizingProblem> {
        let offset = self.config.sizing.horizon_offset_hours;
        let horizon = self.config.sizing.horizon_hours;
        if harvest_from_test.len() < offset + horizon {
            return Err(Error::InsufficientData(format!(
                "sizing window {offset}+{horizon} exceeds available {} hours",
                harvest_from_test.len()
            )));
        }
        let module_scale = self.config.panel.module_rating_w / self.config.panel.rated_power_stc;
        let per_module: Vec<f64> = harvest_from_test[offset..offset + horizon]
            .iter()
            .map(|h| h * module_scale)
            .collect();
        let profile = synth_traffic(horizon, self.config.power.peak_load, seed);
        let consumption = consumption_series(&profile, &self.config.power)?;
        let mut problem = SizingProblem::new(per_module, consumption)?;
        problem.battery_capacity_cb = self.config.sizing.battery_capacity_wh;
        problem.dod_floor = self.config.sizing.dod_floor;
        problem.pv_unit_cost = self.config.sizing.pv_unit_cost;
        problem.battery_unit_cost = self.config.sizing.battery_unit_cost;
        problem.max_outage_hours = self.config.sizing.max_outage_hours;
        problem.epsilon = self.config.sizing.epsilon_wh;
        problem.validate()?;
        Ok(problem)
    }

    /// Sizes on the method's harvest and on the ground truth, reporting the
    /// cost difference between the two.
    pub fn cmd_size(&self, method: Method) -> Result<()> {
        let harvest = self.read_truth()?;
        let test_start =
            (self.config.split.train_years + self.config.split.val_years) * HOURS_PER_YEAR;
        let traffic_seed = self.config.seed.wrapping_add(1);

        let truth_slice = &harvest[test_start..];
        let truth_problem = self.sizing_problem(truth_slice, traffic_seed)?;
        let truth_solution = optimize_enumeration(&truth_problem)?;

        let (label, solution) = if method == Method::Truth {
            ("truth".to_string(), truth_solution.clone())
        } else {
            let pred_path = self.out(&format!("predictions_{}.csv", method.label()));
            let file = std::fs::File::open(&pred_path).map_err(|e| {
                Error::Io(std::io::Error::new(
                    e.kind(),
                    format!("{}: {e}", pred_path.display()),
                ))
            })?;
            let predicted = read_value_csv(std::io::BufReader::new(file))?;
            let problem = self.sizing_problem(&predicted, traffic_seed)?;
            (method.label().to_string(), optimize_enumeration(&problem)?)
        };

        if self.config.sizing.cross_check_milp {
            let milp = optimize_bigm_milp(&truth_problem)?;
            if milp.total_cost != truth_solution.total_cost {
                return Err(Error::State(format!(
                    "MILP cost {} disagrees with enumeration {}",
                    milp.total_cost, truth_solution.total_cost
                )));
            }
        }

        let diff = cost_difference(solution.total_cost, truth_solution.total_cost)?;
        let doc = SizingReport {
            method: label.clone(),
            solution: solution.clone(),
            truth: truth_solution.clone(),
            cost_difference_percent: diff,
        };
        std::fs::write(
            self.out(&format!("sizing_{}.json", method.label())),
            serde_json::to_string_pretty(&doc)?,
        )?;
        let table = render_sizing_table(&truth_solution, &[(label, solution.clone())]);
        std::fs::write(self.out("sizing_table.txt"), &table)?;
        print!("{table}");
        println!(
            "optimal ({}, {}) costing ${:.2}; {} outage hours",
            solution.n, solution.m, solution.total_cost, solution.outage_hours
        );
        Ok(())
    }

    // ---- orchestrated study ----------------------------------------------

    pub fn cmd_run(&self, method: Method) -> Result<()> {
        if self.config.data.psm3_path.is_some() {
            self.cmd_ingest(None)?;
        } else {
            self.cmd_synth()?;
        }
        self.cmd_truth()?;
        if method.nn_variant().is_some() || method == Method::Markov {
            self.cmd_train(method)?;
        }
        self.cmd_predict(method)?;
        let report = self.cmd_evaluate(method)?;
        self.cmd_size(method)?;

        let mut summary = String::new();
        summary.push_str(&format!(
            "study: {} ({} years synth data, split {}/{}/{}, seed {})\n",
            self.config.location.region_label,
            self.config.data.synth_years,
            self.config.split.train_years,
            self.config.split.val_years,
            self.config.split.test_years,
            self.config.seed
        ));
        summary.push_str(&format!(
            "method {}: hourly nRMSE {:.3}%, hourly RMSE {:.3} W\n",
            method.label(),
            report.nrmse_hourly,
            report.rmse_hourly
        ));
        let model_artifact = match method {
            Method::Markov => "markov_model.json".to_string(),
            Method::Truth => String::new(),
            _ => format!("checkpoint_{}.json", method.label()),
        };
        summary.push_str("artifacts: weather.csv, harvest_truth.csv, ");
        if !model_artifact.is_empty() {
            summary.push_str(&model_artifact);
            summary.push_str(", ");
        }
        summary.push_str(&format!(
            "predictions_{m}.csv, error_report_{m}.json, sizing_{m}.json\n",
            m = method.label()
        ));
        std::fs::write(self.out("summary.txt"), summary)?;
        println!("study complete; summary.txt written");
        Ok(())
    }

    // ---- experiment suites ------------------------------------------------

    /// In-memory data preparation shared by the experiment suites.
    fn prepare_series(&self) -> Result<(Location, WeatherSeries, Vec<f64>)> {
        let (location, series) = match &self.config.data.psm3_path {
            Some(path) => parse_psm3_csv(path)?,
            None => {
                let location = self.config.location.to_location()?;
                let series =
                    synth_weather(&location, self.config.data.synth_years, self.config.seed)?;
                (location, series)
            }
        };
        let panel = self.config.panel.to_panel(location.latitude);
        let harvest = harvest_series(&series, &location, &panel);
        Ok((location, series, harvest))
    }

    pub fn cmd_compare(&self) -> Result<()> {
        let (_, series, harvest) = self.prepare_series()?;
        let split = self.split(&series)?;
        let targets = self.split_targets(&harvest);
        let test_start =
            (self.config.split.train_years + self.config.split.val_years) * HOURS_PER_YEAR;
        let test_len = self.config.split.test_years * HOURS_PER_YEAR;
        let actual = &harvest[test_start..test_start + test_len];

        let mut rows: Vec<(String, ErrorReport)> = Vec::new();
        for method in [Method::Markov, Method::Lstm, Method::Cond] {
            let predicted = match method {
                Method::Markov => {
                    let years = self.config.split.train_years + self.config.split.val_years;
                    let model = fit_markov(&harvest[..years * HOURS_PER_YEAR], years)?;
                    self.markov_day_ahead(&model, &harvest, test_start, test_len)?
                }
                _ => {
                    let variant = method.nn_variant().expect("nn method");
                    let tc = self.train_config(variant)?;
                    let (model, _) = train(&split, &targets, &tc, variant)?;
                    self.predict_with_model(&model, &series, test_start, test_len)?
                }
            };
            let report = error_report(actual, &predicted)?;
            std::fs::write(
                self.out(&format!("error_report_{}.json", method.label())),
                serde_json::to_string_pretty(&report)?,
            )?;
            rows.push((method.label().to_string(), report));
        }

        let table = render_report_table(&rows);
        std::fs::write(self.out("compare_table.txt"), &table)?;
        let mut ranked: Vec<&(String, ErrorReport)> = rows.iter().collect();
        ranked.sort_by(|a, b| a.1.nrmse_hourly.partial_cmp(&b.1.nrmse_hourly).unwrap());
        let ranking: Vec<String> = ranked.iter().map(|(m, _)| m.clone()).collect();
        let doc = CompareReport {
            rows: rows.iter().map(|(m, r)| (m.clone(), r.clone())).collect(),
            ranking: ranking.clone(),
        };
        std::fs::write(
            self.out("compare_report.json"),
            serde_json::to_string_pretty(&doc)?,
        )?;
        let nrmse: Vec<f64> = rows.iter().map(|(_, r)| r.nrmse_hourly).collect();
        let groups: Vec<String> = rows.iter().map(|(m, _)| m.clone()).collect();
        std::fs::write(
            self.out("compare_nrmse.svg"),
            svg::bar_chart("hourly nRMSE by method (%)", &groups, &[("nRMSE", &nrmse)]),
        )?;
        let mut csv_text = String::from("method,nrmse_hourly\n");
        for (m, v) in groups.iter().zip(&nrmse) {
            csv_text.push_str(&format!("{m},{v}\n"));
        }
        std::fs::write(self.out("compare_nrmse.csv"), csv_text)?;
        print!("{table}");
        println!("ranking (best first): {}", ranking.join(" < "));
        Ok(())
    }

    pub fn cmd_cv(&self) -> Result<()> {
        let (_, series, harvest) = self.prepare_series()?;
        let needed = self
            .config
            .cv_folds
            .iter()
            .map(|(tr, te)| tr + te)
            .max()
            .unwrap_or(0);
        if series.len() < needed * HOURS_PER_YEAR {
            return Err(Error::InsufficientData(format!(
                "cv needs {needed} years ({} rows), series has {}",
                needed * HOURS_PER_YEAR,
                series.len()
            )));
        }

        let mut folds = Vec::new();
        for &(train_years, test_years) in &self.config.cv_folds {
            // last training year doubles as the validation year
            let fit_years = train_years.saturating_sub(1).max(1);
            let val_years = train_years - fit_years;
            let split = split_chronological(&series, fit_years, val_years, test_years)?;
            let a = fit_years * HOURS_PER_YEAR;
            let b = train_years * HOURS_PER_YEAR;
            let targets = SplitTargets {
                train: harvest[..a].to_vec(),
                validation: harvest[a..b].to_vec(),
            };
            let test_start = b;
            let test_len = test_years * HOURS_PER_YEAR;
            let actual = &harvest[test_start..test_start + test_len];

            let mut fold = CvFold {
                train_years,
                test_years,
                metrics: Vec::new(),
            };
            for variant in [Variant::Lstm, Variant::Cond] {
                let tc = self.train_config(variant)?;
                let (model, _) = train(&split, &targets, &tc, variant)?;
                let predicted = self.predict_with_model(&model, &series, test_start, test_len)?;
                let report = error_report(actual, &predicted)?;
                fold.metrics.push((
                    variant.to_string(),
                    FoldMetric {
                        rmse_hourly: report.rmse_hourly,
                        nrmse_hourly: report.nrmse_hourly,
                    },
                ));
            }
            folds.push(fold);
        }

        let doc = CvReport { folds };
        std::fs::write(
            self.out("cv_report.json"),
            serde_json::to_string_pretty(&doc)?,
        )?;
        let mut csv_text = String::from("train_years,test_years,method,rmse_hourly,nrmse_hourly\n");
        for fold in &doc.folds {
            for (method, m) in &fold.metrics {
                csv_text.push_str(&format!(
                    "{},{},{method},{},{}\n",
                    fold.train_years, fold.test_years, m.rmse_hourly, m.nrmse_hourly
                ));
            }
        }
        std::fs::write(self.out("cv_report.csv"), &csv_text)?;
        let groups: Vec<String> = doc
            .folds
            .iter()
            .map(|f| format!("{}y/{}y", f.train_years, f.test_years))
            .collect();
        let lstm: Vec<f64> = doc
            .folds
            .iter()
            .map(|f| f.metrics[0].1.nrmse_hourly)
            .collect();
        let cond: Vec<f64> = doc
            .folds
            .iter()
            .map(|f| f.metrics[1].1.nrmse_hourly)
            .collect();
        std::fs::write(
            self.out("cv_nrmse.svg"),
            svg::bar_chart(
                "time-series cross-validation, hourly nRMSE (%)",
                &groups,
                &[("lstm", &lstm), ("cond", &cond)],
            ),
        )?;
        println!("{csv_text}");
        Ok(())
    }

    pub fn cmd_cross_region(&self) -> Result<()> {
        let (_, series, harvest) = self.prepare_series()?;
        let split = self.split(&series)?;
        let targets = self.split_targets(&harvest);
        let variant = Method::parse(&self.config.variant)?
            .nn_variant()
            .ok_or_else(|| Error::Domain("cross-region needs an NN variant".into()))?;
        let tc = self.train_config(variant)?;
        let (model, _) = train(&split, &targets, &tc, variant)?;

        let test_start =
            (self.config.split.train_years + self.config.split.val_years) * HOURS_PER_YEAR;
        let test_len = self.config.split.test_years * HOURS_PER_YEAR;
        let traffic_seed = self.config.seed.wrapping_add(1);

        let mut sections = Vec::new();
        let mut text = String::new();
        for (k, loc_cfg) in self.config.eval_locations.iter().enumerate() {
            let location = loc_cfg.to_location()?;
            // per-region weather stream, deterministic in the master seed
            let region_seed = self.config.seed.wrapping_add(1000 + k as u64);
            let region_series =
                synth_weather(&location, self.config.data.synth_years, region_seed)?;
            let panel = self.config.panel.to_panel(location.latitude);
            let region_harvest = harvest_series(&region_series, &location, &panel);
            let actual = &region_harvest[test_start..test_start + test_len];

            // no retraining: the pre-trained model sees the new region's weather
            let predicted =
                self.predict_with_model(&model, &region_series, test_start, test_len)?;
            let report = error_report(actual, &predicted)?;

            let truth_problem = self.sizing_problem(actual, traffic_seed)?;
            let truth_solution = optimize_enumeration(&truth_problem)?;
            let model_problem = self.sizing_problem(&predicted, traffic_seed)?;
            let model_solution = optimize_enumeration(&model_problem)?;
            let diff = cost_difference(model_solution.total_cost, truth_solution.total_cost)?;

            text.push_str(&format!("location: {}\n", location.region_label));
            text.push_str(&render_sizing_table(
                &truth_solution,
                &[(format!("{variant} (general)"), model_solution.clone())],
            ));
            text.push_str(&format!("hourly nRMSE {:.3}%\n\n", report.nrmse_hourly));
            sections.push(CrossRegionSection {
                region: location.region_label.clone(),
                report,
                truth_n: truth_solution.n,
                truth_m: truth_solution.m,
                truth_cost: truth_solution.total_cost,
                model_n: model_solution.n,
                model_m: model_solution.m,
                model_cost: model_solution.total_cost,
                cost_difference_percent: diff,
            });
        }

        let doc = CrossRegionReport {
            train_region: self.config.location.region_label.clone(),
            variant: variant.to_string(),
            sections,
        };
        std::fs::write(
            self.out("cross_region.json"),
            serde_json::to_string_pretty(&doc)?,
        )?;
        std::fs::write(self.out("cross_region.txt"), &text)?;
        print!("{text}");
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SizingReport {
    pub method: String,
    pub solution: SizingSolution,
    pub truth: SizingSolution,
    pub cost_difference_percent: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareReport {
    pub rows: Vec<(String, ErrorReport)>,
    pub ranking: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldMetric {
    pub rmse_hourly: f64,
    pub nrmse_hourly: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvFold {
    pub train_years: usize,
    pub test_years: usize,
    pub metrics: Vec<(String, FoldMetric)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: Vec<CvFold>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossRegionSection {
    pub region: String,
    pub report: ErrorReport,
    pub truth_n: u32,
    pub truth_m: u32,
    pub truth_cost: f64,
    pub model_n: u32,
    pub model_m: u32,
    pub model_cost: f64,
    pub cost_difference_percent: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossRegionReport {
    pub train_region: String,
    pub variant: String,
    pub sections: Vec<CrossRegionSection>,
}
