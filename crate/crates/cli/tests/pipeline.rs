//! End-to-end CLI tests: artifact production, determinism, exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_sunsite")
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn sunsite")
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sunsite-cli-{name}"));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_tiny_config(dir: &Path) -> PathBuf {
    let path = dir.join("config.json");
    let config = r#"{
        "data": {"synth_years": 3},
        "split": {"train_years": 1, "val_years": 1, "test_years": 1},
        "train": {"max_epochs": 2, "patience": 1, "batch_size": 512, "initial_lr": 0.002},
        "sizing": {"horizon_hours": 240, "horizon_offset_hours": 3624}
    }"#;
    std::fs::write(&path, config).unwrap();
    path
}

#[test]
fn run_study_emits_all_artifacts_and_is_deterministic() {
    let dir = tmp_dir("run");
    let config = write_tiny_config(&dir);

    let out = run(
        &dir,
        &[
            "run",
            "--config",
            config.to_str().unwrap(),
            "--out",
            "a",
            "--seed",
            "5",
        ],
    );
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    for artifact in [
        "weather.csv",
        "harvest_truth.csv",
        "checkpoint_cond.json",
        "training_log_cond.csv",
        "predictions_cond.csv",
        "error_report_cond.json",
        "sizing_cond.json",
        "summary.txt",
        "predicted_vs_actual_cond.svg",
    ] {
        assert!(dir.join("a").join(artifact).exists(), "missing {artifact}");
    }

    // byte-identical rerun with the same seed
    let out2 = run(
        &dir,
        &[
            "run",
            "--config",
            config.to_str().unwrap(),
            "--out",
            "b",
            "--seed",
            "5",
        ],
    );
    assert!(out2.status.success());
    for artifact in [
        "weather.csv",
        "harvest_truth.csv",
        "checkpoint_cond.json",
        "predictions_cond.csv",
        "error_report_cond.json",
        "sizing_cond.json",
        "summary.txt",
    ] {
        let a = std::fs::read(dir.join("a").join(artifact)).unwrap();
        let b = std::fs::read(dir.join("b").join(artifact)).unwrap();
        assert_eq!(a, b, "{artifact} differs between identical runs");
    }

    // a different seed must change the data
    let out3 = run(
        &dir,
        &[
            "run",
            "--config",
            config.to_str().unwrap(),
            "--out",
            "c",
            "--seed",
            "6",
        ],
    );
    assert!(out3.status.success());
    let a = std::fs::read(dir.join("a").join("weather.csv")).unwrap();
    let c = std::fs::read(dir.join("c").join("weather.csv")).unwrap();
    assert_ne!(a, c);
}

#[test]
fn pipeline_steps_compose_through_artifacts() {
    let dir = tmp_dir("steps");
    let config = write_tiny_config(&dir);
    let cfg = config.to_str().unwrap();

    for step in ["synth", "truth", "train", "predict", "evaluate", "size"] {
        let out = run(
            &dir,
            &[step, "--config", cfg, "--out", "out", "--seed", "9"],
        );
        assert!(
            out.status.success(),
            "{step} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.join("out/error_report_cond.json")).unwrap(),
    )
    .unwrap();
    assert!(report.get("nrmse_hourly").is_some());
    let sizing: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("out/sizing_cond.json")).unwrap())
            .unwrap();
    assert!(sizing.get("cost_difference_percent").is_some());
}

#[test]
fn markov_variant_runs_without_checkpoints() {
    let dir = tmp_dir("markov");
    let config = write_tiny_config(&dir);
    let cfg = config.to_str().unwrap();
    for step in ["synth", "truth"] {
        assert!(
            run(&dir, &[step, "--config", cfg, "--out", "m", "--seed", "4"])
                .status
                .success()
        );
    }
    let out = run(
        &dir,
        &[
            "predict",
            "--config",
            cfg,
            "--out",
            "m",
            "--seed",
            "4",
            "--variant",
            "markov",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = run(
        &dir,
        &[
            "evaluate",
            "--config",
            cfg,
            "--out",
            "m",
            "--seed",
            "4",
            "--variant",
            "markov",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir.join("m/error_report_markov.json").exists());
}

#[test]
fn missing_input_exits_with_data_error_naming_path() {
    let dir = tmp_dir("missing");
    let out = run(&dir, &["truth", "--out", "nothing-here"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("location.json") || stderr.contains("weather.csv"),
        "stderr should name the missing path: {stderr}"
    );
}

#[test]
fn usage_error_exits_one() {
    let dir = tmp_dir("usage");
    let out = run(&dir, &["no-such-subcommand"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&dir, &["evaluate", "--variant", "nonsense"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn infeasible_sizing_exits_three() {
    let dir = tmp_dir("infeasible");
    let config = dir.join("config.json");
    // Zero harvest over five days: the in-bounds battery bank covers at most
    // two days of worst-case draw, so no (n, m) can meet a zero budget.
    std::fs::write(
        &config,
        r#"{
            "split": {"train_years": 0, "val_years": 0, "test_years": 1},
            "sizing": {"horizon_hours": 120, "horizon_offset_hours": 0}
        }"#,
    )
    .unwrap();
    std::fs::create_dir_all(dir.join("x")).unwrap();
    let mut harvest = String::from("timestamp,wh\n");
    for i in 0..120 {
        harvest.push_str(&format!("t{i},0\n"));
    }
    std::fs::write(dir.join("x/harvest_truth.csv"), harvest).unwrap();

    let out = run(
        &dir,
        &[
            "size",
            "--config",
            config.to_str().unwrap(),
            "--out",
            "x",
            "--seed",
            "3",
            "--variant",
            "truth",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(3),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("infeasible"), "stderr: {stderr}");
}

#[test]
fn ingest_reads_psm3_layout() {
    let dir = tmp_dir("ingest");
    let mut csv = String::from(
        "Source,Location ID,City,State,Country,Latitude,Longitude,Time Zone,Elevation\n\
         NSRDB,149190,Des Moines,IA,United States,41.6,-93.6,-6,292\n\
         Year,Month,Day,Hour,Minute,DHI,DNI,GHI,Dew Point,Temperature,Pressure,Relative Humidity,Wind Direction,Wind Speed,Surface Albedo\n",
    );
    for day in 1..=2 {
        for hour in 0..24 {
            let (dhi, dni, ghi) = if (8..17).contains(&hour) {
                (90.0, 500.0, 380.0)
            } else {
                (0.0, 0.0, 0.0)
            };
            csv.push_str(&format!(
                "2020,1,{day},{hour},0,{dhi},{dni},{ghi},-4,2,985,70,200,3.5,0.3\n"
            ));
        }
    }
    let input = dir.join("psm3.csv");
    std::fs::write(&input, csv).unwrap();
    let out = run(
        &dir,
        &["ingest", "--input", input.to_str().unwrap(), "--out", "i"],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let location: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("i/location.json")).unwrap())
            .unwrap();
    assert_eq!(location["latitude"], 41.6);
    assert_eq!(location["region_label"], "IA");
    let weather = std::fs::read_to_string(dir.join("i/weather.csv")).unwrap();
    assert_eq!(weather.lines().count(), 49); // header + 48 hours
}

#[test]
fn compare_reports_one_row_per_method() {
    let dir = tmp_dir("compare");
    let config = write_tiny_config(&dir);
    let out = run(
        &dir,
        &[
            "compare",
            "--config",
            config.to_str().unwrap(),
            "--out",
            "cmp",
            "--seed",
            "8",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.join("cmp/compare_report.json")).unwrap(),
    )
    .unwrap();
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let metrics = &row[1];
        for key in [
            "nrmse_hourly",
            "rmse_hourly",
            "rmse_daily",
            "mae_daily",
            "me_daily",
            "mpe_daily",
        ] {
            assert!(metrics.get(key).is_some(), "missing {key}");
        }
    }
    assert_eq!(report["ranking"].as_array().unwrap().len(), 3);
    assert!(dir.join("cmp/compare_nrmse.svg").exists());
    assert!(dir.join("cmp/compare_table.txt").exists());
}

#[test]
fn cross_region_reports_section_per_location() {
    let dir = tmp_dir("crossregion");
    let config = dir.join("config.json");
    std::fs::write(
        &config,
        r#"{
            "data": {"synth_years": 3},
            "split": {"train_years": 1, "val_years": 1, "test_years": 1},
            "train": {"max_epochs": 2, "patience": 1, "batch_size": 512, "initial_lr": 0.002},
            "sizing": {"horizon_hours": 168, "horizon_offset_hours": 3624},
            "eval_locations": [
                {"latitude": 44.08, "longitude": -103.23, "timezone_offset": -7.0, "region_label": "SD"},
                {"latitude": 36.78, "longitude": -119.42, "timezone_offset": -8.0, "region_label": "CA"}
            ]
        }"#,
    )
    .unwrap();
    let out = run(
        &dir,
        &[
            "cross-region",
            "--config",
            config.to_str().unwrap(),
            "--out",
            "xr",
            "--seed",
            "6",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("xr/cross_region.json")).unwrap())
            .unwrap();
    let sections = report["sections"].as_array().unwrap();
    assert_eq!(sections.len(), 2);
    for section in sections {
        assert!(section.get("model_n").is_some());
        assert!(section.get("model_m").is_some());
        assert!(section.get("cost_difference_percent").is_some());
    }
    assert_eq!(sections[0]["region"], "SD");
    assert_eq!(sections[1]["region"], "CA");
}

#[test]
fn cv_uses_configured_folds() {
    let dir = tmp_dir("cv");
    let config = dir.join("config.json");
    std::fs::write(
        &config,
        r#"{
            "data": {"synth_years": 3},
            "cv_folds": [[1, 1], [2, 1]],
            "train": {"max_epochs": 1, "patience": 0, "batch_size": 1024, "initial_lr": 0.002}
        }"#,
    )
    .unwrap();
    let out = run(
        &dir,
        &[
            "cv",
            "--config",
            config.to_str().unwrap(),
            "--out",
            "cv",
            "--seed",
            "2",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("cv/cv_report.json")).unwrap())
            .unwrap();
    let folds = report["folds"].as_array().unwrap();
    assert_eq!(folds.len(), 2);
    assert_eq!(folds[0]["train_years"], 1);
    assert_eq!(folds[1]["train_years"], 2);
    assert!(dir.join("cv/cv_nrmse.svg").exists());
}
