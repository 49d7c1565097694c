//! `sunsite`: forecasting and provisioning studies for solar-powered sites.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 infeasible sizing.

mod config;
mod study;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::StudyConfig;
use study::{Method, Study};
use sunsite_core::Error;

#[derive(Parser)]
#[command(
    name = "sunsite",
    version,
    about = "Solar harvest forecasting and PV/battery sizing"
)]
struct Cli {
    /// JSON config; defaults apply for every missing key.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed override (propagates to every stochastic component).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory override.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Method/variant: lstm, cond, markov (or truth where it makes sense).
    #[arg(long, global = true)]
    variant: Option<String>,
    /// Override a config key by dotted name, e.g. --set train.max_epochs=20
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a PSM3-style weather CSV into the canonical format.
    Ingest {
        /// Input CSV (falls back to data.psm3_path from the config).
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Generate synthetic weather for the configured location.
    Synth,
    /// Compute the physics ground-truth harvest series.
    Truth,
    /// Train the selected forecaster on the chronological split.
    Train,
    /// Predict the test split with a trained model.
    Predict,
    /// Compare predictions against the ground truth.
    Evaluate,
    /// Solve the cost-minimal (PV modules, batteries) configuration.
    Size,
    /// Train and rank markov, lstm and cond on the same split.
    Compare,
    /// Growing-window time-series cross-validation.
    Cv,
    /// Train in one region, evaluate and size in the others.
    CrossRegion,
    /// Full study: data, truth, train, predict, evaluate, size, summary.
    Run,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(error: &Error) -> u8 {
    match error {
        Error::Infeasible(_) => 3,
        Error::Domain(msg) if msg.contains("unknown variant") => 1,
        _ => 2,
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    let mut overrides: Vec<(String, String)> = Vec::new();
    for kv in &cli.set {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| Error::Domain(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        overrides.push((key.to_string(), value.to_string()));
    }
    if let Some(seed) = cli.seed {
        overrides.push(("seed".into(), seed.to_string()));
    }
    if let Some(out) = &cli.out {
        overrides.push(("out_dir".into(), format!("{:?}", out.display().to_string())));
    }
    if let Some(variant) = &cli.variant {
        overrides.push(("variant".into(), format!("{variant:?}")));
    }

    let config = StudyConfig::load(cli.config.as_deref(), &overrides)?;
    let method = Method::parse(&config.variant)?;
    let study = Study::new(config)?;

    match cli.command {
        Command::Ingest { input } => study.cmd_ingest(input.as_deref()),
        Command::Synth => study.cmd_synth(),
        Command::Truth => study.cmd_truth(),
        Command::Train => study.cmd_train(method),
        Command::Predict => study.cmd_predict(method),
        Command::Evaluate => study.cmd_evaluate(method).map(|_| ()),
        Command::Size => study.cmd_size(method),
        Command::Compare => study.cmd_compare(),
        Command::Cv => study.cmd_cv(),
        Command::CrossRegion => study.cmd_cross_region(),
        Command::Run => study.cmd_run(method),
    }
}
