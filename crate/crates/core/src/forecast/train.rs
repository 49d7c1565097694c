//! Training loop: mini-batch Adam with early stopping, best-checkpoint
//! restore, and a learning-rate schedule (constant warmup, exponential decay,
//! plateau reduction with a floor).

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamState};
use super::grad::{batch_gradients, sample_loss, PreparedSample};
use super::lstm::LstmWeights;
use super::scaler::fit_scaler;
use super::{select_columns, CondLstmModel, ScalerParams, Variant, HIDDEN_SIZE};
use crate::matrix::Matrix;
use crate::weather::{feature_matrix, DatasetSplit, WeatherSeries, DHI_FEATURE_INDEX};
use crate::{Error, Result};

/// Learning-rate floor for the schedule.
const LR_FLOOR: f64 = 1e-5;
/// Epochs of constant learning rate before exponential decay sets in.
const LR_WARMUP_EPOCHS: usize = 10;
/// Per-epoch decay factor after warmup.
const LR_DECAY: f64 = 0.97;

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub max_epochs: usize,
    /// Early-stopping patience in epochs without validation improvement.
    pub patience: usize,
    pub batch_size: usize,
    pub initial_lr: f64,
    /// Multiplier applied to the learning rate on a plateau.
    pub plateau_factor: f64,
    /// Epochs without improvement before the plateau reduction fires.
    pub plateau_patience: usize,
    pub seed: u64,
    /// Window length in hours.
    pub lookback: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_epochs: 200,
            patience: 10,
            batch_size: 256,
            initial_lr: 1e-3,
            plateau_factor: 0.5,
            plateau_patience: 5,
            seed: 42,
            lookback: 24,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_epochs == 0 {
            return Err(Error::Domain("max_epochs must be at least 1".into()));
        }
        if self.patience >= self.max_epochs {
            return Err(Error::Domain(format!(
                "patience {} must be below max_epochs {}",
                self.patience, self.max_epochs
            )));
        }
        if self.batch_size == 0 || self.lookback == 0 {
            return Err(Error::Domain(
                "batch_size and lookback must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Harvest targets aligned hour-by-hour with a dataset split.
#[derive(Debug, Clone)]
pub struct SplitTargets {
    pub train: Vec<f64>,
    pub validation: Vec<f64>,
}

/// One epoch of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
    pub lr: f64,
}

/// Per-epoch history of a training run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epochs: Vec<EpochRecord>,
}

impl TrainingLog {
    pub fn best_val(&self) -> Option<f64> {
        self.epochs
            .iter()
            .map(|e| e.val_mse)
            .min_by(|a, b| a.partial_cmp(b).unwrap())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("epoch,train_mse,val_mse,lr\n");
        for e in &self.epochs {
            out.push_str(&format!(
                "{},{},{},{}\n",
                e.epoch, e.train_mse, e.val_mse, e.lr
            ));
        }
        out
    }
}

/// Scaled features, targets and gates for one split part.
struct PartData {
    scaled: Matrix,
    targets: Vec<f64>,
    gates: Vec<f64>,
}

impl PartData {
    fn prepare(
        series: &WeatherSeries,
        targets_raw: &[f64],
        input_scaler: &ScalerParams,
        target_scaler: &ScalerParams,
        cols: &[usize],
    ) -> Result<Self> {
        let raw = feature_matrix(series)?;
        let scaled = input_scaler.transform_matrix(&select_columns(&raw, cols))?;
        let targets = targets_raw
            .iter()
            .map(|&t| target_scaler.transform_value(t))
            .collect();
        let gates = (0..raw.rows)
            .map(|i| {
                if raw.get(i, DHI_FEATURE_INDEX) > 0.0 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        Ok(PartData {
            scaled,
            targets,
            gates,
        })
    }

    fn sample(
        &self,
        end_row: usize,
        lookback: usize,
        d: usize,
        variant: Variant,
    ) -> PreparedSample<'_> {
        let start = end_row + 1 - lookback;
        PreparedSample {
            window: &self.scaled.data[start * d..(end_row + 1) * d],
            target: self.targets[end_row],
            gate: match variant {
                Variant::Lstm => 1.0,
                Variant::Cond => self.gates[end_row],
            },
        }
    }
}

/// Trains the chosen variant on a split with aligned harvest targets.
///
/// Scalers are fitted on the training part only. Training stops when the
/// validation loss fails to improve for `patience` epochs or at `max_epochs`,
/// whichever comes first, and the returned model carries the
/// best-validation-epoch weights. With an empty validation part the training
/// loss drives stopping and checkpointing instead.
pub fn train(
    split: &DatasetSplit,
    targets: &SplitTargets,
    config: &TrainConfig,
    variant: Variant,
) -> Result<(CondLstmModel, TrainingLog)> {
    config.validate()?;
    if targets.train.len() != split.train.len()
        || targets.validation.len() != split.validation.len()
    {
        return Err(Error::Alignment(format!(
            "targets ({} train / {} val hours) do not match split ({} / {})",
            targets.train.len(),
            targets.validation.len(),
            split.train.len(),
            split.validation.len()
        )));
    }
    if split.train.len() < config.lookback {
        return Err(Error::InsufficientData(format!(
            "training part has {} hours, lookback needs {}",
            split.train.len(),
            config.lookback
        )));
    }

    let cols = variant.lstm_feature_columns();
    let d = variant.input_dim();
    let method = variant.scaler_method();

    let train_raw = feature_matrix(&split.train)?;
    let input_scaler = fit_scaler(&select_columns(&train_raw, &cols), method)?;
    let target_scaler = fit_scaler(
        &Matrix {
            rows: targets.train.len(),
            cols: 1,
            data: targets.train.clone(),
        },
        method,
    )?;

    let train_part = PartData::prepare(
        &split.train,
        &targets.train,
        &input_scaler,
        &target_scaler,
        &cols,
    )?;
    let val_part = if split.validation.len() >= config.lookback {
        Some(PartData::prepare(
            &split.validation,
            &targets.validation,
            &input_scaler,
            &target_scaler,
            &cols,
        )?)
    } else {
        None
    };

    // The Cond-LSTM trains on gate-open samples only: gated-off samples carry
    // zero gradient, so skipping them changes nothing but the epoch cost.
    let mut train_rows: Vec<usize> = (config.lookback - 1..split.train.len())
        .filter(|&t| variant == Variant::Lstm || train_part.gates[t] == 1.0)
        .collect();
    if train_rows.is_empty() {
        return Err(Error::InsufficientData(
            "no gate-open training samples".into(),
        ));
    }
    let val_rows: Vec<usize> = match &val_part {
        Some(_) => (config.lookback - 1..split.validation.len()).collect(),
        None => Vec::new(),
    };

    let mut weights = LstmWeights::glorot(HIDDEN_SIZE, d, config.seed);
    let mut adam = AdamState::new(HIDDEN_SIZE, d);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x5eed));

    let mut log = TrainingLog::default();
    let mut best_loss = f64::INFINITY;
    let mut best_weights = weights.clone();
    let mut best_epoch = 0usize;
    let mut since_improvement = 0usize;
    let mut plateau_counter = 0usize;
    let mut plateau_mult = 1.0_f64;

    for epoch in 1..=config.max_epochs {
        let base = if epoch <= LR_WARMUP_EPOCHS {
            config.initial_lr
        } else {
            config.initial_lr * LR_DECAY.powi((epoch - LR_WARMUP_EPOCHS) as i32)
        };
        // the floor never raises the rate above what was configured
        let lr = (base * plateau_mult).max(LR_FLOOR.min(config.initial_lr));

        train_rows.shuffle(&mut shuffle_rng);
        let mut sq_sum = 0.0;
        for batch_rows in train_rows.chunks(config.batch_size) {
            let samples: Vec<PreparedSample<'_>> = batch_rows
                .iter()
                .map(|&t| train_part.sample(t, config.lookback, d, variant))
                .collect();
            let (grads, batch_mse) = batch_gradients(&weights, config.lookback, &samples);
            sq_sum += batch_mse * samples.len() as f64;
            adam_step(&mut weights, &grads, &mut adam, lr);
        }
        let train_mse = sq_sum / train_rows.len() as f64;

        let val_mse = match &val_part {
            Some(part) => {
                let losses = crate::par::map(&val_rows, |&t| {
                    sample_loss(
                        &weights,
                        config.lookback,
                        &part.sample(t, config.lookback, d, variant),
                    )
                });
                losses.iter().sum::<f64>() / losses.len() as f64
            }
            None => train_mse,
        };

        log.epochs.push(EpochRecord {
            epoch,
            train_mse,
            val_mse,
            lr,
        });

        if val_mse < best_loss {
            best_loss = val_mse;
            best_weights = weights.clone();
            best_epoch = epoch;
            since_improvement = 0;
            plateau_counter = 0;
        } else {
            since_improvement += 1;
            plateau_counter += 1;
            if plateau_counter >= config.plateau_patience {
                plateau_mult *= config.plateau_factor;
                plateau_counter = 0;
            }
        }
        if since_improvement >= config.patience {
            break;
        }
    }

    debug_assert!(best_epoch >= 1 && best_loss.is_finite());
    let model = CondLstmModel {
        weights: best_weights,
        variant,
        gate_feature_index: DHI_FEATURE_INDEX,
        gate_threshold: 0.0,
        input_scaler,
        target_scaler,
        lookback: config.lookback,
    };
    Ok((model, log))
}
