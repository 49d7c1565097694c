//! From-scratch LSTM and DHI-gated Cond-LSTM harvest regressors.
//!
//! Both variants are a single LSTM layer (hidden size 32) with a linear
//! dense head over the final hidden state of a 24-hour window. The Cond-LSTM
//! routes the raw DHI feature around the network: a binary gate forces the
//! prediction to exactly zero for non-sunlight hours (DHI at the prediction
//! hour at or below the threshold) and excludes DHI from the LSTM inputs
//! (11 LSTM features instead of 12).

mod adam;
mod checkpoint;
mod grad;
mod lstm;
mod scaler;
mod train;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use grad::{batch_gradients, sample_loss, Gradients, PreparedSample};
pub use lstm::{lstm_step, LstmWeights};
pub use scaler::{fit_scaler, FeatureScale, ScalerMethod, ScalerParams};
pub use train::{train, EpochRecord, SplitTargets, TrainConfig, TrainingLog};

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::weather::{feature_matrix, WeatherSeries, DHI_FEATURE_INDEX, FEATURE_COUNT};
use crate::{par, Error, Result};

/// Hidden size shared by both variants; together with the feature counts it
/// pins the trainable parameter totals (5793 and 5665).
pub const HIDDEN_SIZE: usize = 32;

/// Which architecture to train.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Plain LSTM: gate fixed open, DHI included in the LSTM input (D = 12).
    Lstm,
    /// Cond-LSTM: binary DHI gate, DHI excluded from the LSTM input (D = 11).
    Cond,
}

impl Variant {
    /// Feature columns fed to the LSTM, in feature-matrix order.
    pub fn lstm_feature_columns(self) -> Vec<usize> {
        match self {
            Variant::Lstm => (0..FEATURE_COUNT).collect(),
            Variant::Cond => (0..FEATURE_COUNT)
                .filter(|&j| j != DHI_FEATURE_INDEX)
                .collect(),
        }
    }

    pub fn input_dim(self) -> usize {
        match self {
            Variant::Lstm => FEATURE_COUNT,
            Variant::Cond => FEATURE_COUNT - 1,
        }
    }

    /// Scaler family used for both inputs and targets.
    pub fn scaler_method(self) -> ScalerMethod {
        match self {
            Variant::Lstm => ScalerMethod::MinMax,
            Variant::Cond => ScalerMethod::Robust,
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Lstm => "lstm",
            Variant::Cond => "cond",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lstm" => Ok(Variant::Lstm),
            "cond" => Ok(Variant::Cond),
            other => Err(Error::Domain(format!("unknown variant {other:?}"))),
        }
    }
}

/// Trained forecaster: weights, gate configuration and both scalers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondLstmModel {
    pub weights: LstmWeights,
    pub variant: Variant,
    /// Feature-matrix column feeding the gate (raw, unscaled DHI).
    pub gate_feature_index: usize,
    /// Gate opens strictly above this raw DHI, W/m².
    pub gate_threshold: f64,
    /// Scaler over the LSTM input columns, fitted on training data only.
    pub input_scaler: ScalerParams,
    /// Single-column scaler over the target, fitted on training data only.
    pub target_scaler: ScalerParams,
    pub lookback: usize,
}

impl CondLstmModel {
    /// Untrained model with Glorot-initialized weights.
    pub fn init(variant: Variant, lookback: usize, seed: u64) -> Self {
        let d = variant.input_dim();
        CondLstmModel {
            weights: LstmWeights::glorot(HIDDEN_SIZE, d, seed),
            variant,
            gate_feature_index: DHI_FEATURE_INDEX,
            gate_threshold: 0.0,
            input_scaler: ScalerParams::identity(d),
            target_scaler: ScalerParams::identity(1),
            lookback,
        }
    }

    pub fn param_count(&self) -> usize {
        self.weights.param_count()
    }

    /// Binary gate on a raw DHI value; the plain LSTM variant is always open.
    pub fn gate(&self, raw_dhi: f64) -> f64 {
        match self.variant {
            Variant::Lstm => 1.0,
            Variant::Cond => {
                if raw_dhi > self.gate_threshold {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Scaled-domain prediction for one raw `lookback x 12` window: the gated
    /// dense output over the final hidden state.
    pub fn forward(&self, window: &Matrix) -> Result<f64> {
        if window.rows != self.lookback || window.cols != FEATURE_COUNT {
            return Err(Error::Shape(format!(
                "window is {}x{}, model expects {}x{FEATURE_COUNT}",
                window.rows, window.cols, self.lookback
            )));
        }
        let cols = self.variant.lstm_feature_columns();
        let selected = select_columns(window, &cols);
        let scaled = self.input_scaler.transform_matrix(&selected)?;
        let h = lstm::run_window(&self.weights, &scaled.data, self.lookback);
        let raw_dhi = window.get(window.rows - 1, self.gate_feature_index);
        Ok(self.gate(raw_dhi) * lstm::dense(&self.weights, &h))
    }

    /// Sliding-window hourly predictions in Wh, one per hour from index
    /// `lookback - 1` onward. Inverse target scaling is applied, negative
    /// values are clamped to zero, and the gate multiplies the post-inverse
    /// value so gated-off hours are exactly zero.
    pub fn predict_series(&self, series: &WeatherSeries) -> Result<Vec<f64>> {
        if series.len() < self.lookback {
            return Err(Error::InsufficientData(format!(
                "series has {} hours, lookback needs {}",
                series.len(),
                self.lookback
            )));
        }
        let features = feature_matrix(series)?;
        let cols = self.variant.lstm_feature_columns();
        let selected = select_columns(&features, &cols);
        let scaled = self.input_scaler.transform_matrix(&selected)?;
        let d = self.variant.input_dim();
        let count = series.len() - self.lookback + 1;
        Ok(par::map_indices(count, |k| {
            let end = k + self.lookback;
            let window = &scaled.data[k * d..end * d];
            let h = lstm::run_window(&self.weights, window, self.lookback);
            let raw = self
                .target_scaler
                .inverse_value(lstm::dense(&self.weights, &h));
            self.gate(features.get(end - 1, self.gate_feature_index)) * raw.max(0.0)
        }))
    }
}

/// Mean-squared-error gradients for a batch of raw `(window, target)` pairs.
///
/// Windows are raw `lookback x 12` blocks and targets raw Wh; both are run
/// through the model's scalers before the loss is formed. Gated-off samples
/// contribute zero gradient through the LSTM path.
pub fn backward(model: &CondLstmModel, batch: &[(Matrix, f64)]) -> Result<(Gradients, f64)> {
    if batch.is_empty() {
        return Err(Error::EmptyInput("backward on empty batch"));
    }
    let cols = model.variant.lstm_feature_columns();
    let d = model.variant.input_dim();
    let mut windows = Vec::with_capacity(batch.len() * model.lookback * d);
    let mut meta = Vec::with_capacity(batch.len());
    for (window, target) in batch {
        if window.rows != model.lookback || window.cols != FEATURE_COUNT {
            return Err(Error::Shape(format!(
                "window is {}x{}, model expects {}x{FEATURE_COUNT}",
                window.rows, window.cols, model.lookback
            )));
        }
        let selected = select_columns(window, &cols);
        let scaled = model.input_scaler.transform_matrix(&selected)?;
        windows.extend_from_slice(&scaled.data);
        let raw_dhi = window.get(window.rows - 1, model.gate_feature_index);
        meta.push((
            model.target_scaler.transform_value(*target),
            model.gate(raw_dhi),
        ));
    }
    let samples: Vec<PreparedSample<'_>> = meta
        .iter()
        .enumerate()
        .map(|(k, &(target, gate))| PreparedSample {
            window: &windows[k * model.lookback * d..(k + 1) * model.lookback * d],
            target,
            gate,
        })
        .collect();
    Ok(batch_gradients(&model.weights, model.lookback, &samples))
}

pub(crate) fn select_columns(m: &Matrix, cols: &[usize]) -> Matrix {
    let mut data = Vec::with_capacity(m.rows * cols.len());
    for i in 0..m.rows {
        let row = m.row(i);
        for &j in cols {
            data.push(row[j]);
        }
    }
    Matrix {
        rows: m.rows,
        cols: cols.len(),
        data,
    }
}
