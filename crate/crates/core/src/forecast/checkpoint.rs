//! Versioned JSON checkpoints.
//!
//! Weight arrays are row-major and serialized as decimal floats with full
//! round-trip precision, so save -> load -> predict is bit-identical.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::lstm::LstmWeights;
use super::train::TrainConfig;
use super::{CondLstmModel, ScalerParams, Variant};
use crate::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

/// On-disk checkpoint document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub variant: Variant,
    pub hidden: usize,
    pub input_dim: usize,
    pub lookback: usize,
    pub gate_feature_index: usize,
    pub gate_threshold: f64,
    pub input_weights: Vec<f64>,
    pub recurrent_weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub dense_weights: Vec<f64>,
    pub dense_bias: f64,
    pub input_scaler: ScalerParams,
    pub target_scaler: ScalerParams,
    pub config: TrainConfig,
    pub epoch: usize,
    pub best_val_loss: f64,
}

impl Checkpoint {
    pub fn from_model(
        model: &CondLstmModel,
        config: &TrainConfig,
        epoch: usize,
        best_val_loss: f64,
    ) -> Self {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            variant: model.variant,
            hidden: model.weights.hidden,
            input_dim: model.weights.input_dim,
            lookback: model.lookback,
            gate_feature_index: model.gate_feature_index,
            gate_threshold: model.gate_threshold,
            input_weights: model.weights.w_ih.clone(),
            recurrent_weights: model.weights.w_hh.clone(),
            bias: model.weights.bias.clone(),
            dense_weights: model.weights.dense_w.clone(),
            dense_bias: model.weights.dense_b,
            input_scaler: model.input_scaler.clone(),
            target_scaler: model.target_scaler.clone(),
            config: config.clone(),
            epoch,
            best_val_loss,
        }
    }

    pub fn into_model(self) -> Result<CondLstmModel> {
        let expect = |name: &str, got: usize, want: usize| -> Result<()> {
            if got != want {
                return Err(Error::schema(
                    name,
                    format!("has {got} values, expected {want}"),
                ));
            }
            Ok(())
        };
        expect(
            "input_weights",
            self.input_weights.len(),
            4 * self.hidden * self.input_dim,
        )?;
        expect(
            "recurrent_weights",
            self.recurrent_weights.len(),
            4 * self.hidden * self.hidden,
        )?;
        expect("bias", self.bias.len(), 4 * self.hidden)?;
        expect("dense_weights", self.dense_weights.len(), self.hidden)?;
        if self.input_scaler.cols() != self.input_dim {
            return Err(Error::schema(
                "input_scaler",
                format!(
                    "has {} columns, expected {}",
                    self.input_scaler.cols(),
                    self.input_dim
                ),
            ));
        }
        Ok(CondLstmModel {
            weights: LstmWeights {
                hidden: self.hidden,
                input_dim: self.input_dim,
                w_ih: self.input_weights,
                w_hh: self.recurrent_weights,
                bias: self.bias,
                dense_w: self.dense_weights,
                dense_b: self.dense_bias,
            },
            variant: self.variant,
            gate_feature_index: self.gate_feature_index,
            gate_threshold: self.gate_threshold,
            input_scaler: self.input_scaler,
            target_scaler: self.target_scaler,
            lookback: self.lookback,
        })
    }
}

/// Serializes a checkpoint document for the model.
pub fn save_checkpoint(
    model: &CondLstmModel,
    config: &TrainConfig,
    epoch: usize,
    best_val_loss: f64,
    path: impl AsRef<Path>,
) -> Result<()> {
    let doc = Checkpoint::from_model(model, config, epoch, best_val_loss);
    let json = serde_json::to_string_pretty(&doc)?;
    std::fs::write(path, json)?;
    Ok(())
}

/// Loads a checkpoint; schema problems name the offending field.
pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(CondLstmModel, Checkpoint)> {
    let path = path.as_ref();
    let json = std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    let doc: Checkpoint = serde_json::from_str(&json).map_err(|e| {
        let message = e.to_string();
        let field = message
            .split_once("missing field `")
            .and_then(|(_, rest)| rest.split_once('`'))
            .map(|(name, _)| name.to_string())
            .unwrap_or_else(|| "checkpoint".to_string());
        Error::Schema { field, message }
    })?;
    if doc.version != CHECKPOINT_VERSION {
        return Err(Error::schema(
            "version",
            format!("unsupported checkpoint version {}", doc.version),
        ));
    }
    let model = doc.clone().into_model()?;
    Ok((model, doc))
}
