//! Study configuration: one JSON document, every field defaulted, with
//! dotted-path overrides from the command line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sunsite_core::forecast::TrainConfig;
use sunsite_core::weather::Location;
use sunsite_core::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct LocationConfig {
    pub latitude: f64,
    pub longitude: f64,
    pub timezone_offset: f64,
    pub region_label: String,
}

impl Default for LocationConfig {
    fn default() -> Self {
        // Iowa study site
        LocationConfig {
            latitude: 41.6,
            longitude: -93.6,
            timezone_offset: -6.0,
            region_label: "IA".into(),
        }
    }
}

impl LocationConfig {
    pub fn to_location(&self) -> Result<Location> {
        Location::new(
            self.latitude,
            self.longitude,
            self.timezone_offset,
            self.region_label.clone(),
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DataConfig {
    /// PSM3-style CSV to ingest; when absent, weather is synthesized.
    pub psm3_path: Option<PathBuf>,
    /// Years of synthetic weather to generate.
    pub synth_years: usize,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            psm3_path: None,
            synth_years: 6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PanelConfig {
    /// Array DC rating at STC, W.
    pub rated_power_stc: f64,
    /// Tilt in degrees; `null` means latitude tilt.
    pub tilt: Option<f64>,
    /// Azimuth in degrees; `null` means equator-facing.
    pub azimuth: Option<f64>,
    pub gamma: f64,
    pub noct: f64,
    /// Rating of one sizing module, W.
    pub module_rating_w: f64,
}

impl Default for PanelConfig {
    fn default() -> Self {
        PanelConfig {
            rated_power_stc: 48_940.0,
            tilt: None,
            azimuth: None,
            gamma: -0.0037,
            noct: 45.0,
            module_rating_w: 430.0,
        }
    }
}

impl PanelConfig {
    pub fn to_panel(&self, latitude: f64) -> sunsite_core::pv::PanelSpec {
        let mut panel = sunsite_core::pv::PanelSpec::default_for(self.rated_power_stc, latitude);
        if let Some(tilt) = self.tilt {
            panel.tilt = tilt;
        }
        if let Some(azimuth) = self.azimuth {
            panel.azimuth = azimuth;
        }
        panel.gamma = self.gamma;
        panel.noct = self.noct;
        panel
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    pub train_years: usize,
    pub val_years: usize,
    pub test_years: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train_years: 4,
            val_years: 1,
            test_years: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SizingConfig {
    pub battery_capacity_wh: f64,
    pub dod_floor: f64,
    pub pv_unit_cost: f64,
    pub battery_unit_cost: f64,
    pub max_outage_hours: usize,
    pub epsilon_wh: f64,
    /// Sizing horizon in hours.
    pub horizon_hours: usize,
    /// Offset of the horizon from the start of the test split, hours.
    pub horizon_offset_hours: usize,
    /// Solve with the MILP as well and cross-check the enumeration cost.
    pub cross_check_milp: bool,
}

impl Default for SizingConfig {
    fn default() -> Self {
        SizingConfig {
            battery_capacity_wh: 3000.0,
            dod_floor: 0.2,
            pv_unit_cost: 244.22,
            battery_unit_cost: 2093.37,
            max_outage_hours: 0,
            epsilon_wh: 1.0,
            horizon_hours: 671,
            // June of the test year
            horizon_offset_hours: 151 * 24,
            cross_check_milp: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyConfig {
    pub location: LocationConfig,
    /// Additional regions for the cross-region generalization study.
    pub eval_locations: Vec<LocationConfig>,
    pub data: DataConfig,
    pub panel: PanelConfig,
    /// Base-station power model, with the published constants as defaults.
    pub power: sunsite_core::traffic::PowerParams,
    pub split: SplitConfig,
    pub train: TrainConfig,
    /// Keys here patch `train` for the plain LSTM variant only.
    pub train_lstm: Option<serde_json::Value>,
    /// Keys here patch `train` for the Cond-LSTM variant only.
    pub train_cond: Option<serde_json::Value>,
    pub sizing: SizingConfig,
    /// Fold plan for the time-series cross-validation: (train_years, test_years).
    pub cv_folds: Vec<(usize, usize)>,
    pub variant: String,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            location: LocationConfig::default(),
            eval_locations: vec![
                LocationConfig {
                    latitude: 44.08,
                    longitude: -103.23,
                    timezone_offset: -7.0,
                    region_label: "SD".into(),
                },
                LocationConfig {
                    latitude: 36.78,
                    longitude: -119.42,
                    timezone_offset: -8.0,
                    region_label: "CA".into(),
                },
                LocationConfig {
                    latitude: 37.43,
                    longitude: -78.66,
                    timezone_offset: -5.0,
                    region_label: "VA".into(),
                },
            ],
            data: DataConfig::default(),
            panel: PanelConfig::default(),
            power: sunsite_core::traffic::PowerParams::default(),
            split: SplitConfig::default(),
            train: TrainConfig::default(),
            train_lstm: None,
            // Robust-scaled targets span several times the min-max range, so
            // the Cond-LSTM defaults to a larger step size and smaller
            // batches to converge in comparable wall time.
            train_cond: Some(serde_json::json!({
                "initial_lr": 3e-3,
                "batch_size": 128,
            })),
            sizing: SizingConfig::default(),
            cv_folds: vec![(4, 4), (8, 4), (12, 4), (16, 4)],
            variant: "cond".into(),
            seed: 7,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl StudyConfig {
    /// Effective training config for a variant: `train` with the variant's
    /// patch section (if any) merged over it.
    pub fn train_for(&self, variant: sunsite_core::forecast::Variant) -> Result<TrainConfig> {
        use sunsite_core::forecast::Variant;
        let patch = match variant {
            Variant::Lstm => self.train_lstm.as_ref(),
            Variant::Cond => self.train_cond.as_ref(),
        };
        let mut value = serde_json::to_value(&self.train)?;
        if let Some(serde_json::Value::Object(patch)) = patch {
            let base = value.as_object_mut().expect("train serializes to object");
            for (key, v) in patch {
                base.insert(key.clone(), v.clone());
            }
        }
        Ok(serde_json::from_value(value)?)
    }

    /// Loads the config file if given, then applies dotted-path overrides.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut value = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    Error::Io(std::io::Error::new(
                        e.kind(),
                        format!("{}: {e}", p.display()),
                    ))
                })?;
                serde_json::from_str::<serde_json::Value>(&text)?
            }
            None => serde_json::Value::Object(Default::default()),
        };
        for (key, raw) in overrides {
            apply_override(&mut value, key, raw)?;
        }
        let config: StudyConfig = serde_json::from_value(value)?;
        Ok(config)
    }
}

/// Sets `value[a][b][c] = parsed(raw)` for a dotted key `a.b.c`. Values parse
/// as JSON when possible and fall back to strings.
fn apply_override(value: &mut serde_json::Value, key: &str, raw: &str) -> Result<()> {
    let parsed = serde_json::from_str::<serde_json::Value>(raw)
        .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
    let mut cursor = value;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = cursor.as_object_mut().ok_or_else(|| {
            Error::Domain(format!("override key `{key}` crosses a non-object value"))
        })?;
        if i == parts.len() - 1 {
            obj.insert(part.to_string(), parsed);
            return Ok(());
        }
        cursor = obj
            .entry(part.to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    Ok(())
}
