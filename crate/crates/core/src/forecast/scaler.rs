//! Min-max and robust feature scaling.

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalerMethod {
    MinMax,
    Robust,
}

/// Per-feature affine transform `x' = (x - offset) / scale`.
///
/// Degenerate features (zero range or zero IQR) pass through unscaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScale {
    pub offset: f64,
    pub scale: f64,
    pub passthrough: bool,
}

impl FeatureScale {
    #[inline]
    pub fn transform(&self, x: f64) -> f64 {
        if self.passthrough {
            x
        } else {
            (x - self.offset) / self.scale
        }
    }

    #[inline]
    pub fn inverse(&self, y: f64) -> f64 {
        if self.passthrough {
            y
        } else {
            y * self.scale + self.offset
        }
    }
}

/// Fitted scaler statistics for a fixed column set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub method: ScalerMethod,
    pub stats: Vec<FeatureScale>,
}

/// Linear-interpolated quantile of a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.len() == 1 {
        return sorted[0];
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Fits per-column statistics: min-max maps the column minimum to 0 and the
/// maximum to 1; robust maps `x -> (x - median) / IQR`.
pub fn fit_scaler(data: &Matrix, method: ScalerMethod) -> Result<ScalerParams> {
    if data.is_empty() {
        return Err(Error::EmptyInput("fit_scaler on empty matrix"));
    }
    let mut stats = Vec::with_capacity(data.cols);
    for j in 0..data.cols {
        let mut col = data.column(j);
        col.sort_by(|a, b| a.partial_cmp(b).expect("finite feature values"));
        let (offset, scale) = match method {
            ScalerMethod::MinMax => {
                let min = col[0];
                let max = col[col.len() - 1];
                (min, max - min)
            }
            ScalerMethod::Robust => {
                let median = quantile(&col, 0.5);
                let iqr = quantile(&col, 0.75) - quantile(&col, 0.25);
                (median, iqr)
            }
        };
        stats.push(FeatureScale {
            offset,
            scale,
            passthrough: scale == 0.0,
        });
    }
    Ok(ScalerParams { method, stats })
}

impl ScalerParams {
    /// Identity scaler for `cols` columns (used by tiny test models).
    pub fn identity(cols: usize) -> Self {
        ScalerParams {
            method: ScalerMethod::MinMax,
            stats: vec![
                FeatureScale {
                    offset: 0.0,
                    scale: 1.0,
                    passthrough: true,
                };
                cols
            ],
        }
    }

    pub fn cols(&self) -> usize {
        self.stats.len()
    }

    pub fn transform_matrix(&self, data: &Matrix) -> Result<Matrix> {
        if data.cols != self.stats.len() {
            return Err(Error::Shape(format!(
                "scaler fitted on {} columns, data has {}",
                self.stats.len(),
                data.cols
            )));
        }
        let mut out = data.clone();
        for i in 0..out.rows {
            let row = out.row_mut(i);
            for (j, s) in self.stats.iter().enumerate() {
                row[j] = s.transform(row[j]);
            }
        }
        Ok(out)
    }

    /// Scalar transform for single-column scalers (targets).
    pub fn transform_value(&self, x: f64) -> f64 {
        self.stats[0].transform(x)
    }

    pub fn inverse_value(&self, y: f64) -> f64 {
        self.stats[0].inverse(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(values: &[f64]) -> Matrix {
        Matrix::from_rows(values.iter().map(|&v| vec![v]).collect())
    }

    #[test]
    fn min_max_maps_extremes_to_unit_interval() {
        let data = column(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let s = fit_scaler(&data, ScalerMethod::MinMax).unwrap();
        assert_eq!(s.transform_value(1.0), 0.0);
        assert_eq!(s.transform_value(5.0), 1.0);
        assert_eq!(s.transform_value(3.0), 0.5);
    }

    #[test]
    fn robust_centers_median_and_unit_iqr() {
        let data = column(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let s = fit_scaler(&data, ScalerMethod::Robust).unwrap();
        // median 3, IQR = 4 - 2 = 2
        assert_eq!(s.transform_value(3.0), 0.0);
        assert_eq!(s.transform_value(5.0), 1.0);
        assert_eq!(s.transform_value(1.0), -1.0);
    }

    #[test]
    fn inverse_round_trips() {
        use rand::Rng as _;
        use rand_chacha::rand_core::SeedableRng as _;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let values: Vec<f64> = (0..200).map(|_| rng.random::<f64>() * 1e4 - 5e3).collect();
        let data = column(&values);
        for method in [ScalerMethod::MinMax, ScalerMethod::Robust] {
            let s = fit_scaler(&data, method).unwrap();
            for &v in &values {
                let rt = s.inverse_value(s.transform_value(v));
                assert!((rt - v).abs() < 1e-12 * v.abs().max(1.0));
            }
        }
    }

    #[test]
    fn degenerate_features_pass_through() {
        let data = column(&[7.0; 10]);
        for method in [ScalerMethod::MinMax, ScalerMethod::Robust] {
            let s = fit_scaler(&data, method).unwrap();
            assert!(s.stats[0].passthrough);
            assert_eq!(s.transform_value(7.0), 7.0);
            assert_eq!(s.transform_value(9.0), 9.0);
        }
    }

    #[test]
    fn empty_input_errors() {
        let data = Matrix::zeros(0, 3);
        assert!(matches!(
            fit_scaler(&data, ScalerMethod::MinMax),
            Err(Error::EmptyInput(_))
        ));
    }
}
