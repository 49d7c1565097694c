//! Error metrics for hourly/daily harvest comparisons, plus the cost
//! difference used to compare sizing outcomes.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Prediction error summary.
///
/// Hourly metrics are computed over hours; daily metrics over per-day sums.
/// Sign convention for ME/MPE is `predicted - actual`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// Hourly RMSE normalized by the actual range, %.
    pub nrmse_hourly: f64,
    /// Hourly RMSE, W.
    pub rmse_hourly: f64,
    /// Daily RMSE, W.
    pub rmse_daily: f64,
    /// Daily MAE, W.
    pub mae_daily: f64,
    /// Daily mean error, W.
    pub me_daily: f64,
    /// Daily mean percentage error, %; days with zero actual are excluded.
    pub mpe_daily: f64,
}

/// Computes the error report for aligned hourly sequences.
///
/// `nRMSE = RMSE / (max(actual) - min(actual)) * 100`. Lengths must match and
/// be divisible by 24 so the daily aggregation is over whole days.
pub fn error_report(actual: &[f64], predicted: &[f64]) -> Result<ErrorReport> {
    if actual.len() != predicted.len() {
        return Err(Error::Alignment(format!(
            "actual has {} hours, predicted {}",
            actual.len(),
            predicted.len()
        )));
    }
    if actual.is_empty() {
        return Err(Error::EmptyInput("error_report on empty sequences"));
    }
    if actual.len() % 24 != 0 {
        return Err(Error::Alignment(format!(
            "length {} is not a whole number of days",
            actual.len()
        )));
    }

    let n = actual.len() as f64;
    let mse_hourly: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (p - a) * (p - a))
        .sum::<f64>()
        / n;
    let rmse_hourly = mse_hourly.sqrt();

    let max = actual.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = actual.iter().cloned().fold(f64::INFINITY, f64::min);
    let range = max - min;
    if range <= 0.0 {
        return Err(Error::Domain(
            "nRMSE undefined: actual range is zero".into(),
        ));
    }
    let nrmse_hourly = rmse_hourly / range * 100.0;

    let daily =
        |xs: &[f64]| -> Vec<f64> { xs.chunks(24).map(|day| day.iter().sum::<f64>()).collect() };
    let actual_daily = daily(actual);
    let predicted_daily = daily(predicted);
    let days = actual_daily.len() as f64;

    let rmse_daily = (actual_daily
        .iter()
        .zip(&predicted_daily)
        .map(|(a, p)| (p - a) * (p - a))
        .sum::<f64>()
        / days)
        .sqrt();
    let mae_daily = actual_daily
        .iter()
        .zip(&predicted_daily)
        .map(|(a, p)| (p - a).abs())
        .sum::<f64>()
        / days;
    let me_daily = actual_daily
        .iter()
        .zip(&predicted_daily)
        .map(|(a, p)| p - a)
        .sum::<f64>()
        / days;

    let mpe_terms: Vec<f64> = actual_daily
        .iter()
        .zip(&predicted_daily)
        .filter(|(a, _)| **a != 0.0)
        .map(|(a, p)| (p - a) / a * 100.0)
        .collect();
    let mpe_daily = if mpe_terms.is_empty() {
        0.0
    } else {
        mpe_terms.iter().sum::<f64>() / mpe_terms.len() as f64
    };

    Ok(ErrorReport {
        nrmse_hourly,
        rmse_hourly,
        rmse_daily,
        mae_daily,
        me_daily,
        mpe_daily,
    })
}

/// Absolute relative cost difference, percent: `|candidate - truth| / truth * 100`.
pub fn cost_difference(candidate_cost: f64, truth_cost: f64) -> Result<f64> {
    if truth_cost <= 0.0 {
        return Err(Error::Domain(format!(
            "truth cost {truth_cost} must be positive"
        )));
    }
    Ok((candidate_cost - truth_cost).abs() / truth_cost * 100.0)
}

/// Aligned-column text table for a set of labelled reports.
pub fn render_report_table(rows: &[(String, ErrorReport)]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<12} {:>10} {:>12} {:>14} {:>14} {:>14} {:>10}\n",
        "method", "nRMSE(H)%", "RMSE(H) W", "RMSE(D) W", "MAE(D) W", "ME(D) W", "MPE(D)%"
    ));
    for (label, r) in rows {
        out.push_str(&format!(
            "{:<12} {:>10.3} {:>12.3} {:>14.3} {:>14.3} {:>14.3} {:>10.3}\n",
            label,
            r.nrmse_hourly,
            r.rmse_hourly,
            r.rmse_daily,
            r.mae_daily,
            r.me_daily,
            r.mpe_daily
        ));
    }
    out
}
