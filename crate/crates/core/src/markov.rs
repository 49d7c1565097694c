//! Three-state first-order Markov baseline for hourly harvest.
//!
//! Days are classified into cloudy/moderate/sunny states by per-month
//! daily-energy terciles; transitions are counted between consecutive days
//! within a month (Laplace-smoothed), and each (month, state) carries a mean
//! 24-hour profile. Prediction chains the state distribution and emits the
//! distribution-weighted profile, i.e. an expected-value point forecast.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Number of day states.
pub const STATES: usize = 3;

const MONTH_DAYS: [usize; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];
const MONTH_NAMES: [&str; 12] = [
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
];

/// Fitted Markov day-state model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovModel {
    /// Row-stochastic transition matrix per month: `transition[month-1][from][to]`.
    pub transition: Vec<[[f64; STATES]; STATES]>,
    /// Mean hourly day profile per month and state, Wh.
    pub profiles: Vec<[[f64; 24]; STATES]>,
    /// Non-decreasing daily-energy tercile thresholds per month.
    pub thresholds: Vec<[f64; 2]>,
}

impl MarkovModel {
    /// Classifies a day by its total energy against a month's terciles.
    pub fn classify(&self, month: usize, daily_energy: f64) -> usize {
        let [t1, t2] = self.thresholds[month - 1];
        if daily_energy <= t1 {
            0
        } else if daily_energy <= t2 {
            1
        } else {
            2
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }
}

/// Month (1-12) of a day index under the leap-free 365-day calendar.
pub fn month_of_day(day_index: usize) -> usize {
    let mut doy = day_index % 365;
    for (m, &len) in MONTH_DAYS.iter().enumerate() {
        if doy < len {
            return m + 1;
        }
        doy -= len;
    }
    unreachable!()
}

/// Linear-interpolated quantile of sorted values.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.len() == 1 {
        return sorted[0];
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Fits per-month transition matrices, state profiles and thresholds.
///
/// `harvest` must cover whole days starting at Jan 1; when `years > 0` its
/// length must be exactly `years * 8760`. Transitions are only counted
/// between consecutive days that fall in the same month.
pub fn fit_markov(harvest: &[f64], years: usize) -> Result<MarkovModel> {
    if harvest.len() % 24 != 0 {
        return Err(Error::Alignment(format!(
            "harvest length {} is not a whole number of days",
            harvest.len()
        )));
    }
    if years > 0 && harvest.len() != years * 8760 {
        return Err(Error::Alignment(format!(
            "harvest length {} does not match {} years ({} rows)",
            harvest.len(),
            years,
            years * 8760
        )));
    }

    let days: Vec<&[f64]> = harvest.chunks(24).collect();
    let daily_energy: Vec<f64> = days.iter().map(|d| d.iter().sum()).collect();
    let months: Vec<usize> = (0..days.len()).map(month_of_day).collect();

    // Per-month day lists.
    let mut month_days: Vec<Vec<usize>> = vec![Vec::new(); 12];
    for (d, &m) in months.iter().enumerate() {
        month_days[m - 1].push(d);
    }
    for (m, list) in month_days.iter().enumerate() {
        if list.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "{} has {} day(s); at least 2 are required",
                MONTH_NAMES[m],
                list.len()
            )));
        }
    }

    // Tercile thresholds per month.
    let mut thresholds = Vec::with_capacity(12);
    for list in &month_days {
        let mut energies: Vec<f64> = list.iter().map(|&d| daily_energy[d]).collect();
        energies.sort_by(|a, b| a.partial_cmp(b).unwrap());
        thresholds.push([
            quantile(&energies, 1.0 / 3.0),
            quantile(&energies, 2.0 / 3.0),
        ]);
    }

    let classify = |month: usize, e: f64| -> usize {
        let [t1, t2] = thresholds[month - 1];
        if e <= t1 {
            0
        } else if e <= t2 {
            1
        } else {
            2
        }
    };
    let states: Vec<usize> = (0..days.len())
        .map(|d| classify(months[d], daily_energy[d]))
        .collect();

    // Laplace-smoothed transition counts within each month.
    let mut transition = vec![[[1.0_f64; STATES]; STATES]; 12];
    for d in 0..days.len().saturating_sub(1) {
        if months[d] == months[d + 1] {
            transition[months[d] - 1][states[d]][states[d + 1]] += 1.0;
        }
    }
    for matrix in &mut transition {
        for row in matrix.iter_mut() {
            let sum: f64 = row.iter().sum();
            for p in row.iter_mut() {
                *p /= sum;
            }
        }
    }

    // Mean hourly profile per (month, state); empty states fall back to the
    // month mean so predictions stay well-defined.
    let mut profiles = vec![[[0.0_f64; 24]; STATES]; 12];
    for (m, list) in month_days.iter().enumerate() {
        let mut month_mean = [0.0_f64; 24];
        for &d in list {
            for (h, v) in days[d].iter().enumerate() {
                month_mean[h] += v;
            }
        }
        for v in month_mean.iter_mut() {
            *v /= list.len() as f64;
        }
        for s in 0..STATES {
            let members: Vec<usize> = list.iter().copied().filter(|&d| states[d] == s).collect();
            if members.is_empty() {
                profiles[m][s] = month_mean;
            } else {
                let mut mean = [0.0_f64; 24];
                for &d in &members {
                    for (h, v) in days[d].iter().enumerate() {
                        mean[h] += v;
                    }
                }
                for v in mean.iter_mut() {
                    *v /= members.len() as f64;
                }
                profiles[m][s] = mean;
            }
        }
    }

    Ok(MarkovModel {
        transition,
        profiles,
        thresholds,
    })
}

/// Expected-value forecast for `horizon_days` days of the given month.
///
/// The state distribution starts from the transition row of
/// `prev_day_state` and is evolved by the month's matrix once per day; each
/// day's hourly prediction is the distribution-weighted mean profile.
pub fn predict_markov(
    model: &MarkovModel,
    prev_day_state: usize,
    month: usize,
    horizon_days: usize,
) -> Result<Vec<f64>> {
    if !(1..=12).contains(&month) {
        return Err(Error::Domain(format!("month {month} outside 1-12")));
    }
    if prev_day_state >= STATES {
        return Err(Error::Domain(format!(
            "state {prev_day_state} outside 0-{}",
            STATES - 1
        )));
    }
    let matrix = &model.transition[month - 1];
    let profiles = &model.profiles[month - 1];

    let mut dist = matrix[prev_day_state];
    let mut out = Vec::with_capacity(horizon_days * 24);
    for _ in 0..horizon_days {
        for h in 0..24 {
            let v: f64 = (0..STATES).map(|s| dist[s] * profiles[s][h]).sum();
            out.push(v);
        }
        let mut next = [0.0_f64; STATES];
        for (s, row) in matrix.iter().enumerate() {
            for (t, p) in row.iter().enumerate() {
                next[t] += dist[s] * p;
            }
        }
        dist = next;
    }
    Ok(out)
}

/// One-day-ahead predictions over a contiguous harvest slice.
///
/// `harvest` starts at day `start_day_of_year` (0-based within the 365-day
/// calendar) and must cover whole days; the first day serves as context
/// only. Each later day is predicted from the previous day's observed state
/// using the target day's month matrix.
pub fn predict_day_ahead_series(
    model: &MarkovModel,
    harvest: &[f64],
    start_day_of_year: usize,
) -> Result<Vec<f64>> {
    if harvest.len() % 24 != 0 || harvest.len() < 48 {
        return Err(Error::Alignment(format!(
            "day-ahead prediction needs whole days with context, got {} hours",
            harvest.len()
        )));
    }
    let days: Vec<&[f64]> = harvest.chunks(24).collect();
    let mut out = Vec::with_capacity(harvest.len() - 24);
    for d in 1..days.len() {
        let prev_month = month_of_day(start_day_of_year + d - 1);
        let prev_energy: f64 = days[d - 1].iter().sum();
        let prev_state = model.classify(prev_month, prev_energy);
        let target_month = month_of_day(start_day_of_year + d);
        out.extend(predict_markov(model, prev_state, target_month, 1)?);
    }
    Ok(out)
}
