//! Synthetic connection-count profiles and the load-dependent base-station
//! power model.
//!
//! The power formula follows the macro-site decomposition: per-sector
//! amplifier/baseband/transceiver draw divided by rectification, regulation
//! and cooling loss factors, all of which drift linearly with the connection
//! count. An optional anchor rescales the curve so that peak load draws a
//! prescribed peak power (11.5 kW by default); the raw formula remains
//! available with the anchor disabled.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{par, Error, Result};

/// Parameters of the base-station power model. Deserializes from a JSON
/// block with the published defaults pre-filled for every missing key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PowerParams {
    /// Ideal power amplifier draw, W.
    pub p_tx: f64,
    /// Ideal baseband unit draw, W.
    pub p_bb: f64,
    /// Ideal transceiver draw, W.
    pub p_rf: f64,
    /// Load-independent parts of the efficiency/loss factors:
    /// `c[0..3]` are amplifier/baseband/transceiver efficiencies,
    /// `c[3..6]` are rectification/regulation/cooling losses.
    pub c: [f64; 6],
    /// Per-connection drift of each factor.
    pub eps: [f64; 6],
    /// Hexagonal sub-sectors per site.
    pub n_sectors: u32,
    /// Devices served per antenna; antennas per sector = n / this.
    pub devices_per_antenna: u32,
    /// When set, output is rescaled so the draw at `peak_load` equals this
    /// many watts.
    pub peak_power_anchor: Option<f64>,
    /// Connection count at which the anchor applies.
    pub peak_load: u64,
}

impl Default for PowerParams {
    fn default() -> Self {
        PowerParams {
            p_tx: 500.0,
            p_bb: 100.0,
            p_rf: 100.0,
            c: [0.75, 0.8, 0.8, 0.65, 0.15, 0.47],
            eps: [1e-7; 6],
            n_sectors: 3,
            devices_per_antenna: 10_000,
            peak_power_anchor: Some(11_500.0),
            peak_load: 14_000,
        }
    }
}

impl PowerParams {
    /// The raw formula without the anchor applied.
    pub fn raw_power(&self, n: u64) -> Result<f64> {
        let load = n as f64;
        let eta_pa = self.c[0] - self.eps[0] * load;
        let eta_bb = self.c[1] - self.eps[1] * load;
        let eta_rf = self.c[2] - self.eps[2] * load;
        let loss_r = self.c[3] + self.eps[3] * load;
        let loss_dc = self.c[4] + self.eps[4] * load;
        let loss_cool = self.c[5] + self.eps[5] * load;
        if eta_pa <= 0.0 || eta_bb <= 0.0 || eta_rf <= 0.0 {
            return Err(Error::Domain(format!(
                "efficiency non-positive at load {n} (eta = {eta_pa}, {eta_bb}, {eta_rf})"
            )));
        }
        if loss_r >= 1.0 || loss_dc >= 1.0 || loss_cool >= 1.0 {
            return Err(Error::Domain(format!(
                "loss factor reaches 1 at load {n} (sigma = {loss_r}, {loss_dc}, {loss_cool})"
            )));
        }
        // Antennas per sector stay fractional; the formula's own peak value
        // (1.4 antennas at n = 14000) is non-integer.
        let n_tx = load / self.devices_per_antenna as f64;
        let numerator = (self.n_sectors as f64 * n_tx)
            * (self.p_tx / eta_pa + self.p_bb / eta_bb + self.p_rf / eta_rf);
        let denominator = (1.0 - loss_r) * (1.0 - loss_dc) * (1.0 - loss_cool);
        Ok(numerator / denominator)
    }

    /// Anchor multiplier (`anchor / raw(peak_load)`), or 1 when disabled.
    pub fn anchor_scale(&self) -> Result<f64> {
        match self.peak_power_anchor {
            Some(anchor) => Ok(anchor / self.raw_power(self.peak_load)?),
            None => Ok(1.0),
        }
    }
}

/// Hourly base-station draw for `n` active connections, W.
pub fn base_station_power(n: u64, params: &PowerParams) -> Result<f64> {
    Ok(params.raw_power(n)? * params.anchor_scale()?)
}

/// Hourly connection counts with a daily peak and a night trough.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficProfile {
    /// Connections per hour, each in `[0, peak_load]`.
    pub counts: Vec<u64>,
    pub peak_load: u64,
}

/// Synthesizes a diurnal connection-count profile.
///
/// Deterministic for a fixed seed. The profile combines a Gaussian daytime
/// bump (peak near 15:00), a mild weekday/weekend modulation, and bounded
/// multiplicative AR noise, then is normalized so its maximum equals
/// `peak_load` exactly.
pub fn synth_traffic(hours: usize, peak_load: u64, seed: u64) -> TrafficProfile {
    assert!(hours >= 24, "traffic profile needs at least one day");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let week_factor = [1.0, 1.0, 1.0, 1.0, 1.0, 0.9, 0.82];

    let mut noise = 0.0_f64;
    let mut raw = Vec::with_capacity(hours);
    for t in 0..hours {
        let hour = (t % 24) as f64;
        let day = t / 24;
        let dh = (hour - 15.0).abs().min(24.0 - (hour - 15.0).abs());
        let diurnal = 0.1 + 0.9 * (-dh * dh / (2.0 * 3.5 * 3.5)).exp();
        let weekly = week_factor[day % 7];
        noise = 0.9 * noise + 0.06 * (rng.random::<f64>() * 2.0 - 1.0);
        let factor = (1.0 + noise).clamp(0.75, 1.25);
        raw.push(diurnal * weekly * factor);
    }

    let max = raw.iter().cloned().fold(0.0_f64, f64::max);
    let scale = peak_load as f64 / max;
    let counts = raw
        .iter()
        .map(|r| ((r * scale).round() as u64).min(peak_load))
        .collect();
    TrafficProfile { counts, peak_load }
}

/// Hourly energy consumption (Wh per hour) for the profile.
pub fn consumption_series(profile: &TrafficProfile, params: &PowerParams) -> Result<Vec<f64>> {
    let max_n = profile.counts.iter().copied().max().unwrap_or(0);
    // Validity of the factors is monotone in load, so one check at the
    // profile maximum covers every hour.
    params.raw_power(max_n)?;
    let scale = params.anchor_scale()?;
    Ok(par::map(&profile.counts, |&n| {
        params.raw_power(n).expect("validated at max load") * scale
    }))
}
