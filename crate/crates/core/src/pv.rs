//! Physics-based hourly DC harvest of a PV array.
//!
//! The chain is: approximate solar position -> isotropic-sky plane-of-array
//! transposition -> NOCT cell temperature -> linear power model with a
//! temperature coefficient. Energy is tracked on the DC side; with a 1-hour
//! step, W and Wh coincide numerically.

use chrono::{DateTime, FixedOffset, TimeZone, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::weather::{Location, WeatherRecord, WeatherSeries};
use crate::{par, Error, Result};

/// Irradiance at standard test conditions, W/m².
pub const STC_IRRADIANCE: f64 = 1000.0;
/// Cell temperature at standard test conditions, °C.
pub const STC_CELL_TEMP: f64 = 25.0;

/// PV array parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelSpec {
    /// Nameplate DC rating at STC, W.
    pub rated_power_stc: f64,
    /// Tilt from horizontal, degrees in [0, 90].
    pub tilt: f64,
    /// Surface azimuth, degrees clockwise from north (180 = equator-facing
    /// in the northern hemisphere).
    pub azimuth: f64,
    /// Power temperature coefficient, fraction per °C (negative).
    pub gamma: f64,
    /// Nominal operating cell temperature, °C.
    pub noct: f64,
}

impl PanelSpec {
    pub fn new(
        rated_power_stc: f64,
        tilt: f64,
        azimuth: f64,
        gamma: f64,
        noct: f64,
    ) -> Result<Self> {
        if rated_power_stc <= 0.0 {
            return Err(Error::Domain(format!(
                "rated_power_stc {rated_power_stc} must be positive"
            )));
        }
        if !(0.0..=90.0).contains(&tilt) {
            return Err(Error::Domain(format!("tilt {tilt} outside [0, 90]")));
        }
        if !(-1.0..0.0).contains(&gamma) {
            return Err(Error::Domain(format!("gamma {gamma} outside (-1, 0)")));
        }
        Ok(PanelSpec {
            rated_power_stc,
            tilt,
            azimuth,
            gamma,
            noct,
        })
    }

    /// Industry-typical defaults: tilt = |latitude|, equator-facing,
    /// gamma = -0.37 %/°C, NOCT = 45 °C.
    pub fn default_for(rated_power_stc: f64, latitude: f64) -> Self {
        PanelSpec {
            rated_power_stc,
            tilt: latitude.abs().min(90.0),
            azimuth: if latitude >= 0.0 { 180.0 } else { 0.0 },
            gamma: -0.0037,
            noct: 45.0,
        }
    }
}

/// Sun position in the local horizontal frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolarPosition {
    /// Zenith angle, degrees in [0, 180] (> 90 means below horizon).
    pub zenith: f64,
    /// Azimuth, degrees clockwise from north in [0, 360).
    pub azimuth: f64,
}

/// Approximate solar position (Astronomical Almanac low-precision series),
/// accurate to a few tenths of a degree over the relevant decades.
pub fn solar_position(location: &Location, timestamp: DateTime<FixedOffset>) -> SolarPosition {
    let utc = timestamp.with_timezone(&Utc);
    let j2000 = Utc.with_ymd_and_hms(2000, 1, 1, 12, 0, 0).unwrap();
    let n = utc.signed_duration_since(j2000).num_seconds() as f64 / 86_400.0;

    // Mean longitude and mean anomaly of the sun, degrees.
    let l = 280.460 + 0.985_647_4 * n;
    let g = (357.528 + 0.985_600_3 * n).to_radians();
    // Ecliptic longitude and obliquity.
    let lambda = (l + 1.915 * g.sin() + 0.020 * (2.0 * g).sin()).to_radians();
    let eps = (23.439 - 0.000_000_4 * n).to_radians();
    // Right ascension and declination.
    let alpha = (eps.cos() * lambda.sin()).atan2(lambda.cos());
    let delta = (eps.sin() * lambda.sin()).asin();

    // Equation of time in minutes, wrapped to [-180, 180) degrees first.
    let mut e_deg = (l - alpha.to_degrees()).rem_euclid(360.0);
    if e_deg >= 180.0 {
        e_deg -= 360.0;
    }
    let eot_min = 4.0 * e_deg;

    // True solar time in hours from the UTC clock and the site longitude.
    let clock_hours = utc.hour() as f64 + utc.minute() as f64 / 60.0 + utc.second() as f64 / 3600.0;
    let tst = clock_hours + location.longitude / 15.0 + eot_min / 60.0;
    let hour_angle = ((tst - 12.0) * 15.0).to_radians();

    let phi = location.latitude.to_radians();
    let cos_zenith = phi.sin() * delta.sin() + phi.cos() * delta.cos() * hour_angle.cos();
    let zenith = cos_zenith.clamp(-1.0, 1.0).acos().to_degrees();

    // Azimuth measured from south (westward positive), then mapped to the
    // north-clockwise convention.
    let az_south = hour_angle
        .sin()
        .atan2(hour_angle.cos() * phi.sin() - delta.tan() * phi.cos());
    let azimuth = (az_south.to_degrees() + 180.0).rem_euclid(360.0);

    SolarPosition { zenith, azimuth }
}

/// Plane-of-array irradiance via the isotropic-sky transposition:
/// beam + sky-diffuse + ground-reflected terms, never negative.
pub fn poa_irradiance(rec: &WeatherRecord, pos: &SolarPosition, panel: &PanelSpec) -> f64 {
    let tilt = panel.tilt.to_radians();
    let zenith = pos.zenith.to_radians();
    let cos_aoi = zenith.cos() * tilt.cos()
        + zenith.sin() * tilt.sin() * (pos.azimuth - panel.azimuth).to_radians().cos();
    let beam = rec.dni * cos_aoi.max(0.0);
    let sky = rec.dhi * (1.0 + tilt.cos()) / 2.0;
    let ground = rec.ghi * rec.surface_albedo * (1.0 - tilt.cos()) / 2.0;
    (beam + sky + ground).max(0.0)
}

/// NOCT cell-temperature model: `ambient + poa/800 * (noct - 20)`.
pub fn cell_temperature(poa: f64, ambient: f64, panel: &PanelSpec) -> f64 {
    ambient + poa / 800.0 * (panel.noct - 20.0)
}

/// DC power with a linear temperature derating, clamped at zero.
pub fn dc_power(poa: f64, t_cell: f64, panel: &PanelSpec) -> f64 {
    let p = panel.rated_power_stc
        * (poa / STC_IRRADIANCE)
        * (1.0 + panel.gamma * (t_cell - STC_CELL_TEMP));
    p.max(0.0)
}

/// Hourly DC energy (Wh per hour) of the array described by `panel` for
/// every record in `series`. Linear in `rated_power_stc`.
pub fn harvest_series(series: &WeatherSeries, location: &Location, panel: &PanelSpec) -> Vec<f64> {
    par::map(series.records(), |rec| harvest_hour(rec, location, panel))
}

/// Single-hour harvest; the kernel mapped by [`harvest_series`].
pub fn harvest_hour(rec: &WeatherRecord, location: &Location, panel: &PanelSpec) -> f64 {
    let pos = solar_position(location, rec.timestamp);
    let poa = poa_irradiance(rec, &pos, panel);
    let t_cell = cell_temperature(poa, rec.temperature, panel);
    dc_power(poa, t_cell, panel)
}
