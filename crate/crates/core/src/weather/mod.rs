//! Hourly weather series: ingestion, synthesis, splits and feature matrices.
//!
//! A "year" is always 8760 hourly rows; Feb 29 rows in source data are
//! dropped on ingestion so that splits and month indexing stay uniform. The
//! continuity check therefore accepts exactly one kind of gap: the 25-hour
//! jump from Feb 28 23:00 to Mar 1 00:00 left behind by a dropped leap day.

mod psm3;
mod synth;

pub use psm3::parse_psm3_csv;
pub use synth::synth_weather;

use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, Datelike, FixedOffset, Timelike};
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::{Error, Result};

/// Hourly rows per (leap-free) year.
pub const HOURS_PER_YEAR: usize = 8760;

/// Number of model input features carried by every record.
pub const FEATURE_COUNT: usize = 12;

/// Fixed feature order used by [`feature_matrix`] and everything downstream.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "month",
    "hour",
    "dni",
    "dhi",
    "ghi",
    "dew_point",
    "temperature",
    "pressure",
    "humidity",
    "wind_direction",
    "wind_speed",
    "surface_albedo",
];

/// Index of the DHI column in [`FEATURE_NAMES`]; the Cond-LSTM gate feature.
pub const DHI_FEATURE_INDEX: usize = 3;

/// Site identity and coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Location {
    /// Degrees, north positive, in [-90, 90].
    pub latitude: f64,
    /// Degrees, east positive, in [-180, 180].
    pub longitude: f64,
    /// Offset from UTC in hours (fractional allowed).
    pub timezone_offset: f64,
    /// Free-text region tag, e.g. "IA".
    pub region_label: String,
}

impl Location {
    pub fn new(
        latitude: f64,
        longitude: f64,
        timezone_offset: f64,
        region_label: impl Into<String>,
    ) -> Result<Self> {
        if !(-90.0..=90.0).contains(&latitude) {
            return Err(Error::Domain(format!(
                "latitude {latitude} outside [-90, 90]"
            )));
        }
        if !(-180.0..=180.0).contains(&longitude) {
            return Err(Error::Domain(format!(
                "longitude {longitude} outside [-180, 180]"
            )));
        }
        Ok(Location {
            latitude,
            longitude,
            timezone_offset,
            region_label: region_label.into(),
        })
    }

    /// The fixed UTC offset implied by `timezone_offset`.
    pub fn offset(&self) -> FixedOffset {
        FixedOffset::east_opt((self.timezone_offset * 3600.0).round() as i32)
            .expect("timezone offset within +/- 24h")
    }
}

/// One hourly meteorological record; the 12 model input features plus its
/// local timestamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherRecord {
    /// Local timestamp with fixed UTC offset, on the hour.
    pub timestamp: DateTime<FixedOffset>,
    /// Month 1-12 (local).
    pub month: u32,
    /// Hour 0-23 (local).
    pub hour: u32,
    /// Direct normal irradiance, W/m².
    pub dni: f64,
    /// Diffuse horizontal irradiance, W/m².
    pub dhi: f64,
    /// Global horizontal irradiance, W/m².
    pub ghi: f64,
    /// Dew point, °C.
    pub dew_point: f64,
    /// Ambient temperature, °C.
    pub temperature: f64,
    /// Surface pressure, mbar.
    pub pressure: f64,
    /// Relative humidity, %.
    pub humidity: f64,
    /// Wind direction, degrees 0-360.
    pub wind_direction: f64,
    /// Wind speed, m/s.
    pub wind_speed: f64,
    /// Ground albedo, 0-1.
    pub surface_albedo: f64,
}

impl WeatherRecord {
    /// Features in the fixed order of [`FEATURE_NAMES`].
    pub fn features(&self) -> [f64; FEATURE_COUNT] {
        [
            self.month as f64,
            self.hour as f64,
            self.dni,
            self.dhi,
            self.ghi,
            self.dew_point,
            self.temperature,
            self.pressure,
            self.humidity,
            self.wind_direction,
            self.wind_speed,
            self.surface_albedo,
        ]
    }

    fn validate(&self, index: usize) -> Result<()> {
        if self.dni < 0.0 || self.dhi < 0.0 || self.ghi < 0.0 {
            return Err(Error::parse(index, "negative irradiance"));
        }
        if self.dni == 0.0 && self.dhi == 0.0 && self.ghi != 0.0 {
            return Err(Error::parse(
                index,
                format!("ghi = {} with zero dni and dhi", self.ghi),
            ));
        }
        if !(0.0..=1.0).contains(&self.surface_albedo) {
            return Err(Error::parse(
                index,
                format!("surface_albedo {} outside [0, 1]", self.surface_albedo),
            ));
        }
        if !(0.0..=100.0).contains(&self.humidity) {
            return Err(Error::parse(
                index,
                format!("humidity {} outside [0, 100]", self.humidity),
            ));
        }
        if !(1..=12).contains(&self.month) || self.hour > 23 {
            return Err(Error::parse(
                index,
                format!("month/hour {}/{} out of range", self.month, self.hour),
            ));
        }
        Ok(())
    }
}

/// Chronological hourly weather series with validated invariants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherSeries {
    records: Vec<WeatherRecord>,
}

impl WeatherSeries {
    /// Validates per-record invariants and hourly continuity.
    pub fn new(records: Vec<WeatherRecord>) -> Result<Self> {
        for (i, rec) in records.iter().enumerate() {
            rec.validate(i)?;
        }
        for (i, pair) in records.windows(2).enumerate() {
            let (a, b) = (&pair[0], &pair[1]);
            let delta = b.timestamp.signed_duration_since(a.timestamp).num_seconds();
            let leap_skip = delta == 25 * 3600
                && a.timestamp.month() == 2
                && a.timestamp.day() == 28
                && a.timestamp.hour() == 23;
            if delta != 3600 && !leap_skip {
                return Err(Error::Continuity(format!(
                    "rows {} and {} are {} s apart (expected 3600)",
                    i,
                    i + 1,
                    delta
                )));
            }
        }
        Ok(WeatherSeries { records })
    }

    pub fn records(&self) -> &[WeatherRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// A contiguous sub-series; panics if the range is out of bounds.
    pub fn slice(&self, range: std::ops::Range<usize>) -> WeatherSeries {
        WeatherSeries {
            records: self.records[range].to_vec(),
        }
    }

    /// Concatenates `self` and `other`; revalidates continuity at the seam.
    pub fn concat(&self, other: &WeatherSeries) -> Result<WeatherSeries> {
        let mut records = self.records.clone();
        records.extend_from_slice(&other.records);
        WeatherSeries::new(records)
    }
}

/// Contiguous chronological train/validation/test split.
#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub train: WeatherSeries,
    pub validation: WeatherSeries,
    pub test: WeatherSeries,
}

/// Splits `series` into whole-year chronological blocks.
///
/// The split consumes the first `(train + val + test) * 8760` rows; no row is
/// shared or dropped between adjacent blocks.
pub fn split_chronological(
    series: &WeatherSeries,
    train_years: usize,
    val_years: usize,
    test_years: usize,
) -> Result<DatasetSplit> {
    let needed = (train_years + val_years + test_years) * HOURS_PER_YEAR;
    if series.len() < needed {
        return Err(Error::InsufficientData(format!(
            "split needs {} rows ({}+{}+{} years), series has {}",
            needed,
            train_years,
            val_years,
            test_years,
            series.len()
        )));
    }
    let a = train_years * HOURS_PER_YEAR;
    let b = a + val_years * HOURS_PER_YEAR;
    let c = b + test_years * HOURS_PER_YEAR;
    Ok(DatasetSplit {
        train: series.slice(0..a),
        validation: series.slice(a..b),
        test: series.slice(b..c),
    })
}

/// Feature matrix with one row per hour and the 12 columns of
/// [`FEATURE_NAMES`], in that order.
pub fn feature_matrix(series: &WeatherSeries) -> Result<Matrix> {
    if series.is_empty() {
        return Err(Error::EmptyInput("feature_matrix on empty series"));
    }
    let mut data = Vec::with_capacity(series.len() * FEATURE_COUNT);
    for rec in series.records() {
        data.extend_from_slice(&rec.features());
    }
    Ok(Matrix {
        rows: series.len(),
        cols: FEATURE_COUNT,
        data,
    })
}

/// Writes the canonical interchange CSV: one header row, then
/// `timestamp + 12 features` per hourly row, ISO-8601 timestamps, UTF-8.
pub fn write_canonical_csv<W: Write>(series: &WeatherSeries, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["timestamp".to_string()];
    header.extend(FEATURE_NAMES.iter().map(|s| s.to_string()));
    w.write_record(&header)?;
    for rec in series.records() {
        let mut row = vec![rec.timestamp.to_rfc3339()];
        row.push(rec.month.to_string());
        row.push(rec.hour.to_string());
        for v in &rec.features()[2..] {
            row.push(v.to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_canonical_csv_file(series: &WeatherSeries, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_canonical_csv(series, std::io::BufWriter::new(file))
}

/// Reads the canonical CSV produced by [`write_canonical_csv`].
pub fn read_canonical_csv<R: Read>(reader: R) -> Result<WeatherSeries> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r
        .headers()
        .map_err(|e| Error::schema("header", e.to_string()))?
        .clone();
    let mut expected = vec!["timestamp".to_string()];
    expected.extend(FEATURE_NAMES.iter().map(|s| s.to_string()));
    for name in &expected {
        if !headers.iter().any(|h| h == name) {
            return Err(Error::schema(name.clone(), "missing column"));
        }
    }
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let idx: Vec<usize> = expected.iter().map(|n| col(n)).collect();

    let mut records = Vec::new();
    for (row_i, row) in r.records().enumerate() {
        let row = row.map_err(|e| Error::parse(row_i, e.to_string()))?;
        let field = |k: usize| -> Result<&str> {
            row.get(idx[k])
                .ok_or_else(|| Error::parse(row_i, format!("missing field {}", expected[k])))
        };
        let num = |k: usize| -> Result<f64> {
            let s = field(k)?;
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::parse(row_i, format!("non-numeric {} = {s:?}", expected[k])))
        };
        let timestamp = DateTime::parse_from_rfc3339(field(0)?)
            .map_err(|e| Error::parse(row_i, format!("bad timestamp: {e}")))?;
        records.push(WeatherRecord {
            timestamp,
            month: num(1)? as u32,
            hour: num(2)? as u32,
            dni: num(3)?,
            dhi: num(4)?,
            ghi: num(5)?,
            dew_point: num(6)?,
            temperature: num(7)?,
            pressure: num(8)?,
            humidity: num(9)?,
            wind_direction: num(10)?,
            wind_speed: num(11)?,
            surface_albedo: num(12)?,
        });
    }
    WeatherSeries::new(records)
}

pub fn read_canonical_csv_file(path: impl AsRef<Path>) -> Result<WeatherSeries> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    read_canonical_csv(std::io::BufReader::new(file))
}

/// Writes an hourly `(timestamp, <name>)` value CSV aligned with `series`.
pub fn write_value_csv<W: Write>(
    series: &WeatherSeries,
    values: &[f64],
    name: &str,
    writer: W,
) -> Result<()> {
    if series.len() != values.len() {
        return Err(Error::Alignment(format!(
            "series has {} rows, values {}",
            series.len(),
            values.len()
        )));
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["timestamp", name])?;
    for (rec, v) in series.records().iter().zip(values) {
        w.write_record([rec.timestamp.to_rfc3339(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the value column of a `(timestamp, value)` CSV.
pub fn read_value_csv<R: Read>(reader: R) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for (row_i, row) in r.records().enumerate() {
        let row = row.map_err(|e| Error::parse(row_i, e.to_string()))?;
        let s = row
            .get(1)
            .ok_or_else(|| Error::parse(row_i, "missing value column"))?;
        out.push(
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::parse(row_i, format!("non-numeric value {s:?}")))?,
        );
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod test_util {
    use super::*;
    use chrono::TimeZone;

    /// Flat constant-weather series for structural tests; hourly timestamps
    /// from 2001-01-01 00:00 local.
    pub fn flat_series(hours: usize) -> WeatherSeries {
        let offset = FixedOffset::west_opt(6 * 3600).unwrap();
        let start = offset.with_ymd_and_hms(2001, 1, 1, 0, 0, 0).unwrap();
        let records = (0..hours)
            .map(|i| {
                let ts = start + chrono::Duration::hours(i as i64);
                WeatherRecord {
                    timestamp: ts,
                    month: ts.month(),
                    hour: ts.hour(),
                    dni: 0.0,
                    dhi: 0.0,
                    ghi: 0.0,
                    dew_point: 0.0,
                    temperature: 10.0,
                    pressure: 1013.0,
                    humidity: 50.0,
                    wind_direction: 180.0,
                    wind_speed: 3.0,
                    surface_albedo: 0.2,
                }
            })
            .collect();
        WeatherSeries::new(records).unwrap()
    }
}
