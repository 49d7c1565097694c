//! NREL PSM3-style CSV ingestion.
//!
//! Layout: two metadata rows (a names row and a values row carrying at least
//! Latitude, Longitude and Time Zone), then a column-header row, then hourly
//! data rows. Feb 29 rows are dropped so every ingested year is 8760 rows.

use std::path::Path;

use chrono::{Datelike, LocalResult, TimeZone};

use super::{Location, WeatherRecord, WeatherSeries};
use crate::{Error, Result};

const REQUIRED_COLUMNS: [&str; 14] = [
    "Year",
    "Month",
    "Day",
    "Hour",
    "DNI",
    "DHI",
    "GHI",
    "Dew Point",
    "Temperature",
    "Pressure",
    "Relative Humidity",
    "Wind Direction",
    "Wind Speed",
    "Surface Albedo",
];

/// Parses a PSM3-style weather CSV into a validated series.
pub fn parse_psm3_csv(path: impl AsRef<Path>) -> Result<(Location, WeatherSeries)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    parse_psm3_str(&text)
}

/// Parses PSM3-style CSV content.
pub fn parse_psm3_str(text: &str) -> Result<(Location, WeatherSeries)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = reader.records();

    let meta_names = rows
        .next()
        .ok_or_else(|| Error::schema("metadata", "file is empty"))?
        .map_err(|e| Error::parse(0, e.to_string()))?;
    let meta_values = rows
        .next()
        .ok_or_else(|| Error::schema("metadata", "missing metadata values row"))?
        .map_err(|e| Error::parse(1, e.to_string()))?;

    let meta = |name: &str| -> Result<f64> {
        let pos = meta_names
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::schema(name, "missing metadata column"))?;
        let raw = meta_values
            .get(pos)
            .ok_or_else(|| Error::schema(name, "metadata values row too short"))?;
        raw.trim()
            .parse::<f64>()
            .map_err(|_| Error::schema(name, format!("non-numeric metadata value {raw:?}")))
    };
    let meta_text = |name: &str| -> Option<String> {
        meta_names
            .iter()
            .position(|h| h.trim() == name)
            .and_then(|pos| meta_values.get(pos))
            .map(|s| s.trim().to_string())
    };

    let latitude = meta("Latitude")?;
    let longitude = meta("Longitude")?;
    let timezone = meta("Time Zone")?;
    let region_label = meta_text("State")
        .filter(|s| !s.is_empty() && s != "-")
        .or_else(|| meta_text("City").filter(|s| !s.is_empty() && s != "-"))
        .unwrap_or_default();
    let location = Location::new(latitude, longitude, timezone, region_label)?;

    let header = rows
        .next()
        .ok_or_else(|| Error::schema("header", "missing column header row"))?
        .map_err(|e| Error::parse(2, e.to_string()))?;
    let mut col_idx = Vec::with_capacity(REQUIRED_COLUMNS.len());
    for name in REQUIRED_COLUMNS {
        let pos = header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::schema(name, "missing required column"))?;
        col_idx.push(pos);
    }

    let offset = location.offset();
    let mut records = Vec::new();
    for (row_i, row) in rows.enumerate() {
        let row = row.map_err(|e| Error::parse(row_i, e.to_string()))?;
        let num = |k: usize| -> Result<f64> {
            let raw = row.get(col_idx[k]).unwrap_or("");
            raw.trim().parse::<f64>().map_err(|_| {
                Error::parse(
                    row_i,
                    format!("non-numeric {} = {raw:?}", REQUIRED_COLUMNS[k]),
                )
            })
        };
        let year = num(0)? as i32;
        let month = num(1)? as u32;
        let day = num(2)? as u32;
        let hour = num(3)? as u32;
        if month == 2 && day == 29 {
            continue;
        }
        let timestamp = match offset.with_ymd_and_hms(year, month, day, hour, 0, 0) {
            LocalResult::Single(ts) => ts,
            _ => {
                return Err(Error::parse(
                    row_i,
                    format!("invalid timestamp {year}-{month:02}-{day:02} {hour:02}:00"),
                ))
            }
        };
        records.push(WeatherRecord {
            timestamp,
            month: timestamp.month(),
            hour,
            dni: num(4)?,
            dhi: num(5)?,
            ghi: num(6)?,
            dew_point: num(7)?,
            temperature: num(8)?,
            pressure: num(9)?,
            humidity: num(10)?,
            wind_direction: num(11)?,
            wind_speed: num(12)?,
            surface_albedo: num(13)?,
        });
    }

    let series = WeatherSeries::new(records)?;
    Ok((location, series))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weather::write_canonical_csv;

    fn sample(rows: usize, break_row: Option<usize>) -> String {
        let mut s = String::from(
            "Source,Location ID,City,State,Country,Latitude,Longitude,Time Zone,Elevation\n\
             NSRDB,149190,-,IA,United States,41.6,-93.6,-6,292\n\
             Year,Month,Day,Hour,Minute,DHI,DNI,GHI,Dew Point,Temperature,Pressure,Relative Humidity,Wind Direction,Wind Speed,Surface Albedo\n",
        );
        for i in 0..rows {
            let day = i / 24 + 1;
            let hour = i % 24;
            let ghi = if break_row == Some(i) {
                String::new()
            } else if (8..17).contains(&hour) {
                "420.5".to_string()
            } else {
                "0".to_string()
            };
            let (dhi, dni) = if (8..17).contains(&hour) {
                ("120.5", "610")
            } else {
                ("0", "0")
            };
            s.push_str(&format!(
                "2020,1,{day},{hour},0,{dhi},{dni},{ghi},-4.2,1.5,980,72,210,4.1,0.32\n"
            ));
        }
        s
    }

    #[test]
    fn metadata_maps_to_location() {
        let (loc, series) = parse_psm3_str(&sample(24, None)).unwrap();
        assert_eq!(loc.latitude, 41.6);
        assert_eq!(loc.longitude, -93.6);
        assert_eq!(loc.timezone_offset, -6.0);
        assert_eq!(loc.region_label, "IA");
        assert_eq!(series.len(), 24);
    }

    #[test]
    fn hourly_rows_are_contiguous() {
        let (_, series) = parse_psm3_str(&sample(24, None)).unwrap();
        for pair in series.records().windows(2) {
            let dt = pair[1]
                .timestamp
                .signed_duration_since(pair[0].timestamp)
                .num_seconds();
            assert_eq!(dt, 3600);
        }
    }

    #[test]
    fn empty_ghi_cell_is_parse_error_with_row() {
        let err = parse_psm3_str(&sample(24, Some(10))).unwrap_err();
        match err {
            Error::Parse { row, message } => {
                assert_eq!(row, 10);
                assert!(message.contains("GHI"), "message: {message}");
            }
            other => panic!("expected Parse, got {other:?}"),
        }
    }

    #[test]
    fn missing_column_is_schema_error() {
        let text = sample(24, None).replace("Wind Speed", "WS");
        let err = parse_psm3_str(&text).unwrap_err();
        match err {
            Error::Schema { field, .. } => assert_eq!(field, "Wind Speed"),
            other => panic!("expected Schema, got {other:?}"),
        }
    }

    #[test]
    fn non_hourly_gap_is_continuity_error() {
        let mut text = sample(24, None);
        // drop one data line in the middle
        let lines: Vec<&str> = text.lines().collect();
        let mut kept: Vec<&str> = lines.clone();
        kept.remove(3 + 12);
        text = kept.join("\n");
        assert!(matches!(parse_psm3_str(&text), Err(Error::Continuity(_))));
    }

    #[test]
    fn leap_day_rows_are_dropped() {
        let mut s = String::from(
            "Source,Latitude,Longitude,Time Zone\nNSRDB,41.6,-93.6,-6\n\
             Year,Month,Day,Hour,DHI,DNI,GHI,Dew Point,Temperature,Pressure,Relative Humidity,Wind Direction,Wind Speed,Surface Albedo\n",
        );
        for day in 28..=29 {
            for hour in 0..24 {
                s.push_str(&format!(
                    "2020,2,{day},{hour},0,0,0,-4,1,980,70,200,4,0.3\n"
                ));
            }
        }
        for hour in 0..24 {
            s.push_str(&format!("2020,3,1,{hour},0,0,0,-4,1,980,70,200,4,0.3\n"));
        }
        let (_, series) = parse_psm3_str(&s).unwrap();
        assert_eq!(series.len(), 48);
        assert!(series.records().iter().all(|r| r.timestamp.day() != 29));
    }

    #[test]
    fn reserialized_series_reparses_identically() {
        let (_, series) = parse_psm3_str(&sample(48, None)).unwrap();
        let mut buf = Vec::new();
        write_canonical_csv(&series, &mut buf).unwrap();
        let reread = crate::weather::read_canonical_csv(buf.as_slice()).unwrap();
        assert_eq!(series, reread);
    }
}
