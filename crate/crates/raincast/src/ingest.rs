//! Loading and aggregation of gridded daily rainfall records.
//!
//! The ingestion boundary is a long-format daily CSV
//! (`lat,lon,date,rain_mm`, one row per grid point per day, `NA` for
//! missing). Daily records are averaged per calendar month into a
//! [`RainfallGrid`] of monthly-mean rainfall in mm/day, which both the DMD
//! and the LSTM pipelines consume.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use chrono::{Datelike, Days, NaiveDate};

use crate::error::{RaincastError, Result};

/// Sentinel for a missing value inside a data matrix.
pub const MISSING: f64 = f64::NAN;

/// Coordinates are compared after rounding to this resolution (degrees),
/// so grid-point identity does not depend on float round-off.
const COORD_EPS: f64 = 1e-6;

/// One cell of the rainfall grid, identified by latitude/longitude in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    /// Degrees north.
    pub lat: f64,
    /// Degrees east.
    pub lon: f64,
}

impl GridPoint {
    pub fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }

    /// Identity key: micro-degree integers, used for ordering and equality.
    pub fn key(&self) -> (i64, i64) {
        (
            (self.lat / COORD_EPS).round() as i64,
            (self.lon / COORD_EPS).round() as i64,
        )
    }

    /// Euclidean distance in degrees (sufficient for nearest-point hints).
    pub fn distance_deg(&self, other: &GridPoint) -> f64 {
        ((self.lat - other.lat).powi(2) + (self.lon - other.lon).powi(2)).sqrt()
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lat, self.lon)
    }
}

/// A calendar month on the monthly time axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    pub year: i32,
    /// 1-based calendar month.
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Self {
        debug_assert!((1..=12).contains(&month));
        Self { year, month }
    }

    pub fn from_date(date: NaiveDate) -> Self {
        Self {
            year: date.year(),
            month: date.month(),
        }
    }

    /// The month immediately after this one.
    pub fn succ(&self) -> Self {
        if self.month == 12 {
            Self::new(self.year + 1, 1)
        } else {
            Self::new(self.year, self.month + 1)
        }
    }

    /// Signed number of months from `origin` to `self`.
    pub fn months_since(&self, origin: YearMonth) -> i64 {
        (self.year as i64 - origin.year as i64) * 12 + self.month as i64 - origin.month as i64
    }

    /// Parse a `YYYY-MM` label.
    pub fn parse(s: &str) -> Option<Self> {
        let (y, m) = s.split_once('-')?;
        let year: i32 = y.parse().ok()?;
        let month: u32 = m.parse().ok()?;
        (1..=12).contains(&month).then(|| Self::new(year, month))
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

/// Inclusive lat/lon bounding box.
#[derive(Debug, Clone, Copy)]
pub struct BoundingBox {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

impl BoundingBox {
    pub fn new(lat_min: f64, lat_max: f64, lon_min: f64, lon_max: f64) -> Result<Self> {
        if lat_min >= lat_max || lon_min >= lon_max {
            return Err(RaincastError::Param(format!(
                "bounding box must satisfy min < max on both axes, got lat {lat_min}..{lat_max}, lon {lon_min}..{lon_max}"
            )));
        }
        Ok(Self {
            lat_min,
            lat_max,
            lon_min,
            lon_max,
        })
    }

    /// The built-in north-east India box: 21.89-30.0 N, 89.81-98.0 E.
    pub fn northeast_india() -> Self {
        Self {
            lat_min: 21.89,
            lat_max: 30.0,
            lon_min: 89.81,
            lon_max: 98.0,
        }
    }

    pub fn contains(&self, p: &GridPoint) -> bool {
        p.lat >= self.lat_min && p.lat <= self.lat_max && p.lon >= self.lon_min && p.lon <= self.lon_max
    }
}

/// Daily rainfall for a set of grid points over a contiguous span of days.
///
/// `values[i][j]` is rainfall in mm at `points[i]` on `dates[j]`;
/// missing entries hold [`MISSING`].
#[derive(Debug, Clone)]
pub struct DailyRecords {
    pub points: Vec<GridPoint>,
    pub dates: Vec<NaiveDate>,
    pub values: Vec<Vec<f64>>,
}

/// Monthly-mean rainfall (mm/day) for a set of grid points over a
/// contiguous span of calendar months.
#[derive(Debug, Clone)]
pub struct RainfallGrid {
    pub points: Vec<GridPoint>,
    pub months: Vec<YearMonth>,
    pub values: Vec<Vec<f64>>,
}

/// One grid point's monthly series together with its time axis.
#[derive(Debug, Clone)]
pub struct MonthlySeries {
    pub months: Vec<YearMonth>,
    pub values: Vec<f64>,
}

/// Load a daily CSV (`lat,lon,date,rain_mm`) into [`DailyRecords`].
///
/// Rows are sorted by (lat, lon), columns by date. A grid point with no row
/// for an existing date gets [`MISSING`] there; a date absent for every
/// point is a gap in the time axis and rejected as non-contiguous.
pub fn load_daily_csv(path: impl AsRef<Path>) -> Result<DailyRecords> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;

    {
        let headers = reader.headers()?;
        let expected = ["lat", "lon", "date", "rain_mm"];
        if headers.iter().ne(expected) {
            return Err(RaincastError::Structure(format!(
                "expected header lat,lon,date,rain_mm, got {:?}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
    }

    // (point key, date) -> value, plus first-seen coordinates per key.
    let mut cells: BTreeMap<((i64, i64), NaiveDate), f64> = BTreeMap::new();
    let mut coords: BTreeMap<(i64, i64), GridPoint> = BTreeMap::new();

    let mut record = csv::StringRecord::new();
    while reader.read_record(&mut record)? {
        let line = record.position().map_or(0, |p| p.line());
        let parse = |field: usize, name: &str| -> Result<&str> {
            record.get(field).ok_or_else(|| RaincastError::Parse {
                line,
                msg: format!("missing field `{name}`"),
            })
        };
        let lat: f64 = parse(0, "lat")?.parse().map_err(|e| RaincastError::Parse {
            line,
            msg: format!("bad lat: {e}"),
        })?;
        let lon: f64 = parse(1, "lon")?.parse().map_err(|e| RaincastError::Parse {
            line,
            msg: format!("bad lon: {e}"),
        })?;
        let date_str = parse(2, "date")?;
        let date = NaiveDate::parse_from_str(date_str, "%Y-%m-%d").map_err(|_| {
            RaincastError::Parse {
                line,
                msg: format!("invalid date `{date_str}`"),
            }
        })?;
        let rain_str = parse(3, "rain_mm")?;
        let rain = if rain_str == "NA" {
            MISSING
        } else {
            let v: f64 = rain_str.parse().map_err(|e| RaincastError::Parse {
                line,
                msg: format!("bad rain_mm: {e}"),
            })?;
            if v < 0.0 {
                return Err(RaincastError::Parse {
                    line,
                    msg: format!("negative rainfall {v}"),
                });
            }
            v
        };

        let point = GridPoint::new(lat, lon);
        let key = point.key();
        coords.entry(key).or_insert(point);
        if cells.insert((key, date), rain).is_some() {
            return Err(RaincastError::Structure(format!(
                "duplicate record for point ({lat}, {lon}) on {date}"
            )));
        }
    }

    if cells.is_empty() {
        return Err(RaincastError::Structure("no records".into()));
    }

    let dates: Vec<NaiveDate> = {
        let set: std::collections::BTreeSet<NaiveDate> =
            cells.keys().map(|&(_, d)| d).collect();
        set.into_iter().collect()
    };
    for pair in dates.windows(2) {
        if pair[0].checked_add_days(Days::new(1)) != Some(pair[1]) {
            return Err(RaincastError::Structure(format!(
                "dates are not contiguous: gap between {} and {}",
                pair[0], pair[1]
            )));
        }
    }

    let points: Vec<GridPoint> = coords.values().copied().collect();
    let date_index: BTreeMap<NaiveDate, usize> =
        dates.iter().enumerate().map(|(i, &d)| (d, i)).collect();
    let point_index: BTreeMap<(i64, i64), usize> =
        coords.keys().enumerate().map(|(i, &k)| (k, i)).collect();

    let mut values = vec![vec![MISSING; dates.len()]; points.len()];
    for (&(key, date), &v) in &cells {
        values[point_index[&key]][date_index[&date]] = v;
    }

    Ok(DailyRecords {
        points,
        dates,
        values,
    })
}

/// Average daily records into monthly means (mm/day).
///
/// Each (point, month) value is the arithmetic mean of that point's
/// non-missing daily values within the calendar month. A cell with zero
/// usable days is an error: gaps are rejected rather than imputed.
pub fn monthly_average(records: &DailyRecords) -> Result<RainfallGrid> {
    if records.dates.is_empty() || records.points.is_empty() {
        return Err(RaincastError::Structure("no records".into()));
    }

    // Contiguous dates guarantee contiguous months, in order.
    let mut months: Vec<YearMonth> = Vec::new();
    let mut spans: Vec<(usize, usize)> = Vec::new(); // [start, end) day columns
    for (j, date) in records.dates.iter().enumerate() {
        let ym = YearMonth::from_date(*date);
        if months.last() != Some(&ym) {
            months.push(ym);
            spans.push((j, j + 1));
        } else {
            spans.last_mut().unwrap().1 = j + 1;
        }
    }

    let mut values = vec![vec![0.0; months.len()]; records.points.len()];
    for (i, point) in records.points.iter().enumerate() {
        for (k, &(start, end)) in spans.iter().enumerate() {
            let mut sum = 0.0;
            let mut count = 0usize;
            for v in &records.values[i][start..end] {
                if v.is_finite() {
                    sum += v;
                    count += 1;
                }
            }
            if count == 0 {
                return Err(RaincastError::MissingData {
                    lat: point.lat,
                    lon: point.lon,
                    year: months[k].year,
                    month: months[k].month,
                });
            }
            values[i][k] = sum / count as f64;
        }
    }

    Ok(RainfallGrid {
        points: records.points.clone(),
        months,
        values,
    })
}

/// Keep exactly the grid points inside the closed bounding box.
pub fn select_region(grid: &RainfallGrid, bbox: &BoundingBox) -> Result<RainfallGrid> {
    let keep: Vec<usize> = grid
        .points
        .iter()
        .enumerate()
        .filter(|(_, p)| bbox.contains(p))
        .map(|(i, _)| i)
        .collect();
    if keep.is_empty() {
        return Err(RaincastError::EmptySelection(format!(
            "no grid points inside lat {}..{}, lon {}..{}",
            bbox.lat_min, bbox.lat_max, bbox.lon_min, bbox.lon_max
        )));
    }
    Ok(RainfallGrid {
        points: keep.iter().map(|&i| grid.points[i]).collect(),
        months: grid.months.clone(),
        values: keep.iter().map(|&i| grid.values[i].clone()).collect(),
    })
}

/// Extract one grid point's monthly series (exact coordinate match after
/// rounding to micro-degrees). When absent, the error names the nearest
/// grid point.
pub fn select_point(grid: &RainfallGrid, lat: f64, lon: f64) -> Result<MonthlySeries> {
    let wanted = GridPoint::new(lat, lon);
    let key = wanted.key();
    if let Some(i) = grid.points.iter().position(|p| p.key() == key) {
        return Ok(MonthlySeries {
            months: grid.months.clone(),
            values: grid.values[i].clone(),
        });
    }
    let nearest = grid
        .points
        .iter()
        .min_by(|a, b| {
            a.distance_deg(&wanted)
                .total_cmp(&b.distance_deg(&wanted))
        })
        .expect("grid has at least one point");
    Err(RaincastError::PointNotFound {
        lat,
        lon,
        nearest_lat: nearest.lat,
        nearest_lon: nearest.lon,
    })
}

impl RainfallGrid {
    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn n_months(&self) -> usize {
        self.months.len()
    }

    /// Validate the structural invariants: contiguous months, matching
    /// dimensions, unique points, non-negative (or missing) values.
    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() || self.months.is_empty() {
            return Err(RaincastError::Structure("empty grid".into()));
        }
        for pair in self.months.windows(2) {
            if pair[0].succ() != pair[1] {
                return Err(RaincastError::Structure(format!(
                    "months are not contiguous: {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        if self.values.len() != self.points.len() {
            return Err(RaincastError::Structure("row count != point count".into()));
        }
        let mut keys: Vec<(i64, i64)> = self.points.iter().map(|p| p.key()).collect();
        keys.sort_unstable();
        keys.dedup();
        if keys.len() != self.points.len() {
            return Err(RaincastError::Structure("duplicate grid points".into()));
        }
        for (i, row) in self.values.iter().enumerate() {
            if row.len() != self.months.len() {
                return Err(RaincastError::Structure(format!(
                    "row {i} has {} values for {} months",
                    row.len(),
                    self.months.len()
                )));
            }
            if row.iter().any(|v| v.is_finite() && *v < 0.0) {
                return Err(RaincastError::Structure(format!(
                    "negative monthly value at point {}",
                    self.points[i]
                )));
            }
        }
        Ok(())
    }

    /// Write the monthly CSV (`lat,lon,year,month,rain_mm_per_day`).
    pub fn write_monthly_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut writer = csv::Writer::from_path(path.as_ref())?;
        writer.write_record(["lat", "lon", "year", "month", "rain_mm_per_day"])?;
        for (point, row) in self.points.iter().zip(&self.values) {
            for (ym, v) in self.months.iter().zip(row) {
                let value = if v.is_finite() {
                    v.to_string()
                } else {
                    "NA".to_string()
                };
                writer.write_record([
                    point.lat.to_string(),
                    point.lon.to_string(),
                    ym.year.to_string(),
                    ym.month.to_string(),
                    value,
                ])?;
            }
        }
        writer.flush()?;
        Ok(())
    }

    /// Read the monthly CSV written by [`RainfallGrid::write_monthly_csv`].
    pub fn read_monthly_csv(path: impl AsRef<Path>) -> Result<RainfallGrid> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path.as_ref())?;
        {
            let headers = reader.headers()?;
            let expected = ["lat", "lon", "year", "month", "rain_mm_per_day"];
            if headers.iter().ne(expected) {
                return Err(RaincastError::Structure(format!(
                    "expected header lat,lon,year,month,rain_mm_per_day, got {:?}",
                    headers.iter().collect::<Vec<_>>().join(",")
                )));
            }
        }

        let mut cells: BTreeMap<((i64, i64), YearMonth), f64> = BTreeMap::new();
        let mut coords: BTreeMap<(i64, i64), GridPoint> = BTreeMap::new();
        let mut record = csv::StringRecord::new();
        while reader.read_record(&mut record)? {
            let line = record.position().map_or(0, |p| p.line());
            let field = |i: usize, name: &str| -> Result<&str> {
                record.get(i).ok_or_else(|| RaincastError::Parse {
                    line,
                    msg: format!("missing field `{name}`"),
                })
            };
            let err = |msg: String| RaincastError::Parse { line, msg };
            let lat: f64 = field(0, "lat")?.parse().map_err(|e| err(format!("bad lat: {e}")))?;
            let lon: f64 = field(1, "lon")?.parse().map_err(|e| err(format!("bad lon: {e}")))?;
            let year: i32 = field(2, "year")?
                .parse()
                .map_err(|e| err(format!("bad year: {e}")))?;
            let month: u32 = field(3, "month")?
                .parse()
                .map_err(|e| err(format!("bad month: {e}")))?;
            if !(1..=12).contains(&month) {
                return Err(err(format!("month {month} out of 1..=12")));
            }
            let raw = field(4, "rain_mm_per_day")?;
            let value = if raw == "NA" {
                MISSING
            } else {
                let v: f64 = raw
                    .parse()
                    .map_err(|e| err(format!("bad rain_mm_per_day: {e}")))?;
                if v < 0.0 {
                    return Err(err(format!("negative rainfall {v}")));
                }
                v
            };
            let point = GridPoint::new(lat, lon);
            coords.entry(point.key()).or_insert(point);
            if cells
                .insert((point.key(), YearMonth::new(year, month)), value)
                .is_some()
            {
                return Err(RaincastError::Structure(format!(
                    "duplicate record for point ({lat}, {lon}) in {year}-{month:02}"
                )));
            }
        }
        if cells.is_empty() {
            return Err(RaincastError::Structure("no records".into()));
        }

        let months: Vec<YearMonth> = {
            let set: std::collections::BTreeSet<YearMonth> =
                cells.keys().map(|&(_, m)| m).collect();
            set.into_iter().collect()
        };
        for pair in months.windows(2) {
            if pair[0].succ() != pair[1] {
                return Err(RaincastError::Structure(format!(
                    "months are not contiguous: gap between {} and {}",
                    pair[0], pair[1]
                )));
            }
        }

        let points: Vec<GridPoint> = coords.values().copied().collect();
        let month_index: BTreeMap<YearMonth, usize> =
            months.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let point_index: BTreeMap<(i64, i64), usize> =
            coords.keys().enumerate().map(|(i, &k)| (k, i)).collect();
        let mut values = vec![vec![MISSING; months.len()]; points.len()];
        for (&(key, ym), &v) in &cells {
            values[point_index[&key]][month_index[&ym]] = v;
        }

        let grid = RainfallGrid {
            points,
            months,
            values,
        };
        grid.validate()?;
        Ok(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn loads_single_point_two_days() {
        let f = write_csv(
            "lat,lon,date,rain_mm\n25.0,91.0,1901-01-01,4.0\n25.0,91.0,1901-01-02,6.0\n",
        );
        let records = load_daily_csv(f.path()).unwrap();
        assert_eq!(records.points, vec![GridPoint::new(25.0, 91.0)]);
        assert_eq!(records.values, vec![vec![4.0, 6.0]]);
    }

    #[test]
    fn empty_data_section_is_structural_error() {
        let f = write_csv("lat,lon,date,rain_mm\n");
        match load_daily_csv(f.path()) {
            Err(RaincastError::Structure(msg)) => assert!(msg.contains("no records")),
            other => panic!("expected structural error, got {other:?}"),
        }
    }

    #[test]
    fn impossible_calendar_day_is_parse_error() {
        let f = write_csv("lat,lon,date,rain_mm\n25.0,91.0,1901-02-30,1.0\n");
        match load_daily_csv(f.path()) {
            Err(RaincastError::Parse { line, msg }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("invalid date"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_row_names_line_number() {
        let f = write_csv(
            "lat,lon,date,rain_mm\n25.0,91.0,1901-01-01,4.0\n25.0,not-a-number,1901-01-02,6.0\n",
        );
        match load_daily_csv(f.path()) {
            Err(RaincastError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_point_date_rejected() {
        let f = write_csv(
            "lat,lon,date,rain_mm\n25.0,91.0,1901-01-01,4.0\n25.0,91.0,1901-01-01,5.0\n",
        );
        assert!(matches!(
            load_daily_csv(f.path()),
            Err(RaincastError::Structure(_))
        ));
    }

    #[test]
    fn date_gap_rejected() {
        let f = write_csv(
            "lat,lon,date,rain_mm\n25.0,91.0,1901-01-01,4.0\n25.0,91.0,1901-01-03,6.0\n",
        );
        match load_daily_csv(f.path()) {
            Err(RaincastError::Structure(msg)) => assert!(msg.contains("contiguous")),
            other => panic!("expected structural error, got {other:?}"),
        }
    }

    fn daily_records(days: &[(&str, f64)]) -> DailyRecords {
        DailyRecords {
            points: vec![GridPoint::new(25.0, 91.0)],
            dates: days
                .iter()
                .map(|(d, _)| NaiveDate::parse_from_str(d, "%Y-%m-%d").unwrap())
                .collect(),
            values: vec![days.iter().map(|&(_, v)| v).collect()],
        }
    }

    #[test]
    fn monthly_mean_of_constant_month_is_constant() {
        let days: Vec<(String, f64)> = (1..=31)
            .map(|d| (format!("1901-01-{d:02}"), 3.0))
            .collect();
        let borrowed: Vec<(&str, f64)> = days.iter().map(|(d, v)| (d.as_str(), *v)).collect();
        let grid = monthly_average(&daily_records(&borrowed)).unwrap();
        assert_eq!(grid.months, vec![YearMonth::new(1901, 1)]);
        // mm/day mean, not a monthly total: 3.0, not 93.0.
        assert_eq!(grid.values[0][0], 3.0);
    }

    #[test]
    fn partial_month_mean_of_two_days() {
        let grid =
            monthly_average(&daily_records(&[("1901-01-01", 4.0), ("1901-01-02", 6.0)])).unwrap();
        assert_eq!(grid.values[0][0], 5.0);
    }

    #[test]
    fn missing_days_excluded_from_mean() {
        let grid = monthly_average(&daily_records(&[
            ("1901-01-01", 4.0),
            ("1901-01-02", MISSING),
            ("1901-01-03", 8.0),
        ]))
        .unwrap();
        assert_eq!(grid.values[0][0], 6.0);
    }

    #[test]
    fn month_with_no_usable_days_is_missing_data_error() {
        let result = monthly_average(&daily_records(&[
            ("1901-01-31", MISSING),
            ("1901-02-01", 2.0),
        ]));
        match result {
            Err(RaincastError::MissingData { year, month, .. }) => {
                assert_eq!((year, month), (1901, 1));
            }
            other => panic!("expected missing-data error, got {other:?}"),
        }
    }

    #[test]
    fn sinusoid_year_matches_straight_loop_oracle() {
        // 365 days of a synthetic sinusoid; oracle is an independent
        // per-month accumulation loop.
        let start = NaiveDate::from_ymd_opt(1950, 1, 1).unwrap();
        let dates: Vec<NaiveDate> = (0..365)
            .map(|d| start.checked_add_days(Days::new(d)).unwrap())
            .collect();
        let values: Vec<f64> = (0..365)
            .map(|d| 5.0 + 4.0 * (2.0 * std::f64::consts::PI * d as f64 / 365.0).sin())
            .collect();

        let mut ora_sum = [0.0f64; 12];
        let mut ora_cnt = [0usize; 12];
        for (date, v) in dates.iter().zip(&values) {
            let m = date.month0() as usize;
            ora_sum[m] += v;
            ora_cnt[m] += 1;
        }

        let records = DailyRecords {
            points: vec![GridPoint::new(25.0, 91.0)],
            dates,
            values: vec![values],
        };
        let grid = monthly_average(&records).unwrap();
        assert_eq!(grid.months.len(), 12);
        for m in 0..12 {
            let expected = ora_sum[m] / ora_cnt[m] as f64;
            assert!((grid.values[0][m] - expected).abs() < 1e-12);
        }
    }

    fn three_point_grid() -> RainfallGrid {
        RainfallGrid {
            points: vec![
                GridPoint::new(22.0, 90.0),
                GridPoint::new(26.0, 91.75),
                GridPoint::new(29.5, 97.5),
            ],
            months: vec![YearMonth::new(2000, 1), YearMonth::new(2000, 2)],
            values: vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]],
        }
    }

    #[test]
    fn select_region_keeps_closed_box() {
        let grid = three_point_grid();
        let bbox = BoundingBox::new(25.0, 30.0, 91.0, 98.0).unwrap();
        let selected = select_region(&grid, &bbox).unwrap();
        assert_eq!(selected.n_points(), 2);
        assert_eq!(selected.months, grid.months);
    }

    #[test]
    fn select_region_covering_all_is_identity() {
        let grid = three_point_grid();
        let bbox = BoundingBox::new(0.0, 90.0, 0.0, 180.0).unwrap();
        let selected = select_region(&grid, &bbox).unwrap();
        assert_eq!(selected.n_points(), grid.n_points());
        assert_eq!(selected.values, grid.values);
    }

    #[test]
    fn select_region_idempotent() {
        let grid = three_point_grid();
        let bbox = BoundingBox::new(25.0, 30.0, 91.0, 98.0).unwrap();
        let once = select_region(&grid, &bbox).unwrap();
        let twice = select_region(&once, &bbox).unwrap();
        assert_eq!(once.points, twice.points);
        assert_eq!(once.values, twice.values);
    }

    #[test]
    fn select_region_empty_is_error() {
        let grid = three_point_grid();
        let bbox = BoundingBox::new(-10.0, -5.0, 0.0, 5.0).unwrap();
        assert!(matches!(
            select_region(&grid, &bbox),
            Err(RaincastError::EmptySelection(_))
        ));
    }

    #[test]
    fn select_point_returns_row_verbatim() {
        let grid = three_point_grid();
        let series = select_point(&grid, 26.0, 91.75).unwrap();
        assert_eq!(series.values, vec![3.0, 4.0]);
        assert_eq!(series.months, grid.months);
    }

    #[test]
    fn select_point_missing_suggests_nearest() {
        let grid = three_point_grid();
        // Nearest by brute-force Euclidean degrees is (26.0, 91.75).
        let wanted = GridPoint::new(26.11, 91.69);
        let brute_nearest = grid
            .points
            .iter()
            .min_by(|a, b| a.distance_deg(&wanted).total_cmp(&b.distance_deg(&wanted)))
            .unwrap();
        match select_point(&grid, 26.11, 91.69) {
            Err(RaincastError::PointNotFound {
                nearest_lat,
                nearest_lon,
                ..
            }) => {
                assert_eq!(nearest_lat, brute_nearest.lat);
                assert_eq!(nearest_lon, brute_nearest.lon);
            }
            other => panic!("expected not-found error, got {other:?}"),
        }
    }

    #[test]
    fn select_point_single_point_grid() {
        let grid = RainfallGrid {
            points: vec![GridPoint::new(25.0, 91.0)],
            months: vec![YearMonth::new(2000, 1)],
            values: vec![vec![7.5]],
        };
        let series = select_point(&grid, 25.0, 91.0).unwrap();
        assert_eq!(series.values, vec![7.5]);
    }

    #[test]
    fn monthly_csv_round_trip() {
        let grid = three_point_grid();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("monthly.csv");
        grid.write_monthly_csv(&path).unwrap();
        let back = RainfallGrid::read_monthly_csv(&path).unwrap();
        assert_eq!(back.points, grid.points);
        assert_eq!(back.months, grid.months);
        assert_eq!(back.values, grid.values);
    }

    #[test]
    fn monthly_average_permutation_invariant_within_month() {
        let forward = daily_records(&[
            ("1901-01-01", 1.0),
            ("1901-01-02", 7.0),
            ("1901-01-03", 4.0),
        ]);
        let mut shuffled = forward.clone();
        shuffled.values[0] = vec![4.0, 1.0, 7.0]; // same multiset, different days
        let a = monthly_average(&forward).unwrap();
        let b = monthly_average(&shuffled).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn year_month_axis_helpers() {
        assert_eq!(YearMonth::new(1999, 12).succ(), YearMonth::new(2000, 1));
        assert_eq!(
            YearMonth::new(2001, 3).months_since(YearMonth::new(2000, 1)),
            14
        );
        assert_eq!(YearMonth::parse("1985-07"), Some(YearMonth::new(1985, 7)));
        assert_eq!(YearMonth::new(1985, 7).to_string(), "1985-07");
    }
}
