//! Snapshot matrices, normalization, windowing, and chronological splits.

use std::path::Path;

use faer::Mat;

use crate::error::{RaincastError, Result};
use crate::ingest::{GridPoint, RainfallGrid, YearMonth};

/// State snapshots for DMD: rows are grid points, columns are consecutive
/// months in chronological order.
#[derive(Debug, Clone)]
pub struct SnapshotMatrix {
    pub data: Mat<f64>,
    pub points: Vec<GridPoint>,
    pub months: Vec<YearMonth>,
}

impl SnapshotMatrix {
    pub fn n_points(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_snapshots(&self) -> usize {
        self.data.ncols()
    }

    /// Serialize as CSV: first column a `lat:lon` row label, then one
    /// `YYYY-MM` column per snapshot.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut writer = csv::Writer::from_path(path.as_ref())?;
        let mut header = vec!["point".to_string()];
        header.extend(self.months.iter().map(|m| m.to_string()));
        writer.write_record(&header)?;
        for (i, point) in self.points.iter().enumerate() {
            let mut row = vec![point.to_string()];
            row.extend((0..self.n_snapshots()).map(|j| self.data[(i, j)].to_string()));
            writer.write_record(&row)?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Read a CSV written by [`SnapshotMatrix::write_csv`].
    pub fn read_csv(path: impl AsRef<Path>) -> Result<SnapshotMatrix> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path.as_ref())?;
        let months: Vec<YearMonth> = reader
            .headers()?
            .iter()
            .skip(1)
            .map(|h| {
                YearMonth::parse(h).ok_or_else(|| {
                    RaincastError::Structure(format!("bad month header `{h}`"))
                })
            })
            .collect::<Result<_>>()?;
        if months.is_empty() {
            return Err(RaincastError::Structure("no snapshot columns".into()));
        }

        let mut points = Vec::new();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut record = csv::StringRecord::new();
        while reader.read_record(&mut record)? {
            let line = record.position().map_or(0, |p| p.line());
            let label = record.get(0).unwrap_or_default();
            let (lat, lon) = label
                .split_once(':')
                .and_then(|(a, b)| Some((a.parse::<f64>().ok()?, b.parse::<f64>().ok()?)))
                .ok_or_else(|| RaincastError::Parse {
                    line,
                    msg: format!("bad point label `{label}`"),
                })?;
            points.push(GridPoint::new(lat, lon));
            let row: Vec<f64> = record
                .iter()
                .skip(1)
                .map(|v| {
                    v.parse::<f64>().map_err(|e| RaincastError::Parse {
                        line,
                        msg: format!("bad value: {e}"),
                    })
                })
                .collect::<Result<_>>()?;
            if row.len() != months.len() {
                return Err(RaincastError::Structure(format!(
                    "row for {label} has {} values for {} months",
                    row.len(),
                    months.len()
                )));
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(RaincastError::Structure("no records".into()));
        }
        let data = Mat::from_fn(rows.len(), months.len(), |i, j| rows[i][j]);
        Ok(SnapshotMatrix {
            data,
            points,
            months,
        })
    }
}

/// Build the snapshot matrix for Jan(start_year)..=Dec(stop_year).
///
/// The year interval is inclusive, so a "10 years of data" window such as
/// 2005-2015 yields 12 x 11 = 132 monthly snapshots.
pub fn build_snapshot_matrix(
    grid: &RainfallGrid,
    start_year: i32,
    stop_year: i32,
) -> Result<SnapshotMatrix> {
    if start_year > stop_year {
        return Err(RaincastError::Range(format!(
            "start year {start_year} is after stop year {stop_year}"
        )));
    }
    let first = YearMonth::new(start_year, 1);
    let last = YearMonth::new(stop_year, 12);
    let origin = *grid.months.first().ok_or_else(|| {
        RaincastError::Structure("grid has no months".into())
    })?;
    let offset = first.months_since(origin);
    let m = 12 * (stop_year - start_year + 1) as usize;
    if offset < 0 || offset as usize + m > grid.months.len() {
        return Err(RaincastError::Range(format!(
            "requested {first}..{last} outside grid coverage {}..{}",
            origin,
            grid.months.last().unwrap()
        )));
    }
    let offset = offset as usize;

    for (i, row) in grid.values.iter().enumerate() {
        if let Some(k) = row[offset..offset + m].iter().position(|v| !v.is_finite()) {
            let ym = grid.months[offset + k];
            return Err(RaincastError::MissingData {
                lat: grid.points[i].lat,
                lon: grid.points[i].lon,
                year: ym.year,
                month: ym.month,
            });
        }
    }

    let data = Mat::from_fn(grid.n_points(), m, |i, j| grid.values[i][offset + j]);
    Ok(SnapshotMatrix {
        data,
        points: grid.points.clone(),
        months: grid.months[offset..offset + m].to_vec(),
    })
}

/// Min-max scaler fitted on a training prefix only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalizer {
    pub min: f64,
    pub max: f64,
}

impl Normalizer {
    /// Map a value into normalized space; values outside [min, max] map
    /// outside [0, 1] (no clipping).
    pub fn transform(&self, x: f64) -> f64 {
        (x - self.min) / (self.max - self.min)
    }

    pub fn inverse(&self, y: f64) -> f64 {
        y * (self.max - self.min) + self.min
    }
}

/// Fit min/max over the first `floor(train_fraction * len)` elements.
pub fn fit_normalizer(series: &[f64], train_fraction: f64) -> Result<Normalizer> {
    if series.len() < 2 {
        return Err(RaincastError::InsufficientData {
            len: series.len(),
            needed: 2,
        });
    }
    if !(train_fraction > 0.0 && train_fraction <= 1.0) {
        return Err(RaincastError::Param(format!(
            "train_fraction must be in (0, 1], got {train_fraction}"
        )));
    }
    let prefix_len = (train_fraction * series.len() as f64).floor() as usize;
    if prefix_len < 2 {
        return Err(RaincastError::Param(format!(
            "training prefix of {prefix_len} element(s) cannot define a scale"
        )));
    }
    let prefix = &series[..prefix_len];
    let min = prefix.iter().copied().fold(f64::INFINITY, f64::min);
    let max = prefix.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = max > min; // false for NaN-polluted prefixes as well
    if !spread {
        return Err(RaincastError::DegenerateScale { value: min });
    }
    Ok(Normalizer { min, max })
}

pub fn normalize(norm: &Normalizer, series: &[f64]) -> Vec<f64> {
    series.iter().map(|&x| norm.transform(x)).collect()
}

pub fn denormalize(norm: &Normalizer, series: &[f64]) -> Vec<f64> {
    series.iter().map(|&y| norm.inverse(y)).collect()
}

/// Stride-1 sliding windows over a series: `inputs[i]` covers
/// `series[i..i+W]` and `targets[i]` covers `series[i+W..i+W+H]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedDataset {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
    pub input_window: usize,
    pub output_window: usize,
}

impl WindowedDataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// Generate sliding windows; a series of length L yields L - W - H + 1
/// samples.
pub fn make_windows(series: &[f64], input_window: usize, output_window: usize) -> Result<WindowedDataset> {
    if input_window == 0 || output_window == 0 {
        return Err(RaincastError::Param(
            "window sizes must be positive".into(),
        ));
    }
    let needed = input_window + output_window;
    if series.len() < needed {
        return Err(RaincastError::InsufficientData {
            len: series.len(),
            needed,
        });
    }
    let count = series.len() - needed + 1;
    let mut inputs = Vec::with_capacity(count);
    let mut targets = Vec::with_capacity(count);
    for i in 0..count {
        inputs.push(series[i..i + input_window].to_vec());
        targets.push(series[i + input_window..i + needed].to_vec());
    }
    Ok(WindowedDataset {
        inputs,
        targets,
        input_window,
        output_window,
    })
}

/// Chronological split: the first `floor(train_fraction * len)` samples
/// form the training set, the remainder the test set.
pub fn split_train_test(
    dataset: &WindowedDataset,
    train_fraction: f64,
) -> Result<(WindowedDataset, WindowedDataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(RaincastError::Param(format!(
            "train_fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let n = dataset.len();
    let n_train = (train_fraction * n as f64).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(RaincastError::Split(format!(
            "{n} sample(s) at fraction {train_fraction} leave one side empty"
        )));
    }
    let part = |range: std::ops::Range<usize>| WindowedDataset {
        inputs: dataset.inputs[range.clone()].to_vec(),
        targets: dataset.targets[range].to_vec(),
        input_window: dataset.input_window,
        output_window: dataset.output_window,
    };
    Ok((part(0..n_train), part(n_train..n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::MISSING;
    use proptest::prelude::*;

    fn grid_for_years(start: i32, stop: i32, n_points: usize) -> RainfallGrid {
        let mut months = Vec::new();
        let mut ym = YearMonth::new(start, 1);
        let end = YearMonth::new(stop, 12);
        while ym <= end {
            months.push(ym);
            ym = ym.succ();
        }
        let values = (0..n_points)
            .map(|i| (0..months.len()).map(|j| (i * 100 + j) as f64).collect())
            .collect();
        RainfallGrid {
            points: (0..n_points)
                .map(|i| GridPoint::new(20.0 + i as f64 * 0.25, 90.0))
                .collect(),
            months,
            values,
        }
    }

    #[test]
    fn snapshot_matrix_inclusive_year_interval() {
        let grid = grid_for_years(2000, 2020, 3);
        let snap = build_snapshot_matrix(&grid, 2005, 2015).unwrap();
        // Inclusive interval: 11 years -> 132 columns.
        assert_eq!(snap.n_snapshots(), 132);
        assert_eq!(snap.n_points(), 3);
        assert_eq!(snap.months[0], YearMonth::new(2005, 1));
        assert_eq!(*snap.months.last().unwrap(), YearMonth::new(2015, 12));
    }

    #[test]
    fn snapshot_matrix_single_year() {
        let grid = grid_for_years(1950, 1950, 2);
        let snap = build_snapshot_matrix(&grid, 1950, 1950).unwrap();
        assert_eq!(snap.n_snapshots(), 12);
    }

    #[test]
    fn snapshot_matrix_inverted_range() {
        let grid = grid_for_years(2000, 2020, 2);
        assert!(matches!(
            build_snapshot_matrix(&grid, 2015, 2005),
            Err(RaincastError::Range(_))
        ));
    }

    #[test]
    fn snapshot_matrix_outside_coverage() {
        let grid = grid_for_years(2000, 2010, 2);
        assert!(matches!(
            build_snapshot_matrix(&grid, 2005, 2011),
            Err(RaincastError::Range(_))
        ));
        assert!(matches!(
            build_snapshot_matrix(&grid, 1999, 2005),
            Err(RaincastError::Range(_))
        ));
    }

    #[test]
    fn snapshot_matrix_rejects_missing_cells() {
        let mut grid = grid_for_years(2000, 2001, 1);
        grid.values[0][13] = MISSING;
        assert!(matches!(
            build_snapshot_matrix(&grid, 2000, 2001),
            Err(RaincastError::MissingData { year: 2001, month: 2, .. })
        ));
    }

    #[test]
    fn snapshot_csv_round_trip() {
        let grid = grid_for_years(2000, 2000, 2);
        let snap = build_snapshot_matrix(&grid, 2000, 2000).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.csv");
        snap.write_csv(&path).unwrap();
        let back = SnapshotMatrix::read_csv(&path).unwrap();
        assert_eq!(back.months, snap.months);
        assert_eq!(back.points, snap.points);
        for i in 0..snap.n_points() {
            for j in 0..snap.n_snapshots() {
                assert_eq!(back.data[(i, j)], snap.data[(i, j)]);
            }
        }
    }

    #[test]
    fn normalizer_prefix_extrema() {
        let norm = fit_normalizer(&[0.0, 5.0, 10.0, 100.0], 0.75).unwrap();
        assert_eq!(norm.min, 0.0);
        assert_eq!(norm.max, 10.0);
    }

    #[test]
    fn normalizer_constant_prefix_degenerate() {
        assert!(matches!(
            fit_normalizer(&[2.0, 2.0, 2.0, 9.0], 0.75),
            Err(RaincastError::DegenerateScale { .. })
        ));
    }

    #[test]
    fn normalizer_full_series_fit() {
        let series: Vec<f64> = (0..=10).map(f64::from).collect();
        let norm = fit_normalizer(&series, 1.0).unwrap();
        assert_eq!(norm.min, 0.0);
        assert_eq!(norm.max, 10.0);
    }

    #[test]
    fn normalize_maps_linearly_without_clipping() {
        let norm = Normalizer { min: 0.0, max: 10.0 };
        assert_eq!(normalize(&norm, &[0.0, 5.0, 10.0]), vec![0.0, 0.5, 1.0]);
        assert_eq!(norm.transform(20.0), 2.0);
    }

    #[test]
    fn denormalize_known_values() {
        let norm = Normalizer { min: 2.0, max: 4.0 };
        assert_eq!(norm.inverse(0.5), 3.0);
        assert_eq!(norm.inverse(0.0), 2.0);
        assert_eq!(norm.inverse(1.0), 4.0);
    }

    #[test]
    fn windows_enumerated_for_l5_w2_h1() {
        let series = [1.0, 2.0, 3.0, 4.0, 5.0];
        let ds = make_windows(&series, 2, 1).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.inputs, vec![vec![1.0, 2.0], vec![2.0, 3.0], vec![3.0, 4.0]]);
        assert_eq!(ds.targets, vec![vec![3.0], vec![4.0], vec![5.0]]);
    }

    #[test]
    fn windows_boundary_single_sample() {
        let series: Vec<f64> = (0..14).map(f64::from).collect();
        let ds = make_windows(&series, 13, 1).unwrap();
        assert_eq!(ds.len(), 1);
    }

    #[test]
    fn windows_insufficient_data() {
        let series: Vec<f64> = (0..13).map(f64::from).collect();
        assert!(matches!(
            make_windows(&series, 13, 1),
            Err(RaincastError::InsufficientData { len: 13, needed: 14 })
        ));
    }

    #[test]
    fn split_80_20() {
        let series: Vec<f64> = (0..12).map(f64::from).collect();
        let ds = make_windows(&series, 2, 1).unwrap();
        assert_eq!(ds.len(), 10);
        let (train, test) = split_train_test(&ds, 0.8).unwrap();
        assert_eq!(train.len(), 8);
        assert_eq!(test.len(), 2);
    }

    #[test]
    fn split_two_samples_in_half() {
        let series = [1.0, 2.0, 3.0, 4.0];
        let ds = make_windows(&series, 2, 1).unwrap();
        assert_eq!(ds.len(), 2);
        let (train, test) = split_train_test(&ds, 0.5).unwrap();
        assert_eq!((train.len(), test.len()), (1, 1));
    }

    #[test]
    fn split_single_sample_errors() {
        let series = [1.0, 2.0, 3.0];
        let ds = make_windows(&series, 2, 1).unwrap();
        assert_eq!(ds.len(), 1);
        assert!(matches!(
            split_train_test(&ds, 0.8),
            Err(RaincastError::Split(_))
        ));
    }

    #[test]
    fn split_has_no_target_leakage() {
        let series: Vec<f64> = (0..40).map(f64::from).collect();
        let w = 3;
        let ds = make_windows(&series, w, 1).unwrap();
        let (train, test) = split_train_test(&ds, 0.8).unwrap();
        // Indices are recoverable from the values because the series is 0..40.
        let max_train_index = train
            .inputs
            .iter()
            .zip(&train.targets)
            .flat_map(|(i, t)| i.iter().chain(t.iter()))
            .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let min_test_target = test
            .targets
            .iter()
            .flat_map(|t| t.iter())
            .fold(f64::INFINITY, |a, &b| a.min(b));
        assert!(max_train_index < min_test_target);
    }

    proptest! {
        #[test]
        fn windowing_targets_reproduce_series_tail(
            series in proptest::collection::vec(-1e3f64..1e3, 6..60),
            w in 1usize..5,
        ) {
            let h = 1usize;
            prop_assume!(series.len() >= w + h);
            let ds = make_windows(&series, w, h).unwrap();
            prop_assert_eq!(ds.len(), series.len() - w - h + 1);
            let flat: Vec<f64> = ds.targets.iter().flatten().copied().collect();
            prop_assert_eq!(&flat[..], &series[w..]);
        }

        #[test]
        fn normalize_round_trips(
            series in proptest::collection::vec(-1e6f64..1e6, 4..50),
        ) {
            prop_assume!(series.len() >= 4);
            let norm = match fit_normalizer(&series, 0.5) {
                Ok(n) => n,
                Err(_) => return Ok(()), // constant prefix
            };
            let there = normalize(&norm, &series);
            let back = denormalize(&norm, &there);
            // Round-trip error scales with the magnitudes involved, both
            // the value and the fitted bounds.
            let scale = norm.min.abs().max(norm.max.abs()).max(1.0);
            for (orig, restored) in series.iter().zip(&back) {
                prop_assert!((orig - restored).abs() <= 1e-12 * orig.abs().max(scale));
            }
        }

        #[test]
        fn refit_on_same_prefix_is_idempotent(
            series in proptest::collection::vec(0f64..100.0, 5..40),
        ) {
            let first = match fit_normalizer(&series, 0.8) {
                Ok(n) => n,
                Err(_) => return Ok(()),
            };
            let second = fit_normalizer(&series, 0.8).unwrap();
            prop_assert_eq!(first, second);
        }
    }
}
