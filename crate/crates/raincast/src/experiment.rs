//! Experiment runner: the DMD year/rank grid and the 12-cell
//! optimizer/window/dropout grid, with result tables, plot-ready CSVs, and
//! run manifests that make every table regenerable bit for bit.

use std::path::{Path, PathBuf};
use std::time::Instant;

use faer::Mat;
use sha2::{Digest, Sha256};

use crate::dmd::{dmd_fit, dmd_forecast};
use crate::error::{RaincastError, Result};
use crate::ingest::{select_point, GridPoint, MonthlySeries, RainfallGrid, YearMonth};
use crate::metrics::{evaluate_grid, evaluate_series, Units};
use crate::nn::{train, LstmRegressor, OptimizerKind, TrainConfig};
use crate::preprocess::{
    build_snapshot_matrix, fit_normalizer, make_windows, normalize, split_train_test,
};
use crate::synth::{gen_linear_system, LinearSystemSpec};

/// Forecast horizon of the DMD experiments, months.
pub const DMD_FORECAST_MONTHS: usize = 12;

/// One DMD experiment: fit on Jan(start)..Dec(stop) inclusive at the given
/// projection rank, forecast the following year.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DmdTriple {
    pub start_year: i32,
    pub stop_year: i32,
    pub rank: usize,
}

/// The seven built-in year/rank configurations.
pub fn default_dmd_triples() -> Vec<DmdTriple> {
    [
        (1929, 1939, 106),
        (1941, 1951, 123),
        (1954, 1964, 127),
        (1973, 1983, 128),
        (1995, 2005, 118),
        (2000, 2010, 100),
        (2005, 2015, 123),
    ]
    .into_iter()
    .map(|(start_year, stop_year, rank)| DmdTriple {
        start_year,
        stop_year,
        rank,
    })
    .collect()
}

/// Where the experiment data comes from.
#[derive(Debug, Clone)]
pub enum DmdDataSource {
    /// A monthly CSV produced by the ingest pipeline.
    MonthlyCsv(PathBuf),
    /// An already-loaded grid.
    Grid(RainfallGrid),
    /// A synthetic linear system; its state values may be negative, so
    /// clamping is disabled for this source by default.
    LinearSystem(LinearSystemSpec),
}

impl DmdDataSource {
    pub fn load(&self) -> Result<RainfallGrid> {
        match self {
            DmdDataSource::MonthlyCsv(path) => RainfallGrid::read_monthly_csv(path),
            DmdDataSource::Grid(grid) => Ok(grid.clone()),
            DmdDataSource::LinearSystem(spec) => {
                let system = gen_linear_system(spec)?;
                let snapshots = system.snapshots;
                let values = (0..snapshots.data.nrows())
                    .map(|i| {
                        (0..snapshots.data.ncols())
                            .map(|j| snapshots.data[(i, j)])
                            .collect()
                    })
                    .collect();
                Ok(RainfallGrid {
                    points: snapshots.points,
                    months: snapshots.months,
                    values,
                })
            }
        }
    }

    fn label(&self) -> String {
        match self {
            DmdDataSource::MonthlyCsv(path) => format!("csv:{}", path.display()),
            DmdDataSource::Grid(_) => "grid:in-memory".into(),
            DmdDataSource::LinearSystem(spec) => {
                format!("synthetic:linear dim={} seed={}", spec.dim, spec.seed)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct DmdExperimentSpec {
    pub source: DmdDataSource,
    pub runs: Vec<DmdTriple>,
    /// Clamp negative forecast values to zero before evaluation
    /// (reporting-layer post-processing; the fitted model is untouched).
    pub clamp_negative: bool,
    pub seed: u64,
}

impl DmdExperimentSpec {
    pub fn new(source: DmdDataSource, runs: Vec<DmdTriple>) -> Self {
        let clamp_negative = !matches!(source, DmdDataSource::LinearSystem(_));
        Self {
            source,
            runs,
            clamp_negative,
            seed: 0,
        }
    }
}

/// Config echo carried by every result row.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigEcho {
    Dmd {
        start_year: i32,
        stop_year: i32,
        rank: usize,
    },
    Dl {
        optimizer: OptimizerKind,
        input_window: usize,
        output_window: usize,
        dropout: f64,
    },
}

impl std::fmt::Display for ConfigEcho {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigEcho::Dmd {
                start_year,
                stop_year,
                rank,
            } => write!(f, "dmd start={start_year} stop={stop_year} rank={rank}"),
            ConfigEcho::Dl {
                optimizer,
                input_window,
                output_window,
                dropout,
            } => write!(
                f,
                "dl optimizer={optimizer} window={input_window}/{output_window} dropout={dropout}"
            ),
        }
    }
}

/// One row of a results table.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ConfigEcho,
    pub mae: f64,
    pub rmse: f64,
    pub runtime_secs: f64,
    pub seed: u64,
    pub units: Units,
}

/// Truth/prediction matrices behind one DMD row, for plot emission.
#[derive(Debug, Clone)]
pub struct DmdRunDetail {
    pub points: Vec<GridPoint>,
    /// Months of the forecast year.
    pub months: Vec<YearMonth>,
    pub truth: Mat<f64>,
    pub pred: Mat<f64>,
}

#[derive(Debug)]
pub struct DmdReport {
    pub results: Vec<(ExperimentResult, DmdRunDetail)>,
    /// Triples that failed, with the error message; valid rows still run.
    pub failures: Vec<(DmdTriple, String)>,
}

/// Zero out negative entries. Rainfall non-negativity is a domain
/// constraint applied here, in the reporting layer, never inside the
/// fitted model.
pub fn clamp_nonnegative(m: &mut Mat<f64>) {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if m[(i, j)] < 0.0 {
                m[(i, j)] = 0.0;
            }
        }
    }
}

/// Run every triple: build the snapshot window, fit at the given rank,
/// forecast twelve months, evaluate against the held-out year in mm/day.
pub fn run_dmd_experiments(spec: &DmdExperimentSpec) -> Result<DmdReport> {
    let grid = spec.source.load()?;
    let mut results = Vec::new();
    let mut failures = Vec::new();

    for triple in &spec.runs {
        match run_dmd_triple(&grid, triple, spec.clamp_negative, spec.seed) {
            Ok(row) => results.push(row),
            Err(err) => failures.push((*triple, err.to_string())),
        }
    }
    Ok(DmdReport { results, failures })
}

fn run_dmd_triple(
    grid: &RainfallGrid,
    triple: &DmdTriple,
    clamp: bool,
    seed: u64,
) -> Result<(ExperimentResult, DmdRunDetail)> {
    let started = Instant::now();
    let months_in_window = 12 * (triple.stop_year - triple.start_year + 1).max(0) as usize;
    if months_in_window > 0 && triple.rank > months_in_window - 1 {
        return Err(RaincastError::Rank {
            rank: triple.rank,
            max: months_in_window - 1,
        });
    }

    let snapshots = build_snapshot_matrix(grid, triple.start_year, triple.stop_year)?;

    // Held-out truth: the twelve months following the window.
    let forecast_year = triple.stop_year + 1;
    let origin = grid.months[0];
    let offset = YearMonth::new(forecast_year, 1).months_since(origin);
    if offset < 0 || offset as usize + DMD_FORECAST_MONTHS > grid.months.len() {
        return Err(RaincastError::Range(format!(
            "forecast year {forecast_year} not covered by the data"
        )));
    }
    let offset = offset as usize;
    let truth = Mat::from_fn(grid.n_points(), DMD_FORECAST_MONTHS, |i, j| {
        grid.values[i][offset + j]
    });

    let model = dmd_fit(&snapshots, triple.rank)?;
    let mut pred = dmd_forecast(&model, DMD_FORECAST_MONTHS)?;
    if clamp {
        clamp_nonnegative(&mut pred);
    }

    let report = evaluate_grid(truth.as_ref(), pred.as_ref(), Units::MmPerDay)?;
    let result = ExperimentResult {
        config: ConfigEcho::Dmd {
            start_year: triple.start_year,
            stop_year: triple.stop_year,
            rank: triple.rank,
        },
        mae: report.mae,
        rmse: report.rmse,
        runtime_secs: started.elapsed().as_secs_f64(),
        seed,
        units: Units::MmPerDay,
    };
    let detail = DmdRunDetail {
        points: grid.points.clone(),
        months: grid.months[offset..offset + DMD_FORECAST_MONTHS].to_vec(),
        truth,
        pred,
    };
    Ok((result, detail))
}

/// The 12-cell deep-learning grid for one location.
#[derive(Debug, Clone)]
pub struct DlExperimentSpec {
    pub location: GridPoint,
    pub optimizers: Vec<OptimizerKind>,
    pub input_windows: Vec<usize>,
    pub output_window: usize,
    pub dropouts: Vec<f64>,
    pub epochs: usize,
    pub batch_size: usize,
    pub hidden: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub train_fraction: f64,
    pub seed: u64,
}

impl DlExperimentSpec {
    /// The default grid: {AdamW, Nadam} x {13, 14, 15} x
    /// {0, 0.2}, 64 hidden units, learning rate 0.01, 80-20 split.
    pub fn for_location(location: GridPoint) -> Self {
        Self {
            location,
            optimizers: vec![OptimizerKind::AdamW, OptimizerKind::Nadam],
            input_windows: vec![13, 14, 15],
            output_window: 1,
            dropouts: vec![0.0, 0.2],
            epochs: 100,
            batch_size: 32,
            hidden: 64,
            learning_rate: 0.01,
            weight_decay: 0.01,
            train_fraction: 0.8,
            seed: 0,
        }
    }
}

/// Per-cell evaluation data behind one DL row.
#[derive(Debug, Clone)]
pub struct DlCellDetail {
    /// Months of the test targets.
    pub months: Vec<YearMonth>,
    /// Normalized test targets.
    pub truth: Vec<f64>,
    /// Normalized model predictions.
    pub pred: Vec<f64>,
    pub loss_history: Vec<f64>,
    /// Test RMSE/MAE of the constant train-mean predictor.
    pub baseline_rmse: f64,
    pub baseline_mae: f64,
}

#[derive(Debug)]
pub struct DlReport {
    pub results: Vec<(ExperimentResult, DlCellDetail)>,
    /// Index of the lowest-MAE row.
    pub best_mae: usize,
    /// Index of the lowest-RMSE row.
    pub best_rmse: usize,
}

/// Resolve the location on the grid, then run the cell grid on its series.
pub fn run_dl_experiments(grid: &RainfallGrid, spec: &DlExperimentSpec) -> Result<DlReport> {
    let series = select_point(grid, spec.location.lat, spec.location.lon)?;
    run_dl_experiments_on_series(&series, spec)
}

/// Run every cell of the grid on a monthly series: normalize (train-fit),
/// window, split chronologically, train, evaluate normalized MAE/RMSE on
/// the test split. The report flags the argmin-MAE and argmin-RMSE rows.
pub fn run_dl_experiments_on_series(
    series: &MonthlySeries,
    spec: &DlExperimentSpec,
) -> Result<DlReport> {
    let max_window = spec.input_windows.iter().copied().max().unwrap_or(0);
    if max_window == 0 || spec.optimizers.is_empty() || spec.dropouts.is_empty() {
        return Err(RaincastError::Param("experiment grid is empty".into()));
    }
    let needed = max_window + spec.output_window + 5;
    if series.values.len() < needed {
        return Err(RaincastError::InsufficientData {
            len: series.values.len(),
            needed,
        });
    }

    let mut results = Vec::new();
    for &optimizer in &spec.optimizers {
        for &input_window in &spec.input_windows {
            for &dropout in &spec.dropouts {
                let row = run_dl_cell(series, spec, optimizer, input_window, dropout)?;
                results.push(row);
            }
        }
    }

    let best_mae = argmin(results.iter().map(|(r, _)| r.mae));
    let best_rmse = argmin(results.iter().map(|(r, _)| r.rmse));
    Ok(DlReport {
        results,
        best_mae,
        best_rmse,
    })
}

fn argmin(values: impl Iterator<Item = f64>) -> usize {
    values
        .enumerate()
        .min_by(|(_, a), (_, b)| a.total_cmp(b))
        .map(|(i, _)| i)
        .expect("at least one cell")
}

fn run_dl_cell(
    series: &MonthlySeries,
    spec: &DlExperimentSpec,
    optimizer: OptimizerKind,
    input_window: usize,
    dropout: f64,
) -> Result<(ExperimentResult, DlCellDetail)> {
    let started = Instant::now();

    let normalizer = fit_normalizer(&series.values, spec.train_fraction)?;
    let normalized = normalize(&normalizer, &series.values);
    let windows = make_windows(&normalized, input_window, spec.output_window)?;
    let (train_set, test_set) = split_train_test(&windows, spec.train_fraction)?;

    let cfg = TrainConfig {
        epochs: spec.epochs,
        batch_size: spec.batch_size,
        seed: spec.seed,
        optimizer,
        learning_rate: spec.learning_rate,
        weight_decay: spec.weight_decay,
        dropout_rate: dropout,
        input_window,
        output_window: spec.output_window,
        hidden: spec.hidden,
    };
    let mut model = LstmRegressor::new(spec.hidden, input_window, dropout, spec.seed)?;
    let loss_history = train(&mut model, &train_set, &cfg)?;

    let truth: Vec<f64> = test_set.targets.iter().map(|t| t[0]).collect();
    let pred: Vec<f64> = test_set
        .inputs
        .iter()
        .map(|window| model.predict(window))
        .collect::<Result<_>>()?;
    let report = evaluate_series(&truth, &pred, Units::Normalized)?;

    // Constant train-mean predictor as the reference baseline.
    let train_mean = train_set
        .targets
        .iter()
        .map(|t| t[0])
        .sum::<f64>()
        / train_set.len() as f64;
    let baseline: Vec<f64> = vec![train_mean; truth.len()];
    let baseline_report = evaluate_series(&truth, &baseline, Units::Normalized)?;

    // Test target i sits at series index n_train + i + W (H = 1).
    let n_train = train_set.len();
    let months: Vec<YearMonth> = (0..test_set.len())
        .map(|i| series.months[n_train + i + input_window])
        .collect();

    let result = ExperimentResult {
        config: ConfigEcho::Dl {
            optimizer,
            input_window,
            output_window: spec.output_window,
            dropout,
        },
        mae: report.mae,
        rmse: report.rmse,
        runtime_secs: started.elapsed().as_secs_f64(),
        seed: spec.seed,
        units: Units::Normalized,
    };
    let detail = DlCellDetail {
        months,
        truth,
        pred,
        loss_history,
        baseline_rmse: baseline_report.rmse,
        baseline_mae: baseline_report.mae,
    };
    Ok((result, detail))
}

/// Built-in aliases for four north-east India cities, mapping names to
/// the nearest 0.25-degree grid coordinates. These are documented
/// approximations; supply your own table when your dataset differs.
pub fn default_city_aliases() -> Vec<(String, GridPoint)> {
    vec![
        ("agartala".into(), GridPoint::new(23.75, 91.25)),
        ("guwahati".into(), GridPoint::new(26.25, 91.75)),
        ("imphal".into(), GridPoint::new(24.75, 94.0)),
        ("itanagar".into(), GridPoint::new(27.0, 93.5)),
    ]
}

/// Resolve `"lat:lon"` coordinates or a (case-insensitive) alias name.
pub fn resolve_location(text: &str, aliases: &[(String, GridPoint)]) -> Result<GridPoint> {
    if let Some((lat, lon)) = text.split_once(':') {
        if let (Ok(lat), Ok(lon)) = (lat.trim().parse::<f64>(), lon.trim().parse::<f64>()) {
            return Ok(GridPoint::new(lat, lon));
        }
    }
    let lower = text.to_ascii_lowercase();
    aliases
        .iter()
        .find(|(name, _)| name.to_ascii_lowercase() == lower)
        .map(|&(_, point)| point)
        .ok_or_else(|| {
            RaincastError::Param(format!(
                "unknown location `{text}` (expected lat:lon or one of {})",
                aliases
                    .iter()
                    .map(|(n, _)| n.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            ))
        })
}

/// Summary CSV for DMD rows: `start,stop,rank,rmse,mae`.
pub fn write_dmd_results_csv(path: impl AsRef<Path>, rows: &[ExperimentResult]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    writer.write_record(["start", "stop", "rank", "rmse", "mae"])?;
    for row in rows {
        let ConfigEcho::Dmd {
            start_year,
            stop_year,
            rank,
        } = row.config
        else {
            return Err(RaincastError::Structure(
                "non-DMD row in DMD results table".into(),
            ));
        };
        writer.write_record([
            start_year.to_string(),
            stop_year.to_string(),
            rank.to_string(),
            row.rmse.to_string(),
            row.mae.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Summary CSV for DL rows:
/// `optimizer,input_window,output_window,dropout,mae,rmse`.
pub fn write_dl_results_csv(path: impl AsRef<Path>, rows: &[ExperimentResult]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    writer.write_record([
        "optimizer",
        "input_window",
        "output_window",
        "dropout",
        "mae",
        "rmse",
    ])?;
    for row in rows {
        let ConfigEcho::Dl {
            optimizer,
            input_window,
            output_window,
            dropout,
        } = row.config
        else {
            return Err(RaincastError::Structure(
                "non-DL row in DL results table".into(),
            ));
        };
        writer.write_record([
            optimizer.to_string(),
            input_window.to_string(),
            output_window.to_string(),
            dropout.to_string(),
            row.mae.to_string(),
            row.rmse.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

fn plot_file_name(prefix: &str, point: &GridPoint) -> String {
    format!("{prefix}_{}_{}.csv", point.lat, point.lon)
}

/// Emit `month,truth,prediction` CSVs for the requested locations of one
/// DMD run; returns the written paths.
pub fn emit_dmd_plot_data(
    dir: impl AsRef<Path>,
    result: &ExperimentResult,
    detail: &DmdRunDetail,
    locations: &[GridPoint],
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let ConfigEcho::Dmd {
        start_year,
        stop_year,
        rank,
    } = result.config
    else {
        return Err(RaincastError::Structure("expected a DMD row".into()));
    };
    let prefix = format!("dmd_{start_year}_{stop_year}_r{rank}");

    let mut written = Vec::new();
    for location in locations {
        let row = detail
            .points
            .iter()
            .position(|p| p.key() == location.key())
            .ok_or_else(|| RaincastError::Param(format!("location {location} not in run")))?;
        let path = dir.join(plot_file_name(&prefix, location));
        let mut writer = csv::Writer::from_path(&path)?;
        writer.write_record(["month", "truth", "prediction"])?;
        for (j, month) in detail.months.iter().enumerate() {
            writer.write_record([
                month.to_string(),
                detail.truth[(row, j)].to_string(),
                detail.pred[(row, j)].to_string(),
            ])?;
        }
        writer.flush()?;
        written.push(path);
    }
    Ok(written)
}

/// Emit the `month,truth,prediction` CSV for one DL cell (normalized
/// space); returns the written path.
pub fn emit_dl_plot_data(
    dir: impl AsRef<Path>,
    result: &ExperimentResult,
    detail: &DlCellDetail,
) -> Result<PathBuf> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let ConfigEcho::Dl {
        optimizer,
        input_window,
        dropout,
        ..
    } = result.config
    else {
        return Err(RaincastError::Structure("expected a DL row".into()));
    };
    let path = dir.join(format!("dl_{optimizer}_w{input_window}_d{dropout}.csv"));
    let mut writer = csv::Writer::from_path(&path)?;
    writer.write_record(["month", "truth", "prediction"])?;
    for ((month, truth), pred) in detail.months.iter().zip(&detail.truth).zip(&detail.pred) {
        writer.write_record([month.to_string(), truth.to_string(), pred.to_string()])?;
    }
    writer.flush()?;
    Ok(path)
}

/// Canonical monthly-CSV bytes of a grid, for hashing.
fn monthly_csv_bytes(grid: &RainfallGrid) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["lat", "lon", "year", "month", "rain_mm_per_day"])?;
    for (point, row) in grid.points.iter().zip(&grid.values) {
        for (ym, v) in grid.months.iter().zip(row) {
            writer.write_record([
                point.lat.to_string(),
                point.lon.to_string(),
                ym.year.to_string(),
                ym.month.to_string(),
                if v.is_finite() { v.to_string() } else { "NA".into() },
            ])?;
        }
    }
    writer
        .into_inner()
        .map_err(|e| RaincastError::Structure(format!("csv buffer error: {e}")))
}

/// SHA-256 of the grid's canonical monthly CSV serialization.
pub fn grid_sha256(grid: &RainfallGrid) -> Result<String> {
    let bytes = monthly_csv_bytes(grid)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Write the manifest that makes a run regenerable: seed, config echo,
/// and the input-data hash.
pub fn write_run_manifest(
    dir: impl AsRef<Path>,
    seed: u64,
    config_summary: &str,
    data_hash: &str,
) -> Result<PathBuf> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let path = dir.join("manifest.txt");
    std::fs::write(
        &path,
        format!("seed = {seed}\nconfig = {config_summary}\ndata_sha256 = {data_hash}\n"),
    )?;
    Ok(path)
}

impl DmdExperimentSpec {
    pub fn summary(&self) -> String {
        let runs: Vec<String> = self
            .runs
            .iter()
            .map(|t| format!("{}-{}/r{}", t.start_year, t.stop_year, t.rank))
            .collect();
        format!(
            "dmd source=[{}] runs=[{}] clamp={} horizon={DMD_FORECAST_MONTHS}",
            self.source.label(),
            runs.join(","),
            self.clamp_negative
        )
    }
}

impl DlExperimentSpec {
    pub fn summary(&self) -> String {
        format!(
            "dl location={} optimizers={:?} windows={:?} H={} dropouts={:?} epochs={} batch={} hidden={} lr={} wd={} split={} seed={}",
            self.location,
            self.optimizers.iter().map(|o| o.to_string()).collect::<Vec<_>>(),
            self.input_windows,
            self.output_window,
            self.dropouts,
            self.epochs,
            self.batch_size,
            self.hidden,
            self.learning_rate,
            self.weight_decay,
            self.train_fraction,
            self.seed
        )
    }
}
