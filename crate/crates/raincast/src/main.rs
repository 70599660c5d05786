//! Thin command-line front end over the library pipelines.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use raincast::config::{merged_aliases, DlConfig, DmdConfig, IngestConfig, SynthConfig};
use raincast::experiment::{
    emit_dl_plot_data, emit_dmd_plot_data, grid_sha256, resolve_location, run_dl_experiments,
    run_dmd_experiments, write_dl_results_csv, write_dmd_results_csv, write_run_manifest,
    DlExperimentSpec, DmdDataSource, DmdExperimentSpec, DmdTriple,
};
use raincast::ingest::{load_daily_csv, monthly_average, select_region, BoundingBox, GridPoint, RainfallGrid};
use raincast::nn::OptimizerKind;
use raincast::synth::{daily_from_monthly, gen_linear_system, gen_seasonal, seasonal_grid, SeasonalSpec};

#[derive(Parser)]
#[command(name = "raincast", version, about = "Rainfall forecasting with DMD and an LSTM regressor")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate a daily rainfall CSV into monthly means, optionally
    /// selecting a lat/lon box.
    Ingest {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Daily CSV (lat,lon,date,rain_mm).
        #[arg(long)]
        data: Option<PathBuf>,
        /// Output directory for monthly.csv.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Bounding box lat_min,lat_max,lon_min,lon_max.
        #[arg(long, value_delimiter = ',')]
        bbox: Option<Vec<f64>>,
    },
    /// Run DMD year/rank experiments against a monthly CSV.
    Dmd {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Override: run a single triple with this rank.
        #[arg(long)]
        rank: Option<usize>,
        /// Override: start year of the single triple.
        #[arg(long)]
        start: Option<i32>,
        /// Override: stop year of the single triple.
        #[arg(long)]
        stop: Option<i32>,
    },
    /// Run the 12-cell LSTM experiment grid for one location.
    Dl {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Location as lat:lon or an alias name (Agartala, Guwahati,
        /// Imphal, Itanagar, or config-supplied).
        #[arg(long)]
        location: Option<String>,
        /// Override: restrict to one optimizer (adamw|nadam).
        #[arg(long)]
        optimizer: Option<OptimizerKind>,
        /// Override: restrict to one input window.
        #[arg(long)]
        window: Option<usize>,
        /// Override: restrict to one dropout rate.
        #[arg(long)]
        dropout: Option<f64>,
    },
    /// Generate synthetic data in the ingest CSV formats.
    Synth {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Ingest {
            config,
            data,
            out,
            bbox,
        } => run_ingest(config, data, out, bbox),
        Command::Dmd {
            config,
            data,
            out,
            seed,
            rank,
            start,
            stop,
        } => run_dmd(config, data, out, seed, rank, start, stop),
        Command::Dl {
            config,
            data,
            out,
            seed,
            location,
            optimizer,
            window,
            dropout,
        } => run_dl(config, data, out, seed, location, optimizer, window, dropout),
        Command::Synth { config, out, seed } => run_synth(config, out, seed),
    }
}

fn out_dir(path: Option<PathBuf>) -> anyhow::Result<PathBuf> {
    let dir = path.unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    Ok(dir)
}

fn run_ingest(
    config: Option<PathBuf>,
    data: Option<PathBuf>,
    out: Option<PathBuf>,
    bbox: Option<Vec<f64>>,
) -> anyhow::Result<()> {
    let cfg = IngestConfig::load(config.as_deref())?;
    let data = data
        .or(cfg.data)
        .context("no input CSV: pass --data or set `data` in the config")?;
    let dir = out_dir(out.or(cfg.out))?;

    let records = load_daily_csv(&data)?;
    println!(
        "loaded {} grid point(s) x {} day(s) from {}",
        records.points.len(),
        records.dates.len(),
        data.display()
    );
    let mut grid = monthly_average(&records)?;
    let bbox = match (bbox, cfg.bbox) {
        (Some(v), _) => {
            if v.len() != 4 {
                bail!("--bbox needs lat_min,lat_max,lon_min,lon_max");
            }
            Some([v[0], v[1], v[2], v[3]])
        }
        (None, Some(b)) => Some(b),
        (None, None) => None,
    };
    if let Some([lat_min, lat_max, lon_min, lon_max]) = bbox {
        let bbox = BoundingBox::new(lat_min, lat_max, lon_min, lon_max)?;
        grid = select_region(&grid, &bbox)?;
        println!("selected {} grid point(s) inside the box", grid.n_points());
    }
    let path = dir.join("monthly.csv");
    grid.write_monthly_csv(&path)?;
    println!(
        "wrote {} ({} point(s) x {} month(s))",
        path.display(),
        grid.n_points(),
        grid.n_months()
    );
    Ok(())
}

fn run_dmd(
    config: Option<PathBuf>,
    data: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    rank: Option<usize>,
    start: Option<i32>,
    stop: Option<i32>,
) -> anyhow::Result<()> {
    let cfg = DmdConfig::load(config.as_deref())?;
    let data = data
        .or_else(|| cfg.data.clone())
        .context("no monthly CSV: pass --data or set `data` in the config")?;
    let dir = out_dir(out.or_else(|| cfg.out.clone()))?;

    let mut runs = cfg.triples();
    if let (Some(start_year), Some(stop_year), Some(rank)) = (start, stop, rank) {
        runs = vec![DmdTriple {
            start_year,
            stop_year,
            rank,
        }];
    } else if rank.is_some() || start.is_some() || stop.is_some() {
        bail!("--rank, --start, and --stop must be given together");
    }

    let grid = RainfallGrid::read_monthly_csv(&data)?;
    let data_hash = grid_sha256(&grid)?;
    let mut spec = DmdExperimentSpec::new(DmdDataSource::Grid(grid), runs);
    if let Some(clamp) = cfg.clamp_negative {
        spec.clamp_negative = clamp;
    }
    spec.seed = seed.or(cfg.seed).unwrap_or(0);

    let report = run_dmd_experiments(&spec)?;
    for (row, _) in &report.results {
        println!(
            "{}  rmse {:.4}  mae {:.4}  [{}]",
            row.config, row.rmse, row.mae, row.units
        );
    }
    for (triple, message) in &report.failures {
        eprintln!(
            "failed {}-{}/r{}: {message}",
            triple.start_year, triple.stop_year, triple.rank
        );
    }
    if report.results.is_empty() {
        bail!("every DMD run failed");
    }

    let rows: Vec<_> = report.results.iter().map(|(r, _)| r.clone()).collect();
    let table = dir.join("dmd_results.csv");
    write_dmd_results_csv(&table, &rows)?;

    let aliases = merged_aliases(cfg.aliases.as_ref());
    let plot_locations: Vec<GridPoint> = cfg
        .plot_locations
        .as_deref()
        .unwrap_or_default()
        .iter()
        .map(|text| resolve_location(text, &aliases))
        .collect::<raincast::Result<_>>()?;
    if !plot_locations.is_empty() {
        let plots = dir.join("plots");
        for (row, detail) in &report.results {
            emit_dmd_plot_data(&plots, row, detail, &plot_locations)?;
        }
        println!("plot CSVs under {}", plots.display());
    }

    write_run_manifest(&dir, spec.seed, &spec.summary(), &data_hash)?;
    println!("results table: {}", table.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_dl(
    config: Option<PathBuf>,
    data: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    location: Option<String>,
    optimizer: Option<OptimizerKind>,
    window: Option<usize>,
    dropout: Option<f64>,
) -> anyhow::Result<()> {
    let cfg = DlConfig::load(config.as_deref())?;
    let data = data
        .or_else(|| cfg.data.clone())
        .context("no monthly CSV: pass --data or set `data` in the config")?;
    let dir = out_dir(out.or_else(|| cfg.out.clone()))?;

    let aliases = merged_aliases(cfg.aliases.as_ref());
    let location_text = location
        .or_else(|| cfg.location.clone())
        .context("no location: pass --location or set `location` in the config")?;
    let point = resolve_location(&location_text, &aliases)?;

    let grid = RainfallGrid::read_monthly_csv(&data)?;
    let data_hash = grid_sha256(&grid)?;

    let mut spec = DlExperimentSpec::for_location(point);
    if let Some(optimizers) = &cfg.optimizers {
        spec.optimizers = optimizers
            .iter()
            .map(|s| s.parse())
            .collect::<raincast::Result<_>>()?;
    }
    if let Some(windows) = &cfg.windows {
        spec.input_windows = windows.clone();
    }
    if let Some(h) = cfg.output_window {
        spec.output_window = h;
    }
    if let Some(dropouts) = &cfg.dropouts {
        spec.dropouts = dropouts.clone();
    }
    if let Some(epochs) = cfg.epochs {
        spec.epochs = epochs;
    }
    if let Some(batch) = cfg.batch_size {
        spec.batch_size = batch;
    }
    if let Some(hidden) = cfg.hidden {
        spec.hidden = hidden;
    }
    if let Some(lr) = cfg.learning_rate {
        spec.learning_rate = lr;
    }
    if let Some(wd) = cfg.weight_decay {
        spec.weight_decay = wd;
    }
    if let Some(fraction) = cfg.train_fraction {
        spec.train_fraction = fraction;
    }
    spec.seed = seed.or(cfg.seed).unwrap_or(0);
    // Flag overrides restrict the grid to a single cell on that axis.
    if let Some(optimizer) = optimizer {
        spec.optimizers = vec![optimizer];
    }
    if let Some(window) = window {
        spec.input_windows = vec![window];
    }
    if let Some(dropout) = dropout {
        spec.dropouts = vec![dropout];
    }

    let report = run_dl_experiments(&grid, &spec)?;
    for (i, (row, detail)) in report.results.iter().enumerate() {
        let mut flags = String::new();
        if i == report.best_mae {
            flags.push_str("  <- best MAE");
        }
        if i == report.best_rmse {
            flags.push_str("  <- best RMSE");
        }
        println!(
            "{}  mae {:.4}  rmse {:.4}  (baseline rmse {:.4}) [{}]{}",
            row.config, row.mae, row.rmse, detail.baseline_rmse, row.units, flags
        );
    }

    let rows: Vec<_> = report.results.iter().map(|(r, _)| r.clone()).collect();
    let table = dir.join("dl_results.csv");
    write_dl_results_csv(&table, &rows)?;
    let plots = dir.join("plots");
    for (row, detail) in &report.results {
        emit_dl_plot_data(&plots, row, detail)?;
    }
    write_run_manifest(&dir, spec.seed, &spec.summary(), &data_hash)?;
    println!("results table: {}", table.display());
    Ok(())
}

fn run_synth(
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
) -> anyhow::Result<()> {
    let cfg = SynthConfig::load(config.as_deref())?;
    let dir = out_dir(out.or_else(|| cfg.out.clone()))?;
    let seed = seed.or(cfg.seed).unwrap_or(0);
    let kind = cfg.kind.as_deref().unwrap_or("seasonal");

    match kind {
        "seasonal" => {
            let spec = SeasonalSpec {
                amplitude: cfg.amplitude.unwrap_or(10.0),
                phase: cfg.phase.unwrap_or(0.0),
                noise_sigma: cfg.noise_sigma.unwrap_or(0.5),
                trend: cfg.trend.unwrap_or(0.0),
                length: cfg.length.unwrap_or(480),
                seed,
            };
            let points: Vec<GridPoint> = cfg
                .points
                .as_deref()
                .unwrap_or(&[[26.25, 91.75]])
                .iter()
                .map(|&[lat, lon]| GridPoint::new(lat, lon))
                .collect();
            let format = cfg.format.as_deref().unwrap_or("monthly");
            match format {
                "monthly" => {
                    let grid = seasonal_grid(&points, &spec)?;
                    let path = dir.join("synthetic_monthly.csv");
                    grid.write_monthly_csv(&path)?;
                    println!(
                        "wrote {} ({} point(s) x {} month(s))",
                        path.display(),
                        grid.n_points(),
                        grid.n_months()
                    );
                }
                "daily" => {
                    if points.len() != 1 {
                        bail!("daily output supports a single point");
                    }
                    let series = gen_seasonal(&spec)?;
                    let daily = daily_from_monthly(&series, points[0])?;
                    let path = dir.join("synthetic_daily.csv");
                    let mut writer = csv::Writer::from_path(&path)?;
                    writer.write_record(["lat", "lon", "date", "rain_mm"])?;
                    for (date, value) in daily.dates.iter().zip(&daily.values[0]) {
                        writer.write_record([
                            points[0].lat.to_string(),
                            points[0].lon.to_string(),
                            date.format("%Y-%m-%d").to_string(),
                            value.to_string(),
                        ])?;
                    }
                    writer.flush()?;
                    println!("wrote {} ({} day(s))", path.display(), daily.dates.len());
                }
                other => bail!("unknown format `{other}` (expected monthly or daily)"),
            }
        }
        "linear" => {
            let eigenvalues = cfg
                .eigenvalues
                .as_deref()
                .context("linear synth needs `eigenvalues` ([re, im] pairs)")?
                .iter()
                .map(|&[re, im]| num_complex::Complex::new(re, im))
                .collect::<Vec<_>>();
            let dim = cfg.dim.unwrap_or(eigenvalues.len());
            let spec = raincast::synth::LinearSystemSpec {
                dim,
                eigenvalues,
                seed,
                snapshots: cfg.snapshots.unwrap_or(48),
                initial_state: cfg
                    .initial_state
                    .clone()
                    .unwrap_or_else(|| (0..dim).map(|i| 1.0 + i as f64).collect()),
            };
            let system = gen_linear_system(&spec)?;
            let path = dir.join("synthetic_snapshots.csv");
            system.snapshots.write_csv(&path)?;
            println!(
                "wrote {} ({} x {})",
                path.display(),
                system.snapshots.n_points(),
                system.snapshots.n_snapshots()
            );
        }
        other => bail!("unknown synth kind `{other}` (expected seasonal or linear)"),
    }
    Ok(())
}
