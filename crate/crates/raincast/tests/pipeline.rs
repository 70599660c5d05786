//! End-to-end pipeline tests: CSV boundaries, the snapshot/window plumbing
//! between modules, and the `raincast` binary itself.

use std::process::Command;

use raincast::dmd::truncated_svd;
use raincast::experiment::{
    run_dmd_experiments, DmdDataSource, DmdExperimentSpec, DmdTriple,
};
use raincast::ingest::{
    load_daily_csv, monthly_average, select_point, GridPoint, RainfallGrid,
};
use raincast::preprocess::{build_snapshot_matrix, SnapshotMatrix};
use raincast::synth::{daily_from_monthly, gen_seasonal, SeasonalSpec};

fn write_daily_csv(path: &std::path::Path, point: GridPoint, months: usize, seed: u64) {
    let series = gen_seasonal(&SeasonalSpec {
        length: months,
        seed,
        noise_sigma: 0.3,
        ..SeasonalSpec::default()
    })
    .unwrap();
    let daily = daily_from_monthly(&series, point).unwrap();
    let mut writer = csv::Writer::from_path(path).unwrap();
    writer.write_record(["lat", "lon", "date", "rain_mm"]).unwrap();
    for (date, value) in daily.dates.iter().zip(&daily.values[0]) {
        writer
            .write_record([
                point.lat.to_string(),
                point.lon.to_string(),
                date.format("%Y-%m-%d").to_string(),
                value.to_string(),
            ])
            .unwrap();
    }
    writer.flush().unwrap();
}

#[test]
fn daily_csv_to_monthly_grid_to_series() {
    let dir = tempfile::tempdir().unwrap();
    let daily = dir.path().join("daily.csv");
    let point = GridPoint::new(26.25, 91.75);
    write_daily_csv(&daily, point, 36, 1);

    let records = load_daily_csv(&daily).unwrap();
    let grid = monthly_average(&records).unwrap();
    grid.validate().unwrap();
    assert_eq!(grid.n_months(), 36);

    // Monthly CSV round-trips the grid exactly.
    let monthly = dir.path().join("monthly.csv");
    grid.write_monthly_csv(&monthly).unwrap();
    let back = RainfallGrid::read_monthly_csv(&monthly).unwrap();
    assert_eq!(back.values, grid.values);

    let series = select_point(&back, 26.25, 91.75).unwrap();
    assert_eq!(series.values.len(), 36);
}

#[test]
fn snapshot_matrix_flows_from_grid_to_dmd() {
    // Twelve points carrying the same noiseless seasonal signal at twelve
    // integer month offsets: the trajectory is spanned by the Fourier
    // modes of the base sequence, so an exact linear propagator exists at
    // the numerical rank of the snapshot matrix.
    let points: Vec<GridPoint> = (0..12)
        .map(|i| GridPoint::new(24.0 + i as f64 * 0.25, 91.0))
        .collect();
    let mut values = Vec::new();
    for (i, _) in points.iter().enumerate() {
        let series = gen_seasonal(&SeasonalSpec {
            phase: i as f64,
            length: 60,
            ..SeasonalSpec::default()
        })
        .unwrap();
        values.push(series.values);
    }
    let months = gen_seasonal(&SeasonalSpec {
        length: 60,
        ..SeasonalSpec::default()
    })
    .unwrap()
    .months;
    let grid = RainfallGrid {
        points,
        months,
        values,
    };
    grid.validate().unwrap();

    let snap = build_snapshot_matrix(&grid, 2001, 2003).unwrap();
    assert_eq!(snap.n_snapshots(), 36);

    // Snapshot CSV round-trip preserves values bit for bit.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("snapshots.csv");
    snap.write_csv(&path).unwrap();
    let back = SnapshotMatrix::read_csv(&path).unwrap();
    for i in 0..snap.n_points() {
        for j in 0..snap.n_snapshots() {
            assert_eq!(back.data[(i, j)], snap.data[(i, j)]);
        }
    }

    // Numerical rank of the fit window's first snapshot block.
    let fit = build_snapshot_matrix(&grid, 2000, 2003).unwrap();
    let m = fit.n_snapshots();
    let x1 = fit.data.as_ref().submatrix(0, 0, fit.n_points(), m - 1);
    let factors = truncated_svd(x1, fit.n_points().min(m - 1)).unwrap();
    let rank = factors
        .sigma
        .iter()
        .take_while(|&&s| s > 1e-8 * factors.sigma[0])
        .count();
    assert!(rank < fit.n_points(), "seasonal signal should be rank-deficient");

    let spec = DmdExperimentSpec::new(
        DmdDataSource::Grid(grid),
        vec![DmdTriple {
            start_year: 2000,
            stop_year: 2003,
            rank,
        }],
    );
    let report = run_dmd_experiments(&spec).unwrap();
    assert!(report.failures.is_empty(), "failures: {:?}", report.failures);
    let (row, _) = &report.results[0];
    assert!(row.rmse < 1e-6, "seasonal forecast rmse {}", row.rmse);
}

#[test]
fn cli_synth_ingest_dmd_dl_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_raincast");

    // synth: monthly grid at six points, 40 years.
    let synth_cfg = dir.path().join("synth.toml");
    std::fs::write(
        &synth_cfg,
        r#"
kind = "seasonal"
format = "monthly"
length = 480
noise_sigma = 0.4
points = [
    [26.25, 91.75],
    [24.75, 94.0],
    [23.75, 91.25],
    [27.0, 93.5],
    [25.5, 92.5],
    [26.0, 90.25],
]
"#,
    )
    .unwrap();
    let out = Command::new(bin)
        .args(["synth", "--config"])
        .arg(&synth_cfg)
        .args(["--out"])
        .arg(dir.path())
        .args(["--seed", "11"])
        .output()
        .unwrap();
    assert!(out.status.success(), "synth failed: {}", String::from_utf8_lossy(&out.stderr));
    let monthly = dir.path().join("synthetic_monthly.csv");
    assert!(monthly.exists());

    // dmd: single triple via flag overrides.
    let dmd_out = dir.path().join("dmd");
    let out = Command::new(bin)
        .args(["dmd", "--data"])
        .arg(&monthly)
        .args(["--out"])
        .arg(&dmd_out)
        .args(["--start", "2005", "--stop", "2015", "--rank", "6"])
        .output()
        .unwrap();
    assert!(out.status.success(), "dmd failed: {}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(dmd_out.join("dmd_results.csv")).unwrap();
    assert!(table.starts_with("start,stop,rank,rmse,mae\n"));
    assert!(table.lines().count() == 2);
    assert!(dmd_out.join("manifest.txt").exists());

    // dl: one cell via flag overrides, tiny epoch budget via config.
    let dl_cfg = dir.path().join("dl.toml");
    std::fs::write(
        &dl_cfg,
        r#"
epochs = 2
hidden = 8
"#,
    )
    .unwrap();
    let dl_out = dir.path().join("dl");
    let out = Command::new(bin)
        .args(["dl", "--config"])
        .arg(&dl_cfg)
        .args(["--data"])
        .arg(&monthly)
        .args(["--out"])
        .arg(&dl_out)
        .args(["--location", "Guwahati"])
        .args(["--optimizer", "nadam", "--window", "13", "--dropout", "0.2"])
        .args(["--seed", "3"])
        .output()
        .unwrap();
    assert!(out.status.success(), "dl failed: {}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(dl_out.join("dl_results.csv")).unwrap();
    assert!(table.starts_with("optimizer,input_window,output_window,dropout,mae,rmse\n"));
    assert!(table.contains("nadam,13,1,0.2,"));
    // One plot CSV per cell, month,truth,prediction rows; the table's
    // metrics recompute exactly from the emitted series.
    let plot = std::fs::read_to_string(dl_out.join("plots").join("dl_nadam_w13_d0.2.csv")).unwrap();
    assert!(plot.starts_with("month,truth,prediction\n"));
    let (mut truth, mut pred) = (Vec::new(), Vec::new());
    for line in plot.lines().skip(1) {
        let mut fields = line.split(',');
        let _month = fields.next().unwrap();
        truth.push(fields.next().unwrap().parse::<f64>().unwrap());
        pred.push(fields.next().unwrap().parse::<f64>().unwrap());
    }
    let row = table.lines().nth(1).unwrap();
    let cells: Vec<&str> = row.split(',').collect();
    let (table_mae, table_rmse): (f64, f64) = (cells[4].parse().unwrap(), cells[5].parse().unwrap());
    assert!((raincast::metrics::mae(&truth, &pred).unwrap() - table_mae).abs() < 1e-12);
    assert!((raincast::metrics::rmse(&truth, &pred).unwrap() - table_rmse).abs() < 1e-12);

    // ingest: daily expansion of a monthly series back through the CLI.
    let daily = dir.path().join("daily.csv");
    write_daily_csv(&daily, GridPoint::new(26.25, 91.75), 24, 9);
    let ingest_out = dir.path().join("ingest");
    let out = Command::new(bin)
        .args(["ingest", "--data"])
        .arg(&daily)
        .args(["--out"])
        .arg(&ingest_out)
        .args(["--bbox", "21.89,30.0,89.81,98.0"])
        .output()
        .unwrap();
    assert!(out.status.success(), "ingest failed: {}", String::from_utf8_lossy(&out.stderr));
    let grid = RainfallGrid::read_monthly_csv(ingest_out.join("monthly.csv")).unwrap();
    assert_eq!(grid.n_months(), 24);
    assert_eq!(grid.n_points(), 1);
}

#[test]
fn cli_reports_structured_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_raincast");

    // Missing data flag.
    let out = Command::new(bin).args(["dmd"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no monthly CSV"));

    // Bad CSV surfaces the parse location.
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "lat,lon,date,rain_mm\n25.0,91.0,1901-02-30,1.0\n").unwrap();
    let out = Command::new(bin)
        .args(["ingest", "--data"])
        .arg(&bad)
        .args(["--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
}
