//! End-to-end ingestion: write a synthetic daily CSV, load it, aggregate
//! to monthly means, select a region, and pull one location's series.
//!
//! ```bash
//! cargo run --release --example ingest_pipeline
//! ```

use raincast::ingest::{
    load_daily_csv, monthly_average, select_point, select_region, BoundingBox, GridPoint,
};
use raincast::synth::{daily_from_monthly, gen_seasonal, SeasonalSpec};

fn main() -> raincast::Result<()> {
    let dir = std::env::temp_dir().join("raincast_ingest_example");
    std::fs::create_dir_all(&dir)?;
    let daily_path = dir.join("daily.csv");

    // Two grid points, three years of daily data expanded from monthly
    // means (every day of a month carries the month's value).
    let mut writer = csv::Writer::from_path(&daily_path).map_err(raincast::RaincastError::from)?;
    writer
        .write_record(["lat", "lon", "date", "rain_mm"])
        .map_err(raincast::RaincastError::from)?;
    for (i, point) in [GridPoint::new(26.25, 91.75), GridPoint::new(40.0, 120.0)]
        .iter()
        .enumerate()
    {
        let series = gen_seasonal(&SeasonalSpec {
            length: 36,
            seed: i as u64,
            noise_sigma: 0.4,
            ..SeasonalSpec::default()
        })?;
        let daily = daily_from_monthly(&series, *point)?;
        for (date, value) in daily.dates.iter().zip(&daily.values[0]) {
            writer
                .write_record([
                    point.lat.to_string(),
                    point.lon.to_string(),
                    date.format("%Y-%m-%d").to_string(),
                    value.to_string(),
                ])
                .map_err(raincast::RaincastError::from)?;
        }
    }
    writer.flush()?;

    let records = load_daily_csv(&daily_path)?;
    println!(
        "loaded {} point(s) x {} day(s)",
        records.points.len(),
        records.dates.len()
    );

    let grid = monthly_average(&records)?;
    println!(
        "aggregated to {} month(s), units mm/day",
        grid.n_months()
    );

    // Keep only the north-east India box; the second point (40N, 120E) drops out.
    let region = select_region(&grid, &BoundingBox::northeast_india())?;
    println!("{} point(s) inside the region box", region.n_points());

    let series = select_point(&region, 26.25, 91.75)?;
    let peak = series.values.iter().cloned().fold(0.0, f64::max);
    println!(
        "series at 26.25N 91.75E: {} months, wettest month {:.2} mm/day",
        series.values.len(),
        peak
    );

    // Asking for a point that is not on the grid names the nearest one.
    match select_point(&region, 26.3, 91.7) {
        Err(err) => println!("lookup miss: {err}"),
        Ok(_) => unreachable!("26.3:91.7 is not a grid point"),
    }
    Ok(())
}
