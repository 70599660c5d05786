//! Run the 12-cell optimizer/window/dropout experiment grid on a synthetic
//! monthly series and print the table with the best rows flagged.
//!
//! ```bash
//! cargo run --release --example dl_experiment_grid
//! ```
//!
//! Cells train sequentially; with the default 100 epochs this takes a few
//! minutes. Set `epochs` lower for a quick look.

use raincast::experiment::{run_dl_experiments_on_series, ConfigEcho, DlExperimentSpec};
use raincast::ingest::GridPoint;
use raincast::synth::{gen_seasonal, SeasonalSpec};

fn main() -> raincast::Result<()> {
    let series = gen_seasonal(&SeasonalSpec {
        amplitude: 10.0,
        noise_sigma: 0.5,
        length: 480,
        seed: 6,
        ..SeasonalSpec::default()
    })?;

    let mut spec = DlExperimentSpec::for_location(GridPoint::new(26.25, 91.75));
    spec.seed = 6;
    spec.epochs = 40;
    let report = run_dl_experiments_on_series(&series, &spec)?;

    println!("optimizer  window  dropout    mae      rmse    baseline-rmse");
    for (i, (row, detail)) in report.results.iter().enumerate() {
        let ConfigEcho::Dl {
            optimizer,
            input_window,
            dropout,
            ..
        } = row.config
        else {
            continue;
        };
        let mut flags = String::new();
        if i == report.best_mae {
            flags.push_str("  <- best MAE");
        }
        if i == report.best_rmse {
            flags.push_str("  <- best RMSE");
        }
        println!(
            "{optimizer:<9}  {input_window:>6}  {dropout:>7}  {:.4}   {:.4}   {:.4}{flags}",
            row.mae, row.rmse, detail.baseline_rmse
        );
    }
    Ok(())
}
