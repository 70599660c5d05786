//! Persist and reload both model kinds: the DMD model as a CSV bundle and
//! the LSTM regressor as a checkpoint with a config-hash manifest.
//!
//! ```bash
//! cargo run --release --example model_io
//! ```

use num_complex::Complex;
use raincast::dmd::{dmd_fit, dmd_forecast, DmdModel};
use raincast::nn::{load_checkpoint, save_checkpoint, train, write_loss_history, LstmRegressor, TrainConfig};
use raincast::preprocess::{fit_normalizer, make_windows, normalize};
use raincast::synth::{gen_linear_system, gen_seasonal, LinearSystemSpec, SeasonalSpec};

fn main() -> raincast::Result<()> {
    let dir = std::env::temp_dir().join("raincast_model_io_example");
    std::fs::create_dir_all(&dir)?;

    // DMD model bundle.
    let system = gen_linear_system(&LinearSystemSpec {
        dim: 4,
        eigenvalues: vec![
            Complex::from_polar(0.92, 0.5),
            Complex::from_polar(0.92, -0.5),
        ],
        seed: 1,
        snapshots: 30,
        initial_state: vec![1.0, 2.0, -1.0, 0.5],
    })?;
    let model = dmd_fit(&system.snapshots, 2)?;
    let bundle = dir.join("dmd_model");
    model.save(&bundle)?;
    let restored = DmdModel::load(&bundle)?;
    let a = dmd_forecast(&model, 6)?;
    let b = dmd_forecast(&restored, 6)?;
    let identical = (0..a.nrows()).all(|i| (0..a.ncols()).all(|j| a[(i, j)] == b[(i, j)]));
    println!("DMD bundle at {} (forecasts identical after reload: {identical})", bundle.display());

    // LSTM checkpoint.
    let series = gen_seasonal(&SeasonalSpec {
        length: 48,
        ..SeasonalSpec::default()
    })?;
    let normalizer = fit_normalizer(&series.values, 1.0)?;
    let data = make_windows(&normalize(&normalizer, &series.values), 12, 1)?;
    let cfg = TrainConfig {
        epochs: 30,
        batch_size: 8,
        seed: 2,
        dropout_rate: 0.0,
        input_window: 12,
        hidden: 16,
        ..TrainConfig::default()
    };
    let mut regressor = LstmRegressor::new(cfg.hidden, cfg.input_window, cfg.dropout_rate, cfg.seed)?;
    let history = train(&mut regressor, &data, &cfg)?;
    let checkpoint = dir.join("lstm_checkpoint");
    save_checkpoint(&regressor, &cfg, &checkpoint)?;
    write_loss_history(checkpoint.join("loss.csv"), &history)?;
    let reloaded = load_checkpoint(&checkpoint, Some(&cfg))?;
    let window = &data.inputs[0];
    println!(
        "LSTM checkpoint at {} (prediction identical after reload: {})",
        checkpoint.display(),
        regressor.predict(window)? == reloaded.predict(window)?
    );
    Ok(())
}
