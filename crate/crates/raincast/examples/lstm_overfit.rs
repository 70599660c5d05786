//! Train the LSTM regressor until it memorizes a small noiseless seasonal
//! dataset, then inspect the loss curve and in-sample predictions.
//!
//! ```bash
//! cargo run --release --example lstm_overfit
//! ```

use raincast::nn::{train, LstmRegressor, OptimizerKind, TrainConfig};
use raincast::preprocess::{fit_normalizer, make_windows, normalize};
use raincast::synth::{gen_seasonal, SeasonalSpec};

fn main() -> raincast::Result<()> {
    let series = gen_seasonal(&SeasonalSpec {
        length: 44,
        ..SeasonalSpec::default()
    })?;
    let normalizer = fit_normalizer(&series.values, 1.0)?;
    let normalized = normalize(&normalizer, &series.values);
    let data = make_windows(&normalized, 12, 1)?;
    println!("{} training samples (W=12, H=1)", data.len());

    let cfg = TrainConfig {
        epochs: 200,
        batch_size: 8,
        seed: 3,
        optimizer: OptimizerKind::Nadam,
        dropout_rate: 0.0,
        input_window: 12,
        ..TrainConfig::default()
    };
    let mut model = LstmRegressor::new(cfg.hidden, cfg.input_window, cfg.dropout_rate, cfg.seed)?;
    println!("model has {} parameters", model.parameter_count());

    let history = train(&mut model, &data, &cfg)?;
    for epoch in (0..history.len()).step_by(25) {
        println!("epoch {epoch:>3}  train MAE {:.5}", history[epoch]);
    }
    println!("epoch {:>3}  train MAE {:.5}", history.len() - 1, history.last().unwrap());

    println!("\nin-sample predictions (normalized):");
    for idx in [0, 8, 16, 24, 31] {
        let pred = model.predict(&data.inputs[idx])?;
        println!(
            "sample {idx:>2}: predicted {pred:>7.4}, target {:>7.4}",
            data.targets[idx][0]
        );
    }
    Ok(())
}
