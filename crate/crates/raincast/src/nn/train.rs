//! Mini-batch training loop: BPTT under MAE loss with mean reduction per
//! batch. Batches walk the sample sequence in chronological order, so a
//! (seed, config, data) triple fully determines the trained weights.

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{RaincastError, Result};
use crate::preprocess::WindowedDataset;

use super::lstm::{lstm_backward, lstm_forward, LstmGrads};
use super::optimizer::{OptimizerHyper, OptimizerKind, OptimizerState};
use super::{dense_forward, dropout, mae_loss, LstmRegressor};

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub dropout_rate: f64,
    /// Input window length W.
    pub input_window: usize,
    /// Output window length H; the regressor head supports exactly 1.
    pub output_window: usize,
    pub hidden: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            batch_size: 32,
            seed: 0,
            optimizer: OptimizerKind::AdamW,
            learning_rate: 0.01,
            weight_decay: 0.01,
            dropout_rate: 0.2,
            input_window: 13,
            output_window: 1,
            hidden: 64,
        }
    }
}

impl TrainConfig {
    /// Canonical one-line echo, used in manifests and checkpoint hashes.
    pub fn summary(&self) -> String {
        format!(
            "epochs={} batch={} seed={} optimizer={} lr={} wd={} dropout={} W={} H={} hidden={}",
            self.epochs,
            self.batch_size,
            self.seed,
            self.optimizer,
            self.learning_rate,
            self.weight_decay,
            self.dropout_rate,
            self.input_window,
            self.output_window,
            self.hidden
        )
    }
}

/// Train in place over the windowed dataset; returns the per-epoch mean
/// training MAE.
pub fn train(
    model: &mut LstmRegressor,
    data: &WindowedDataset,
    cfg: &TrainConfig,
) -> Result<Vec<f64>> {
    if cfg.epochs == 0 {
        return Err(RaincastError::Param("epochs must be at least 1".into()));
    }
    if cfg.batch_size == 0 {
        return Err(RaincastError::Param("batch size must be at least 1".into()));
    }
    if data.is_empty() {
        return Err(RaincastError::InsufficientData { len: 0, needed: 1 });
    }
    if cfg.output_window != 1 || data.output_window != 1 {
        return Err(RaincastError::Shape {
            expected: "output window of 1".into(),
            got: format!("config H={}, data H={}", cfg.output_window, data.output_window),
        });
    }
    if data.input_window != model.input_window {
        return Err(RaincastError::Shape {
            expected: format!("input window {}", model.input_window),
            got: format!("dataset window {}", data.input_window),
        });
    }

    let h = model.lstm.hidden;
    let hyper = OptimizerHyper {
        learning_rate: cfg.learning_rate,
        weight_decay: cfg.weight_decay,
        ..OptimizerHyper::default()
    };
    // Gate biases and the dense bias are excluded from weight decay.
    let layout = [
        (model.lstm.w_x.len(), true),
        (model.lstm.w_h.len(), true),
        (model.lstm.bias.len(), false),
        (model.dense.w.len(), true),
        (1, false),
    ];
    let mut optimizer = OptimizerState::new(cfg.optimizer, hyper, &layout);

    // Dropout masks draw from their own stream so the initialization draw
    // order never shifts with the training schedule.
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    dropout_rng.set_stream(1);

    let n = data.len();
    let h0 = Array1::<f64>::zeros(h);
    let c0 = Array1::<f64>::zeros(h);
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let mut epoch_loss = 0.0;
        let mut start = 0usize;
        while start < n {
            let end = (start + cfg.batch_size).min(n);
            let batch = start..end;
            let batch_len = (end - start) as f64;

            let mut lstm_grads = LstmGrads::zeros(&model.lstm);
            let mut dense_w_grad = Array1::<f64>::zeros(h);
            let mut dense_b_grad = 0.0;

            for idx in batch {
                let window = Array2::from_shape_vec(
                    (model.input_window, 1),
                    data.inputs[idx].clone(),
                )
                .expect("window reshapes to a column");
                let target = data.targets[idx][0];

                let (h_final, cache) = lstm_forward(&model.lstm, window.view(), &h0, &c0)?;
                let (h_dropped, mask) =
                    dropout(&h_final, model.dropout_rate, true, &mut dropout_rng)?;
                let pred = dense_forward(&model.dense, &h_dropped);
                let (loss, d_pred) = mae_loss(pred, target);
                epoch_loss += loss;

                // Dense backward, then through the dropout mask into BPTT.
                dense_w_grad.scaled_add(d_pred / batch_len, &h_dropped);
                dense_b_grad += d_pred / batch_len;
                let d_hidden = model.dense.w.iter().zip(&mask)
                    .map(|(&w, &m)| d_pred * w * m)
                    .collect::<Array1<f64>>();
                let (grads, _) = lstm_backward(&model.lstm, &cache, &d_hidden)?;
                lstm_grads.w_x.scaled_add(1.0 / batch_len, &grads.w_x);
                lstm_grads.w_h.scaled_add(1.0 / batch_len, &grads.w_h);
                lstm_grads.bias.scaled_add(1.0 / batch_len, &grads.bias);
            }

            let mut dense_b = [model.dense.b];
            let dense_b_grads = [dense_b_grad];
            {
                let mut params: [&mut [f64]; 5] = [
                    model.lstm.w_x.as_slice_mut().expect("contiguous"),
                    model.lstm.w_h.as_slice_mut().expect("contiguous"),
                    model.lstm.bias.as_slice_mut().expect("contiguous"),
                    model.dense.w.as_slice_mut().expect("contiguous"),
                    &mut dense_b,
                ];
                let grads: [&[f64]; 5] = [
                    lstm_grads.w_x.as_slice().expect("contiguous"),
                    lstm_grads.w_h.as_slice().expect("contiguous"),
                    lstm_grads.bias.as_slice().expect("contiguous"),
                    dense_w_grad.as_slice().expect("contiguous"),
                    &dense_b_grads,
                ];
                optimizer.step(&mut params, &grads)?;
            }
            model.dense.b = dense_b[0];

            start = end;
        }

        let mean_loss = epoch_loss / n as f64;
        if !mean_loss.is_finite() {
            return Err(RaincastError::Diverged { epoch });
        }
        history.push(mean_loss);
    }

    Ok(history)
}
