//! From-scratch LSTM regressor: a 64-unit LSTM layer, inverted dropout
//! between the LSTM output and a zero-initialized single-unit dense head,
//! trained by backpropagation through time under MAE loss with AdamW or
//! Nadam.

mod checkpoint;
mod lstm;
mod optimizer;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, write_loss_history};
pub use lstm::{lstm_backward, lstm_forward, LstmCache, LstmGrads, StepCache};
pub use optimizer::{adamw_step, nadam_step, OptimizerHyper, OptimizerKind, OptimizerState};
pub use train::{train, TrainConfig};

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{RaincastError, Result};

/// The head reshapes its scalar output to this shape; it carries no
/// numeric effect and is tracked as metadata only.
pub const OUTPUT_SHAPE: [usize; 2] = [1, 1];

/// LSTM cell parameters with gate blocks stacked [i, f, g, o].
#[derive(Debug, Clone)]
pub struct LstmParams {
    /// Input weights, 4h x d.
    pub w_x: Array2<f64>,
    /// Recurrent weights, 4h x h.
    pub w_h: Array2<f64>,
    /// Gate biases, 4h.
    pub bias: Array1<f64>,
    pub hidden: usize,
    pub input_dim: usize,
}

impl LstmParams {
    pub fn zeros(hidden: usize, input_dim: usize) -> Self {
        Self {
            w_x: Array2::zeros((4 * hidden, input_dim)),
            w_h: Array2::zeros((4 * hidden, hidden)),
            bias: Array1::zeros(4 * hidden),
            hidden,
            input_dim,
        }
    }

    /// Seeded Glorot-uniform weights (limit sqrt(6 / (rows + cols)) per
    /// tensor) with zero biases.
    pub fn glorot(hidden: usize, input_dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut init = |rows: usize, cols: usize| -> Array2<f64> {
            let limit = (6.0 / (rows + cols) as f64).sqrt();
            Array2::from_shape_fn((rows, cols), |_| rng.random_range(-limit..limit))
        };
        Self {
            w_x: init(4 * hidden, input_dim),
            w_h: init(4 * hidden, hidden),
            bias: Array1::zeros(4 * hidden),
            hidden,
            input_dim,
        }
    }

    /// Total trainable values: 4h(d + h) + 4h.
    pub fn parameter_count(&self) -> usize {
        self.w_x.len() + self.w_h.len() + self.bias.len()
    }
}

/// Single-unit dense head; all entries start at exactly zero.
#[derive(Debug, Clone)]
pub struct DenseParams {
    pub w: Array1<f64>,
    pub b: f64,
}

impl DenseParams {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            w: Array1::zeros(hidden),
            b: 0.0,
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.w.len() + 1
    }
}

/// y = w . x + b, reshaped to [`OUTPUT_SHAPE`] downstream.
pub fn dense_forward(params: &DenseParams, x: &Array1<f64>) -> f64 {
    params.w.dot(x) + params.b
}

/// MAE loss and its subgradient with respect to the prediction;
/// sign(0) = 0 so exact fits produce no update.
pub fn mae_loss(pred: f64, target: f64) -> (f64, f64) {
    let diff = pred - target;
    let grad = if diff == 0.0 { 0.0 } else { diff.signum() };
    (diff.abs(), grad)
}

/// Inverted dropout. In training mode each unit is zeroed with probability
/// `rate` and survivors are scaled by 1/(1-rate); the returned mask already
/// carries that scale, so `out = x * mask` and the backward pass multiplies
/// by the same mask. Inference mode is the identity with an all-ones mask.
pub fn dropout(
    x: &Array1<f64>,
    rate: f64,
    training: bool,
    rng: &mut impl Rng,
) -> Result<(Array1<f64>, Array1<f64>)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(RaincastError::Param(format!(
            "dropout rate must be in [0, 1), got {rate}"
        )));
    }
    if !training || rate == 0.0 {
        return Ok((x.clone(), Array1::ones(x.len())));
    }
    let keep = 1.0 - rate;
    let mask = Array1::from_shape_fn(x.len(), |_| {
        if rng.random::<f64>() < rate {
            0.0
        } else {
            1.0 / keep
        }
    });
    Ok((x * &mask, mask))
}

/// The full regressor: LSTM, dropout between LSTM output and dense head
/// (training mode only), zero-initialized dense head.
#[derive(Debug, Clone)]
pub struct LstmRegressor {
    pub lstm: LstmParams,
    pub dense: DenseParams,
    pub dropout_rate: f64,
    /// Expected input window length W.
    pub input_window: usize,
}

impl LstmRegressor {
    /// Build an untrained regressor: seeded Glorot LSTM weights, dense
    /// head at exactly zero.
    pub fn new(
        hidden: usize,
        input_window: usize,
        dropout_rate: f64,
        seed: u64,
    ) -> Result<Self> {
        if hidden == 0 || input_window == 0 {
            return Err(RaincastError::Param(
                "hidden units and input window must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&dropout_rate) {
            return Err(RaincastError::Param(format!(
                "dropout rate must be in [0, 1), got {dropout_rate}"
            )));
        }
        Ok(Self {
            lstm: LstmParams::glorot(hidden, 1, seed),
            dense: DenseParams::zeros(hidden),
            dropout_rate,
            input_window,
        })
    }

    pub fn parameter_count(&self) -> usize {
        self.lstm.parameter_count() + self.dense.parameter_count()
    }

    /// Inference-mode prediction for one window (dropout off). The model
    /// operates in normalized space end to end; the caller denormalizes
    /// for mm/day reporting.
    pub fn predict(&self, window: &[f64]) -> Result<f64> {
        if window.len() != self.input_window {
            return Err(RaincastError::Shape {
                expected: format!("window of length {}", self.input_window),
                got: format!("length {}", window.len()),
            });
        }
        let input = Array2::from_shape_vec((window.len(), 1), window.to_vec())
            .expect("window reshapes to a column");
        let h = self.lstm.hidden;
        let (h_final, _) = lstm_forward(
            &self.lstm,
            input.view(),
            &Array1::zeros(h),
            &Array1::zeros(h),
        )?;
        Ok(dense_forward(&self.dense, &h_final))
    }
}
