//! Single-layer LSTM forward pass and backpropagation through time.
//!
//! Gate blocks are stacked in the fixed order [input i, forget f,
//! candidate g, output o] inside the 4h-row weight matrices, and the
//! recurrence is the standard one:
//!
//!   z_t = W_x x_t + W_h h_{t-1} + bias
//!   i, f, o = sigmoid(z_i), sigmoid(z_f), sigmoid(z_o);  g = tanh(z_g)
//!   c_t = f * c_{t-1} + i * g
//!   h_t = o * tanh(c_t)

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array1, Array2, ArrayView2, Axis};

use crate::error::{RaincastError, Result};

use super::LstmParams;

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Per-step values retained for the backward pass.
#[derive(Debug, Clone)]
pub struct StepCache {
    pub x: Array1<f64>,
    pub h_prev: Array1<f64>,
    pub c_prev: Array1<f64>,
    pub input_gate: Array1<f64>,
    pub forget_gate: Array1<f64>,
    pub candidate: Array1<f64>,
    pub output_gate: Array1<f64>,
    pub cell: Array1<f64>,
    pub tanh_cell: Array1<f64>,
}

/// Forward caches for one window.
#[derive(Debug, Clone)]
pub struct LstmCache {
    pub steps: Vec<StepCache>,
    pub hidden: usize,
    pub input_dim: usize,
}

/// Run the recurrence over a W x d window from the given initial state;
/// returns the final hidden state and the caches for backward.
pub fn lstm_forward(
    params: &LstmParams,
    window: ArrayView2<'_, f64>,
    h0: &Array1<f64>,
    c0: &Array1<f64>,
) -> Result<(Array1<f64>, LstmCache)> {
    let h = params.hidden;
    let d = params.input_dim;
    if window.ncols() != d {
        return Err(RaincastError::Shape {
            expected: format!("window with {d} feature column(s)"),
            got: format!("{} column(s)", window.ncols()),
        });
    }
    if h0.len() != h || c0.len() != h {
        return Err(RaincastError::Shape {
            expected: format!("initial state of length {h}"),
            got: format!("h0 {} / c0 {}", h0.len(), c0.len()),
        });
    }

    let mut hidden = h0.clone();
    let mut cell = c0.clone();
    let mut steps = Vec::with_capacity(window.nrows());

    for (t, x_t) in window.rows().into_iter().enumerate() {
        let x_t = x_t.to_owned();
        let pre = params.w_x.dot(&x_t) + params.w_h.dot(&hidden) + &params.bias;

        let input_gate = pre.slice(s![0..h]).mapv(sigmoid);
        let forget_gate = pre.slice(s![h..2 * h]).mapv(sigmoid);
        let candidate = pre.slice(s![2 * h..3 * h]).mapv(f64::tanh);
        let output_gate = pre.slice(s![3 * h..4 * h]).mapv(sigmoid);

        let new_cell = &forget_gate * &cell + &input_gate * &candidate;
        let tanh_cell = new_cell.mapv(f64::tanh);
        let new_hidden = &output_gate * &tanh_cell;

        if new_hidden.iter().chain(new_cell.iter()).any(|v| !v.is_finite()) {
            return Err(RaincastError::Numeric {
                context: "lstm forward".into(),
                step: t,
            });
        }

        steps.push(StepCache {
            x: x_t,
            h_prev: hidden,
            c_prev: cell,
            input_gate,
            forget_gate,
            candidate,
            output_gate,
            cell: new_cell.clone(),
            tanh_cell,
        });
        hidden = new_hidden;
        cell = new_cell;
    }

    Ok((
        hidden,
        LstmCache {
            steps,
            hidden: h,
            input_dim: d,
        },
    ))
}

/// Gradients of the loss with respect to the LSTM parameters.
#[derive(Debug, Clone)]
pub struct LstmGrads {
    pub w_x: Array2<f64>,
    pub w_h: Array2<f64>,
    pub bias: Array1<f64>,
}

impl LstmGrads {
    pub fn zeros(params: &LstmParams) -> Self {
        Self {
            w_x: Array2::zeros(params.w_x.raw_dim()),
            w_h: Array2::zeros(params.w_h.raw_dim()),
            bias: Array1::zeros(params.bias.raw_dim()),
        }
    }
}

/// Backpropagation through time from an upstream gradient on the final
/// hidden state; returns parameter gradients and per-step input gradients.
pub fn lstm_backward(
    params: &LstmParams,
    cache: &LstmCache,
    d_h_final: &Array1<f64>,
) -> Result<(LstmGrads, Vec<Array1<f64>>)> {
    let h = params.hidden;
    if cache.hidden != h || cache.input_dim != params.input_dim {
        return Err(RaincastError::Structure(format!(
            "cache built for h={}, d={} but params have h={h}, d={}",
            cache.hidden, cache.input_dim, params.input_dim
        )));
    }
    if d_h_final.len() != h {
        return Err(RaincastError::Shape {
            expected: format!("upstream gradient of length {h}"),
            got: format!("length {}", d_h_final.len()),
        });
    }

    let mut grads = LstmGrads::zeros(params);
    let mut d_inputs = vec![Array1::zeros(params.input_dim); cache.steps.len()];
    let mut d_hidden = d_h_final.clone();
    let mut d_cell = Array1::<f64>::zeros(h);

    for (t, step) in cache.steps.iter().enumerate().rev() {
        // h_t = o * tanh(c_t)
        let d_output = &d_hidden * &step.tanh_cell;
        let d_cell_total =
            &d_cell + &(&d_hidden * &step.output_gate * step.tanh_cell.mapv(|v| 1.0 - v * v));

        // c_t = f * c_{t-1} + i * g
        let d_input = &d_cell_total * &step.candidate;
        let d_forget = &d_cell_total * &step.c_prev;
        let d_candidate = &d_cell_total * &step.input_gate;

        // Through the gate nonlinearities to the pre-activations.
        let d_pre_i = &d_input * &step.input_gate * step.input_gate.mapv(|v| 1.0 - v);
        let d_pre_f = &d_forget * &step.forget_gate * step.forget_gate.mapv(|v| 1.0 - v);
        let d_pre_g = &d_candidate * step.candidate.mapv(|v| 1.0 - v * v);
        let d_pre_o = &d_output * &step.output_gate * step.output_gate.mapv(|v| 1.0 - v);

        let mut d_pre = Array1::<f64>::zeros(4 * h);
        d_pre.slice_mut(s![0..h]).assign(&d_pre_i);
        d_pre.slice_mut(s![h..2 * h]).assign(&d_pre_f);
        d_pre.slice_mut(s![2 * h..3 * h]).assign(&d_pre_g);
        d_pre.slice_mut(s![3 * h..4 * h]).assign(&d_pre_o);

        // Outer products accumulate the parameter gradients.
        let d_pre_col = d_pre.view().insert_axis(Axis(1));
        general_mat_mul(
            1.0,
            &d_pre_col,
            &step.x.view().insert_axis(Axis(0)),
            1.0,
            &mut grads.w_x,
        );
        general_mat_mul(
            1.0,
            &d_pre_col,
            &step.h_prev.view().insert_axis(Axis(0)),
            1.0,
            &mut grads.w_h,
        );
        grads.bias += &d_pre;

        d_inputs[t] = params.w_x.t().dot(&d_pre);
        d_hidden = params.w_h.t().dot(&d_pre);
        d_cell = &d_cell_total * &step.forget_gate;
    }

    Ok((grads, d_inputs))
}
