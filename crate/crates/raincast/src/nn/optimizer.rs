//! AdamW (decoupled weight decay) and Nadam (Nesterov-lookahead Adam)
//! update rules over flat parameter slices.
//!
//! Both share the moment recursions m = b1*m + (1-b1)*g and
//! v = b2*v + (1-b2)*g^2 with bias corrections m^ = m/(1-b1^t) and
//! v^ = v/(1-b2^t). AdamW applies `theta -= lr*(m^/(sqrt(v^)+eps) +
//! wd*theta)` with the decay skipped on bias slots; Nadam applies
//! `theta -= lr*(b1*m^ + (1-b1)*g/(1-b1^t))/(sqrt(v^)+eps)` and carries no
//! decoupled decay.

use crate::error::{RaincastError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    AdamW,
    Nadam,
}

impl std::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OptimizerKind::AdamW => write!(f, "adamw"),
            OptimizerKind::Nadam => write!(f, "nadam"),
        }
    }
}

impl std::str::FromStr for OptimizerKind {
    type Err = RaincastError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adamw" => Ok(OptimizerKind::AdamW),
            "nadam" => Ok(OptimizerKind::Nadam),
            other => Err(RaincastError::Param(format!(
                "unknown optimizer `{other}` (expected adamw or nadam)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OptimizerHyper {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Decoupled weight decay; only AdamW applies it, and only to slots
    /// registered with `decay = true`.
    pub weight_decay: f64,
}

impl Default for OptimizerHyper {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 0.01,
        }
    }
}

#[derive(Debug, Clone)]
struct Slot {
    m: Vec<f64>,
    v: Vec<f64>,
    decay: bool,
}

/// First/second moment buffers for a fixed set of parameter tensors, plus
/// the shared step counter.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub kind: OptimizerKind,
    pub hyper: OptimizerHyper,
    pub step_count: u64,
    slots: Vec<Slot>,
}

impl OptimizerState {
    /// `layout` lists (length, apply_weight_decay) per parameter tensor,
    /// in the order they will be passed to `step`.
    pub fn new(kind: OptimizerKind, hyper: OptimizerHyper, layout: &[(usize, bool)]) -> Self {
        Self {
            kind,
            hyper,
            step_count: 0,
            slots: layout
                .iter()
                .map(|&(len, decay)| Slot {
                    m: vec![0.0; len],
                    v: vec![0.0; len],
                    decay,
                })
                .collect(),
        }
    }

    /// Apply one update; dispatches on the configured rule.
    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<()> {
        match self.kind {
            OptimizerKind::AdamW => adamw_step(self, params, grads),
            OptimizerKind::Nadam => nadam_step(self, params, grads),
        }
    }
}

fn check_layout(state: &OptimizerState, params: &[&mut [f64]], grads: &[&[f64]]) -> Result<()> {
    if params.len() != state.slots.len() || grads.len() != state.slots.len() {
        return Err(RaincastError::Shape {
            expected: format!("{} parameter tensors", state.slots.len()),
            got: format!("{} params / {} grads", params.len(), grads.len()),
        });
    }
    for (i, slot) in state.slots.iter().enumerate() {
        if params[i].len() != slot.m.len() || grads[i].len() != slot.m.len() {
            return Err(RaincastError::Shape {
                expected: format!("tensor {i} of length {}", slot.m.len()),
                got: format!("param {} / grad {}", params[i].len(), grads[i].len()),
            });
        }
    }
    Ok(())
}

/// One AdamW step with decoupled weight decay.
pub fn adamw_step(
    state: &mut OptimizerState,
    params: &mut [&mut [f64]],
    grads: &[&[f64]],
) -> Result<()> {
    check_layout(state, params, grads)?;
    let h = state.hyper;
    state.step_count += 1;
    let t = state.step_count as i32;
    let bias1 = 1.0 - h.beta1.powi(t);
    let bias2 = 1.0 - h.beta2.powi(t);

    for (slot_idx, slot) in state.slots.iter_mut().enumerate() {
        let theta = &mut *params[slot_idx];
        let grad = grads[slot_idx];
        let wd = if slot.decay { h.weight_decay } else { 0.0 };
        for k in 0..theta.len() {
            let g = grad[k];
            slot.m[k] = h.beta1 * slot.m[k] + (1.0 - h.beta1) * g;
            slot.v[k] = h.beta2 * slot.v[k] + (1.0 - h.beta2) * g * g;
            let m_hat = slot.m[k] / bias1;
            let v_hat = slot.v[k] / bias2;
            theta[k] -= h.learning_rate * (m_hat / (v_hat.sqrt() + h.epsilon) + wd * theta[k]);
            if !theta[k].is_finite() {
                return Err(RaincastError::Numeric {
                    context: format!("adamw update of tensor {slot_idx}"),
                    step: state.step_count as usize,
                });
            }
        }
    }
    Ok(())
}

/// One Nadam step: Nesterov-lookahead numerator, no decoupled decay.
pub fn nadam_step(
    state: &mut OptimizerState,
    params: &mut [&mut [f64]],
    grads: &[&[f64]],
) -> Result<()> {
    check_layout(state, params, grads)?;
    let h = state.hyper;
    state.step_count += 1;
    let t = state.step_count as i32;
    let bias1 = 1.0 - h.beta1.powi(t);
    let bias2 = 1.0 - h.beta2.powi(t);

    for (slot_idx, slot) in state.slots.iter_mut().enumerate() {
        let theta = &mut *params[slot_idx];
        let grad = grads[slot_idx];
        for k in 0..theta.len() {
            let g = grad[k];
            slot.m[k] = h.beta1 * slot.m[k] + (1.0 - h.beta1) * g;
            slot.v[k] = h.beta2 * slot.v[k] + (1.0 - h.beta2) * g * g;
            let m_hat = slot.m[k] / bias1;
            let v_hat = slot.v[k] / bias2;
            let lookahead = h.beta1 * m_hat + (1.0 - h.beta1) * g / bias1;
            theta[k] -= h.learning_rate * lookahead / (v_hat.sqrt() + h.epsilon);
            if !theta[k].is_finite() {
                return Err(RaincastError::Numeric {
                    context: format!("nadam update of tensor {slot_idx}"),
                    step: state.step_count as usize,
                });
            }
        }
    }
    Ok(())
}
