//! Adam optimizer over the packed LSTM parameters.

use serde::{Deserialize, Serialize};

use super::grad::Gradients;
use super::lstm::LstmWeights;

/// Adam state: first and second moment estimates plus the step counter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step: u64,
    m: LstmWeights,
    v: LstmWeights,
}

impl AdamState {
    pub fn new(hidden: usize, input_dim: usize) -> Self {
        AdamState {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: LstmWeights::zeros(hidden, input_dim),
            v: LstmWeights::zeros(hidden, input_dim),
        }
    }
}

#[inline]
fn update_slice(
    w: &mut [f64],
    g: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    lr_t: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) {
    for i in 0..w.len() {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        w[i] -= lr_t * m[i] / (v[i].sqrt() + eps);
    }
}

/// One bias-corrected Adam step.
pub fn adam_step(weights: &mut LstmWeights, grads: &Gradients, state: &mut AdamState, lr: f64) {
    state.step += 1;
    let t = state.step as i32;
    let lr_t = lr * (1.0 - state.beta2.powi(t)).sqrt() / (1.0 - state.beta1.powi(t));
    let (b1, b2, eps) = (state.beta1, state.beta2, state.epsilon);
    update_slice(
        &mut weights.w_ih,
        &grads.w_ih,
        &mut state.m.w_ih,
        &mut state.v.w_ih,
        lr_t,
        b1,
        b2,
        eps,
    );
    update_slice(
        &mut weights.w_hh,
        &grads.w_hh,
        &mut state.m.w_hh,
        &mut state.v.w_hh,
        lr_t,
        b1,
        b2,
        eps,
    );
    update_slice(
        &mut weights.bias,
        &grads.bias,
        &mut state.m.bias,
        &mut state.v.bias,
        lr_t,
        b1,
        b2,
        eps,
    );
    update_slice(
        &mut weights.dense_w,
        &grads.dense_w,
        &mut state.m.dense_w,
        &mut state.v.dense_w,
        lr_t,
        b1,
        b2,
        eps,
    );
    let mut db = [weights.dense_b];
    let mut mb = [state.m.dense_b];
    let mut vb = [state.v.dense_b];
    update_slice(
        &mut db,
        &[grads.dense_b],
        &mut mb,
        &mut vb,
        lr_t,
        b1,
        b2,
        eps,
    );
    weights.dense_b = db[0];
    state.m.dense_b = mb[0];
    state.v.dense_b = vb[0];
}
