//! Backpropagation through time for the windowed MSE objective.
//!
//! The loss over a batch is `mean((gate * dense(h_L) - target)^2)` in the
//! scaled domain. Gated-off samples multiply the prediction by zero, so they
//! contribute zero gradient through the LSTM path. Batch accumulation runs
//! over fixed-size chunks summed in chunk order, which keeps gradients
//! bit-identical regardless of thread count.

use super::lstm::{dense, run_window, BpttScratch, LstmWeights};
use crate::par;

/// Gradients share the parameter layout of [`LstmWeights`].
pub type Gradients = LstmWeights;

/// A training sample referencing a window inside a pre-scaled feature block.
#[derive(Debug, Clone, Copy)]
pub struct PreparedSample<'a> {
    /// `lookback x D` row-major window, already scaled.
    pub window: &'a [f64],
    /// Target in the scaled domain.
    pub target: f64,
    /// 1.0 when the gate admits the LSTM output, 0.0 otherwise.
    pub gate: f64,
}

/// Squared error of one sample under the current weights.
pub fn sample_loss(w: &LstmWeights, lookback: usize, sample: &PreparedSample) -> f64 {
    let h = run_window(w, sample.window, lookback);
    let pred = sample.gate * dense(w, &h);
    let err = pred - sample.target;
    err * err
}

/// Accumulates one sample's unnormalized gradient (factor `2 * err`) into
/// `grad`; returns the squared error.
fn accumulate_sample(
    w: &LstmWeights,
    sample: &PreparedSample,
    grad: &mut Gradients,
    scratch: &mut BpttScratch,
) -> f64 {
    let hidden = w.hidden;
    let input_dim = w.input_dim;
    let lookback = scratch.lookback;

    let h_last_start = (lookback - 1) * hidden;
    scratch.forward(w, sample.window);
    let h_last = &scratch.h[h_last_start..h_last_start + hidden];
    let pred = sample.gate * dense(w, h_last);
    let err = pred - sample.target;
    let sq = err * err;
    if sample.gate == 0.0 {
        // Zero gradient through every path; the loss term is flat.
        return sq;
    }

    let r = 2.0 * err * sample.gate;
    grad.dense_b += r;
    for j in 0..hidden {
        grad.dense_w[j] += r * h_last[j];
    }

    for (dh, wd) in scratch.dh.iter_mut().zip(&w.dense_w) {
        *dh = r * wd;
    }
    scratch.dc.iter_mut().for_each(|v| *v = 0.0);

    for t in (0..lookback).rev() {
        let base = t * hidden;
        let prev = base.wrapping_sub(hidden);
        for j in 0..hidden {
            let tanh_c = scratch.tanh_c[base + j];
            let o = scratch.o[base + j];
            let dcj = scratch.dh[j] * o * (1.0 - tanh_c * tanh_c) + scratch.dc[j];
            let c_prev_j = if t == 0 { 0.0 } else { scratch.c[prev + j] };
            let i = scratch.i[base + j];
            let f = scratch.f[base + j];
            let g = scratch.g[base + j];
            scratch.d_gates[j] = dcj * g * i * (1.0 - i);
            scratch.d_gates[hidden + j] = dcj * c_prev_j * f * (1.0 - f);
            scratch.d_gates[2 * hidden + j] = dcj * i * (1.0 - g * g);
            scratch.d_gates[3 * hidden + j] = scratch.dh[j] * tanh_c * o * (1.0 - o);
            scratch.dc[j] = dcj * f;
        }

        let x = &sample.window[t * input_dim..(t + 1) * input_dim];
        scratch.dh_next.iter_mut().for_each(|v| *v = 0.0);
        for (row, &dg) in scratch.d_gates.iter().enumerate() {
            if dg == 0.0 {
                continue;
            }
            grad.bias[row] += dg;
            let g_row = &mut grad.w_ih[row * input_dim..(row + 1) * input_dim];
            for (gz, xv) in g_row.iter_mut().zip(x) {
                *gz += dg * xv;
            }
            if t > 0 {
                let h_prev = &scratch.h[prev..prev + hidden];
                let g_row = &mut grad.w_hh[row * hidden..(row + 1) * hidden];
                for (gz, hv) in g_row.iter_mut().zip(h_prev) {
                    *gz += dg * hv;
                }
            }
            let w_row = &w.w_hh[row * hidden..(row + 1) * hidden];
            for (dn, wv) in scratch.dh_next.iter_mut().zip(w_row) {
                *dn += dg * wv;
            }
        }
        std::mem::swap(&mut scratch.dh, &mut scratch.dh_next);
    }
    sq
}

/// Mean-squared-error gradients over a batch of prepared samples.
///
/// Returns `(gradients, mse)`. Accumulation is chunked (32 samples per
/// chunk) and the chunk results are combined in order.
pub fn batch_gradients(
    w: &LstmWeights,
    lookback: usize,
    samples: &[PreparedSample<'_>],
) -> (Gradients, f64) {
    assert!(!samples.is_empty(), "batch_gradients on empty batch");
    let chunks = par::chunked_map(samples, 32, |chunk| {
        let mut grad = Gradients::zeros(w.hidden, w.input_dim);
        let mut scratch = BpttScratch::new(w.hidden, lookback);
        let mut sq_sum = 0.0;
        for sample in chunk {
            sq_sum += accumulate_sample(w, sample, &mut grad, &mut scratch);
        }
        (grad, sq_sum)
    });
    let mut total = Gradients::zeros(w.hidden, w.input_dim);
    let mut sq_sum = 0.0;
    for (grad, sq) in chunks {
        total.add_scaled(&grad, 1.0);
        sq_sum += sq;
    }
    let inv = 1.0 / samples.len() as f64;
    total.scale(inv);
    (total, sq_sum * inv)
}
