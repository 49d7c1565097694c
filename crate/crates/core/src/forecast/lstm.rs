//! Single-layer LSTM cell and window forward pass.
//!
//! Gate rows in the 4H-wide packed layout are ordered input, forget,
//! candidate, output. The dense head is linear. The hot paths write into
//! caller-owned scratch buffers; one scratch serves a whole batch chunk.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Trainable parameters of the single-layer LSTM + dense head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmWeights {
    pub hidden: usize,
    pub input_dim: usize,
    /// Input-to-hidden matrix, `4H x D` row-major.
    pub w_ih: Vec<f64>,
    /// Hidden-to-hidden matrix, `4H x H` row-major.
    pub w_hh: Vec<f64>,
    /// Gate biases, `4H`.
    pub bias: Vec<f64>,
    /// Dense head weights, `H`.
    pub dense_w: Vec<f64>,
    /// Dense head bias.
    pub dense_b: f64,
}

impl LstmWeights {
    pub fn zeros(hidden: usize, input_dim: usize) -> Self {
        LstmWeights {
            hidden,
            input_dim,
            w_ih: vec![0.0; 4 * hidden * input_dim],
            w_hh: vec![0.0; 4 * hidden * hidden],
            bias: vec![0.0; 4 * hidden],
            dense_w: vec![0.0; hidden],
            dense_b: 0.0,
        }
    }

    /// Glorot-uniform initialization with a unit forget-gate bias.
    pub fn glorot(hidden: usize, input_dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut uniform = |limit: f64, len: usize| -> Vec<f64> {
            (0..len)
                .map(|_| (rng.random::<f64>() * 2.0 - 1.0) * limit)
                .collect()
        };
        let lim_ih = (6.0 / (input_dim + 4 * hidden) as f64).sqrt();
        let lim_hh = (6.0 / (hidden + 4 * hidden) as f64).sqrt();
        let lim_dense = (6.0 / (hidden + 1) as f64).sqrt();
        let mut w = LstmWeights {
            hidden,
            input_dim,
            w_ih: uniform(lim_ih, 4 * hidden * input_dim),
            w_hh: uniform(lim_hh, 4 * hidden * hidden),
            bias: vec![0.0; 4 * hidden],
            dense_w: uniform(lim_dense, hidden),
            dense_b: 0.0,
        };
        for b in &mut w.bias[hidden..2 * hidden] {
            *b = 1.0;
        }
        w
    }

    /// Trainable parameter count: `4H(H + D + 1) + H + 1`.
    pub fn param_count(&self) -> usize {
        4 * self.hidden * (self.hidden + self.input_dim + 1) + self.hidden + 1
    }

    /// In-place `self += rhs * factor` over every parameter.
    pub fn add_scaled(&mut self, rhs: &LstmWeights, factor: f64) {
        for (a, b) in self.w_ih.iter_mut().zip(&rhs.w_ih) {
            *a += factor * b;
        }
        for (a, b) in self.w_hh.iter_mut().zip(&rhs.w_hh) {
            *a += factor * b;
        }
        for (a, b) in self.bias.iter_mut().zip(&rhs.bias) {
            *a += factor * b;
        }
        for (a, b) in self.dense_w.iter_mut().zip(&rhs.dense_w) {
            *a += factor * b;
        }
        self.dense_b += factor * rhs.dense_b;
    }

    pub fn scale(&mut self, factor: f64) {
        for v in self.w_ih.iter_mut() {
            *v *= factor;
        }
        for v in self.w_hh.iter_mut() {
            *v *= factor;
        }
        for v in self.bias.iter_mut() {
            *v *= factor;
        }
        for v in self.dense_w.iter_mut() {
            *v *= factor;
        }
        self.dense_b *= factor;
    }
}

/// `exp(x)` as `2^k * e^z` with a degree-9 series on `|z| <= ln(2)/2`.
///
/// Relative error stays below 1e-11; the segment-boundary jumps must sit
/// well under the finite-difference step of the gradient checks (a 1e-8
/// jump would read as a ~5e-4 slope error at h = 1e-5). The gate
/// activations call this thousands of times per window.
#[inline]
pub(crate) fn fast_exp(x: f64) -> f64 {
    let x = x.clamp(-40.0, 40.0);
    let t = x * std::f64::consts::LOG2_E;
    let k = t.round();
    let z = (t - k) * std::f64::consts::LN_2;
    let p = 1.0
        + z * (1.0
            + z * (0.5
                + z * (1.0 / 6.0
                    + z * (1.0 / 24.0
                        + z * (1.0 / 120.0
                            + z * (1.0 / 720.0
                                + z * (1.0 / 5040.0 + z * (1.0 / 40320.0 + z / 362_880.0))))))));
    let scale = f64::from_bits(((k as i64 + 1023) << 52) as u64);
    p * scale
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + fast_exp(-x))
}

#[inline]
pub(crate) fn fast_tanh(x: f64) -> f64 {
    1.0 - 2.0 / (fast_exp(2.0 * x) + 1.0)
}

/// Fixed-order four-accumulator dot product.
#[inline]
fn dot(row: &[f64], x: &[f64]) -> f64 {
    debug_assert_eq!(row.len(), x.len());
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    let mut row4 = row.chunks_exact(4);
    let mut x4 = x.chunks_exact(4);
    for (r, v) in (&mut row4).zip(&mut x4) {
        s0 += r[0] * v[0];
        s1 += r[1] * v[1];
        s2 += r[2] * v[2];
        s3 += r[3] * v[3];
    }
    let mut s = (s0 + s1) + (s2 + s3);
    for (r, v) in row4.remainder().iter().zip(x4.remainder()) {
        s += r * v;
    }
    s
}

/// `out += m[rows x cols] . x`
#[inline]
fn matvec_add(out: &mut [f64], m: &[f64], cols: usize, x: &[f64]) {
    for (r, o) in out.iter_mut().enumerate() {
        *o += dot(&m[r * cols..(r + 1) * cols], x);
    }
}

/// Gate pre-activations for one step: `z = bias + W_ih.x + W_hh.h`.
#[inline]
fn gate_preactivations(z: &mut [f64], x: &[f64], h_prev: &[f64], w: &LstmWeights) {
    z.copy_from_slice(&w.bias);
    matvec_add(z, &w.w_ih, w.input_dim, x);
    matvec_add(z, &w.w_hh, w.hidden, h_prev);
}

/// One LSTM step.
///
/// Returns the new hidden and cell state; all outputs are finite for finite
/// inputs, and `|h_j| <= 1` by the tanh-bounded output product.
pub fn lstm_step(
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    w: &LstmWeights,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if x.len() != w.input_dim || h_prev.len() != w.hidden || c_prev.len() != w.hidden {
        return Err(Error::Shape(format!(
            "lstm_step dims: x {} (want {}), h {} / c {} (want {})",
            x.len(),
            w.input_dim,
            h_prev.len(),
            c_prev.len(),
            w.hidden
        )));
    }
    let hidden = w.hidden;
    let mut z = vec![0.0; 4 * hidden];
    gate_preactivations(&mut z, x, h_prev, w);
    let mut h = vec![0.0; hidden];
    let mut c = vec![0.0; hidden];
    for j in 0..hidden {
        let i = sigmoid(z[j]);
        let f = sigmoid(z[hidden + j]);
        let g = fast_tanh(z[2 * hidden + j]);
        let o = sigmoid(z[3 * hidden + j]);
        c[j] = f * c_prev[j] + i * g;
        h[j] = o * fast_tanh(c[j]);
    }
    Ok((h, c))
}

/// Runs the LSTM over a `lookback x D` window (flat, row-major) from zero
/// state; the final hidden state lands in `h`.
pub(crate) fn run_window_into(w: &LstmWeights, window: &[f64], lookback: usize, h: &mut [f64]) {
    debug_assert_eq!(window.len(), lookback * w.input_dim);
    let hidden = w.hidden;
    let mut z = vec![0.0; 4 * hidden];
    let mut c = vec![0.0; hidden];
    h.iter_mut().for_each(|v| *v = 0.0);
    for t in 0..lookback {
        let x = &window[t * w.input_dim..(t + 1) * w.input_dim];
        gate_preactivations(&mut z, x, h, w);
        for j in 0..hidden {
            let i = sigmoid(z[j]);
            let f = sigmoid(z[hidden + j]);
            let g = fast_tanh(z[2 * hidden + j]);
            let o = sigmoid(z[3 * hidden + j]);
            c[j] = f * c[j] + i * g;
            h[j] = o * fast_tanh(c[j]);
        }
    }
}

/// Convenience wrapper allocating the output state.
pub(crate) fn run_window(w: &LstmWeights, window: &[f64], lookback: usize) -> Vec<f64> {
    let mut h = vec![0.0; w.hidden];
    run_window_into(w, window, lookback, &mut h);
    h
}

/// Reusable buffers for one window's forward + backward pass. Per-step gate
/// activations are stored flat as `lookback x H`.
pub(crate) struct BpttScratch {
    pub hidden: usize,
    pub lookback: usize,
    pub z: Vec<f64>,
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub o: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
    pub dh: Vec<f64>,
    pub dc: Vec<f64>,
    pub dh_next: Vec<f64>,
    pub d_gates: Vec<f64>,
}

impl BpttScratch {
    pub fn new(hidden: usize, lookback: usize) -> Self {
        BpttScratch {
            hidden,
            lookback,
            z: vec![0.0; 4 * hidden],
            i: vec![0.0; lookback * hidden],
            f: vec![0.0; lookback * hidden],
            g: vec![0.0; lookback * hidden],
            o: vec![0.0; lookback * hidden],
            c: vec![0.0; lookback * hidden],
            tanh_c: vec![0.0; lookback * hidden],
            h: vec![0.0; lookback * hidden],
            dh: vec![0.0; hidden],
            dc: vec![0.0; hidden],
            dh_next: vec![0.0; hidden],
            d_gates: vec![0.0; 4 * hidden],
        }
    }

    /// Forward pass over the window, retaining every step's activations.
    /// Returns a borrow of the final hidden state.
    pub fn forward<'a>(&'a mut self, w: &LstmWeights, window: &[f64]) -> &'a [f64] {
        let hidden = self.hidden;
        let lookback = self.lookback;
        debug_assert_eq!(window.len(), lookback * w.input_dim);
        for t in 0..lookback {
            let x = &window[t * w.input_dim..(t + 1) * w.input_dim];
            let (h_prev_start, c_prev) = if t == 0 {
                (0, None)
            } else {
                (hidden * (t - 1), Some(hidden * (t - 1)))
            };
            if t == 0 {
                self.z.copy_from_slice(&w.bias);
                matvec_add(&mut self.z, &w.w_ih, w.input_dim, x);
                // zero initial hidden state: the recurrent term vanishes
            } else {
                let h_prev = &self.h[h_prev_start..h_prev_start + hidden];
                self.z.copy_from_slice(&w.bias);
                matvec_add(&mut self.z, &w.w_ih, w.input_dim, x);
                matvec_add(&mut self.z, &w.w_hh, hidden, h_prev);
            }
            let base = t * hidden;
            for j in 0..hidden {
                let i = sigmoid(self.z[j]);
                let f = sigmoid(self.z[hidden + j]);
                let g = fast_tanh(self.z[2 * hidden + j]);
                let o = sigmoid(self.z[3 * hidden + j]);
                let c_prev_j = match c_prev {
                    Some(start) => self.c[start + j],
                    None => 0.0,
                };
                let c = f * c_prev_j + i * g;
                let tanh_c = fast_tanh(c);
                self.i[base + j] = i;
                self.f[base + j] = f;
                self.g[base + j] = g;
                self.o[base + j] = o;
                self.c[base + j] = c;
                self.tanh_c[base + j] = tanh_c;
                self.h[base + j] = o * tanh_c;
            }
        }
        &self.h[(lookback - 1) * hidden..lookback * hidden]
    }
}

/// Linear dense head on a hidden state.
#[inline]
pub(crate) fn dense(w: &LstmWeights, h: &[f64]) -> f64 {
    let mut acc = w.dense_b;
    for (a, b) in w.dense_w.iter().zip(h) {
        acc += a * b;
    }
    acc
}
