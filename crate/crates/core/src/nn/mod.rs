//! Minimal f64 neural-network toolkit with explicit backward passes.
//!
//! Everything here is deterministic: forward and backward passes are pure
//! functions of their inputs, parallel loops split work along fixed
//! boundaries, and no reduction order depends on thread scheduling. That is
//! what makes bit-identical reruns and finite-difference gradient checks
//! possible further up the stack.

mod conv;
mod gradcheck;
mod init;
mod lstm;
mod optim;
mod tensor;

pub use conv::{col2im, im2col, Conv2d, ConvTranspose2d, Padding};
pub use gradcheck::{central_difference, max_rel_error};
pub use init::{normal_init, orthogonal_init, ParamAlloc, Slot};
pub use lstm::{LstmCell, LstmState};
pub use optim::{clip_grad_norm, Adam, RmsProp};
pub use tensor::Tensor;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },
    #[error("non-finite value encountered in {context}")]
    NonFinite { context: String },
}

/// Leaky ReLU forward, elementwise.
pub fn leaky_relu(x: &Tensor, slope: f64) -> Tensor {
    x.map(|v| if v >= 0.0 { v } else { slope * v })
}

/// Gradient of leaky ReLU given the pre-activation input.
pub fn leaky_relu_backward(x: &Tensor, grad_out: &Tensor, slope: f64) -> Tensor {
    x.zip_map(grad_out, |v, g| if v >= 0.0 { g } else { slope * g })
}

pub fn relu(x: &Tensor) -> Tensor {
    x.map(|v| v.max(0.0))
}

pub fn relu_backward(x: &Tensor, grad_out: &Tensor) -> Tensor {
    x.zip_map(grad_out, |v, g| if v >= 0.0 { g } else { 0.0 })
}

pub fn tanh(x: &Tensor) -> Tensor {
    x.map(f64::tanh)
}

/// Gradient of tanh given the *output* of the forward pass.
pub fn tanh_backward(y: &Tensor, grad_out: &Tensor) -> Tensor {
    y.zip_map(grad_out, |t, g| g * (1.0 - t * t))
}

/// Per-channel standardization over the spatial extent of a CHW tensor:
/// `y = (x - mean) / (std + eps)` with population statistics.
///
/// Returns the output plus the per-channel `(mean, std)` needed by
/// [`standardize_backward`].
pub fn standardize(x: &Tensor, eps: f64) -> (Tensor, Vec<(f64, f64)>) {
    let (c, h, w) = x.dims3();
    let n = (h * w) as f64;
    let mut out = Tensor::zeros(vec![c, h, w]);
    let mut stats = Vec::with_capacity(c);
    for ch in 0..c {
        let plane = &x.data()[ch * h * w..(ch + 1) * h * w];
        let mean = plane.iter().sum::<f64>() / n;
        let var = plane.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        let denom = std + eps;
        let dst = &mut out.data_mut()[ch * h * w..(ch + 1) * h * w];
        for (d, v) in dst.iter_mut().zip(plane) {
            *d = (v - mean) / denom;
        }
        stats.push((mean, std));
    }
    (out, stats)
}

/// Backward pass of [`standardize`]. `x` is the forward input.
pub fn standardize_backward(
    x: &Tensor,
    stats: &[(f64, f64)],
    grad_out: &Tensor,
    eps: f64,
) -> Tensor {
    let (c, h, w) = x.dims3();
    let n = (h * w) as f64;
    let mut grad_in = Tensor::zeros(vec![c, h, w]);
    for ch in 0..c {
        let (mean, std) = stats[ch];
        let s = std + eps;
        let xs = &x.data()[ch * h * w..(ch + 1) * h * w];
        let gs = &grad_out.data()[ch * h * w..(ch + 1) * h * w];
        let g_mean = gs.iter().sum::<f64>() / n;
        // S = sum_i g_i * (x_i - mean)
        let s_dot: f64 = gs.iter().zip(xs).map(|(g, v)| g * (v - mean)).sum();
        let dst = &mut grad_in.data_mut()[ch * h * w..(ch + 1) * h * w];
        for ((d, g), v) in dst.iter_mut().zip(gs).zip(xs) {
            let mut grad = (g - g_mean) / s;
            if std > 1e-30 {
                grad -= (v - mean) * s_dot / (n * std * s * s);
            }
            *d = grad;
        }
    }
    grad_in
}

/// Softmax over a flat logit slice.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// log(sum(exp(logits))) computed stably.
pub fn log_sum_exp(logits: &[f64]) -> f64 {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln()
}

/// Shannon entropy of a probability vector.
pub fn entropy(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standardize_zeroes_constant_input() {
        let x = Tensor::from_vec(vec![2, 3, 3], vec![5.0; 18]);
        let (y, _) = standardize(&x, 1e-8);
        assert!(y.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn standardize_mean_zero_std_one() {
        let x = Tensor::from_fn(vec![3, 4, 4], |i| (i as f64 * 0.37).sin() * 2.0 + 0.5);
        let (y, _) = standardize(&x, 1e-8);
        let (c, h, w) = y.dims3();
        let n = (h * w) as f64;
        for ch in 0..c {
            let plane = &y.data()[ch * h * w..(ch + 1) * h * w];
            let mean = plane.iter().sum::<f64>() / n;
            let var = plane.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            assert!(mean.abs() <= 1e-6, "mean {mean}");
            assert!((var.sqrt() - 1.0).abs() <= 1e-3, "std {}", var.sqrt());
        }
    }

    #[test]
    fn leaky_relu_slope() {
        let x = Tensor::from_vec(vec![1, 1, 2], vec![-1.0, 1.0]);
        let y = leaky_relu(&x, 0.2);
        assert_eq!(y.data(), &[-0.2, 1.0]);
    }

    #[test]
    fn softmax_uniform_entropy() {
        let p = softmax(&[0.0; 7]);
        assert!((entropy(&p) - (7.0f64).ln()).abs() < 1e-9);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
