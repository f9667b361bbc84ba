//! Finite-difference checks for every hand-written backward pass in `nn`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sim2real_core::nn::{
    central_difference, max_rel_error, relu, relu_backward, standardize, standardize_backward,
    tanh, tanh_backward, Conv2d, ConvTranspose2d, LstmCell, LstmState, Padding, ParamAlloc,
    Tensor,
};

const TOL: f64 = 1e-4;
const H: f64 = 1e-5;

fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Fixed projection so the scalar objective exercises every output element.
fn project(t: &Tensor, weights: &[f64]) -> f64 {
    t.data().iter().zip(weights).map(|(a, b)| a * b).sum()
}

#[test]
fn conv2d_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for trial in 0..5 {
        let (in_ch, out_ch, k, stride) = (2, 3, 3, 1 + trial % 2);
        let mut alloc = ParamAlloc::new();
        let weight = alloc.slot(out_ch * in_ch * k * k);
        let bias = alloc.slot(out_ch);
        let pad = if trial % 2 == 0 { Padding::zero(1) } else { Padding::reflect(1) };
        let conv = Conv2d { in_ch, out_ch, k, stride, pad, weight, bias };
        let n_img = in_ch * 5 * 5;
        // Input is appended to the parameter vector so one sweep checks both.
        let mut theta = rand_vec(&mut rng, alloc.total() + n_img);
        let proj = rand_vec(&mut rng, out_ch * conv.out_size(5) * conv.out_size(5));

        let eval = |th: &[f64]| {
            let x = Tensor::from_vec(vec![in_ch, 5, 5], th[alloc.total()..].to_vec());
            project(&conv.forward(&th[..alloc.total()], &x), &proj)
        };
        let numeric = central_difference(&mut theta, H, eval);

        let x = Tensor::from_vec(vec![in_ch, 5, 5], theta[alloc.total()..].to_vec());
        let y = conv.forward(&theta[..alloc.total()], &x);
        let grad_out = Tensor::from_vec(y.shape().to_vec(), proj.clone());
        let mut grads = vec![0.0; alloc.total()];
        let grad_x = conv.backward(&theta[..alloc.total()], &x, &grad_out, &mut grads);
        let mut analytic = grads;
        analytic.extend_from_slice(grad_x.data());

        let err = max_rel_error(&analytic, &numeric);
        assert!(err < TOL, "conv trial {trial}: rel error {err}");
    }
}

#[test]
fn conv_transpose_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for trial in 0..4 {
        let (in_ch, out_ch, k) = (2, 2, 3);
        let mut alloc = ParamAlloc::new();
        let weight = alloc.slot(in_ch * out_ch * k * k);
        let bias = alloc.slot(out_ch);
        let up = ConvTranspose2d {
            in_ch,
            out_ch,
            k,
            stride: 2,
            pad: 1,
            output_pad: 1,
            weight,
            bias,
        };
        let n_img = in_ch * 4 * 4;
        let mut theta = rand_vec(&mut rng, alloc.total() + n_img);
        let out_side = up.out_size(4);
        let proj = rand_vec(&mut rng, out_ch * out_side * out_side);

        let eval = |th: &[f64]| {
            let x = Tensor::from_vec(vec![in_ch, 4, 4], th[alloc.total()..].to_vec());
            project(&up.forward(&th[..alloc.total()], &x), &proj)
        };
        let numeric = central_difference(&mut theta, H, eval);

        let x = Tensor::from_vec(vec![in_ch, 4, 4], theta[alloc.total()..].to_vec());
        let y = up.forward(&theta[..alloc.total()], &x);
        let grad_out = Tensor::from_vec(y.shape().to_vec(), proj.clone());
        let mut grads = vec![0.0; alloc.total()];
        let grad_x = up.backward(&theta[..alloc.total()], &x, &grad_out, &mut grads);
        let mut analytic = grads;
        analytic.extend_from_slice(grad_x.data());

        let err = max_rel_error(&analytic, &numeric);
        assert!(err < TOL, "conv_transpose trial {trial}: rel error {err}");
    }
}

#[test]
fn standardize_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for trial in 0..5 {
        let shape = vec![2, 4, 4];
        let n: usize = shape.iter().product();
        let mut theta = rand_vec(&mut rng, n);
        let proj = rand_vec(&mut rng, n);
        let eps = 1e-8;

        let eval = |th: &[f64]| {
            let x = Tensor::from_vec(shape.clone(), th.to_vec());
            let (y, _) = standardize(&x, eps);
            project(&y, &proj)
        };
        let numeric = central_difference(&mut theta, H, eval);

        let x = Tensor::from_vec(shape.clone(), theta.clone());
        let (y, stats) = standardize(&x, eps);
        let grad_out = Tensor::from_vec(y.shape().to_vec(), proj.clone());
        let analytic = standardize_backward(&x, &stats, &grad_out, eps);

        let err = max_rel_error(analytic.data(), &numeric);
        assert!(err < TOL, "standardize trial {trial}: rel error {err}");
    }
}

#[test]
fn activation_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let shape = vec![1, 3, 3];
    let mut theta = rand_vec(&mut rng, 9);
    // Keep values away from the ReLU kink so the numeric derivative is clean.
    for v in theta.iter_mut() {
        if v.abs() < 0.05 {
            *v += 0.1;
        }
    }
    let proj = rand_vec(&mut rng, 9);

    let eval_relu = |th: &[f64]| project(&relu(&Tensor::from_vec(shape.clone(), th.to_vec())), &proj);
    let numeric = central_difference(&mut theta, H, eval_relu);
    let x = Tensor::from_vec(shape.clone(), theta.clone());
    let g = Tensor::from_vec(shape.clone(), proj.clone());
    let analytic = relu_backward(&x, &g);
    assert!(max_rel_error(analytic.data(), &numeric) < TOL);

    let eval_tanh = |th: &[f64]| project(&tanh(&Tensor::from_vec(shape.clone(), th.to_vec())), &proj);
    let numeric = central_difference(&mut theta, H, eval_tanh);
    let y = tanh(&x);
    let analytic = tanh_backward(&y, &g);
    assert!(max_rel_error(analytic.data(), &numeric) < TOL);
}

#[test]
fn lstm_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    let (input_size, hidden) = (5, 4);
    let mut alloc = ParamAlloc::new();
    let w_ih = alloc.slot(4 * hidden * input_size);
    let w_hh = alloc.slot(4 * hidden * hidden);
    let bias = alloc.slot(4 * hidden);
    let cell = LstmCell { input_size, hidden, w_ih, w_hh, bias };
    let n_extra = input_size + 2 * hidden; // x, h0, c0
    let mut theta = rand_vec(&mut rng, alloc.total() + n_extra);
    let proj_h = rand_vec(&mut rng, hidden);
    let proj_c = rand_vec(&mut rng, hidden);

    let split = |th: &[f64]| {
        let x = th[alloc.total()..alloc.total() + input_size].to_vec();
        let h = th[alloc.total() + input_size..alloc.total() + input_size + hidden].to_vec();
        let c = th[alloc.total() + input_size + hidden..].to_vec();
        (x, LstmState { h, c })
    };
    let eval = |th: &[f64]| {
        let (x, st) = split(th);
        let (out, _) = cell.forward(&th[..alloc.total()], &x, &st);
        out.h.iter().zip(&proj_h).map(|(a, b)| a * b).sum::<f64>()
            + out.c.iter().zip(&proj_c).map(|(a, b)| a * b).sum::<f64>()
    };
    let numeric = central_difference(&mut theta, H, eval);

    let (x, st) = split(&theta);
    let (_, cache) = cell.forward(&theta[..alloc.total()], &x, &st);
    let mut grads = vec![0.0; alloc.total()];
    let (gx, gh, gc) =
        cell.backward(&theta[..alloc.total()], &cache, &proj_h, &proj_c, &mut grads);
    let mut analytic = grads;
    analytic.extend_from_slice(&gx);
    analytic.extend_from_slice(&gh);
    analytic.extend_from_slice(&gc);

    let err = max_rel_error(&analytic, &numeric);
    assert!(err < TOL, "lstm rel error {err}");
}
