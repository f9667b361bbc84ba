use super::init::Slot;
use super::tensor::Tensor;
use rayon::prelude::*;

/// Spatial padding applied symmetrically in y and x, possibly asymmetric
/// between the leading and trailing edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    Zero { before: usize, after: usize },
    Reflect { before: usize, after: usize },
}

impl Padding {
    pub fn zero(p: usize) -> Self {
        Padding::Zero { before: p, after: p }
    }

    pub fn reflect(p: usize) -> Self {
        Padding::Reflect { before: p, after: p }
    }

    fn amounts(&self) -> (usize, usize) {
        match *self {
            Padding::Zero { before, after } | Padding::Reflect { before, after } => (before, after),
        }
    }
}

const PAR_FLOP_THRESHOLD: usize = 1 << 20;

/// C = A @ B for row-major buffers, parallelized over rows of A.
/// Each output element is produced by exactly one thread, so the result is
/// independent of scheduling.
pub(crate) fn matmul(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    assert_eq!(a.len(), m * k);
    assert_eq!(b.len(), k * n);
    let mut c = vec![0.0; m * n];
    let work = m * k * n;
    let row = |ci: &mut [f64], ai: &[f64]| {
        for (kk, &av) in ai.iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            let brow = &b[kk * n..(kk + 1) * n];
            for (cv, bv) in ci.iter_mut().zip(brow) {
                *cv += av * bv;
            }
        }
    };
    if work >= PAR_FLOP_THRESHOLD && m > 1 {
        c.par_chunks_mut(n)
            .zip(a.par_chunks(k))
            .for_each(|(ci, ai)| row(ci, ai));
    } else {
        for (ci, ai) in c.chunks_mut(n).zip(a.chunks(k)) {
            row(ci, ai);
        }
    }
    c
}

fn reflect_index(i: isize, len: usize) -> usize {
    let len = len as isize;
    let mut j = i;
    if j < 0 {
        j = -j;
    }
    if j >= len {
        j = 2 * (len - 1) - j;
    }
    debug_assert!(j >= 0 && j < len);
    j as usize
}

/// Pad a CHW tensor spatially according to `pad`.
pub(crate) fn pad_image(x: &Tensor, pad: Padding) -> Tensor {
    let (pb, pa) = pad.amounts();
    if pb == 0 && pa == 0 {
        return x.clone();
    }
    let (c, h, w) = x.dims3();
    let (hp, wp) = (h + pb + pa, w + pb + pa);
    let mut out = Tensor::zeros(vec![c, hp, wp]);
    for ch in 0..c {
        for y in 0..hp {
            let sy = match pad {
                Padding::Zero { .. } => {
                    let yy = y as isize - pb as isize;
                    if yy < 0 || yy >= h as isize {
                        continue;
                    }
                    yy as usize
                }
                Padding::Reflect { .. } => reflect_index(y as isize - pb as isize, h),
            };
            for xx in 0..wp {
                let sx = match pad {
                    Padding::Zero { .. } => {
                        let v = xx as isize - pb as isize;
                        if v < 0 || v >= w as isize {
                            continue;
                        }
                        v as usize
                    }
                    Padding::Reflect { .. } => reflect_index(xx as isize - pb as isize, w),
                };
                out.set3(ch, y, xx, x.at3(ch, sy, sx));
            }
        }
    }
    out
}

/// Fold a gradient over the padded image back onto the original extent.
fn unpad_backward(grad_padded: &Tensor, pad: Padding, h: usize, w: usize) -> Tensor {
    let (pb, _pa) = pad.amounts();
    let (c, hp, wp) = grad_padded.dims3();
    let mut grad = Tensor::zeros(vec![c, h, w]);
    for ch in 0..c {
        for y in 0..hp {
            for x in 0..wp {
                let g = grad_padded.at3(ch, y, x);
                if g == 0.0 {
                    continue;
                }
                match pad {
                    Padding::Zero { .. } => {
                        let (sy, sx) = (y as isize - pb as isize, x as isize - pb as isize);
                        if sy >= 0 && sy < h as isize && sx >= 0 && sx < w as isize {
                            let cur = grad.at3(ch, sy as usize, sx as usize);
                            grad.set3(ch, sy as usize, sx as usize, cur + g);
                        }
                    }
                    Padding::Reflect { .. } => {
                        let sy = reflect_index(y as isize - pb as isize, h);
                        let sx = reflect_index(x as isize - pb as isize, w);
                        let cur = grad.at3(ch, sy, sx);
                        grad.set3(ch, sy, sx, cur + g);
                    }
                }
            }
        }
    }
    grad
}

/// Unfold a padded CHW tensor into a `[c*k*k, out_h*out_w]` column matrix.
pub fn im2col(xp: &Tensor, k: usize, stride: usize) -> (Vec<f64>, usize, usize) {
    let (c, hp, wp) = xp.dims3();
    assert!(hp >= k && wp >= k, "kernel {k} larger than padded input {hp}x{wp}");
    let out_h = (hp - k) / stride + 1;
    let out_w = (wp - k) / stride + 1;
    let patches = out_h * out_w;
    let mut cols = vec![0.0; c * k * k * patches];
    let src = xp.data();
    for ch in 0..c {
        for ky in 0..k {
            for kx in 0..k {
                let row = ((ch * k + ky) * k + kx) * patches;
                for oy in 0..out_h {
                    let sy = oy * stride + ky;
                    let src_base = (ch * hp + sy) * wp + kx;
                    let dst_base = row + oy * out_w;
                    for ox in 0..out_w {
                        cols[dst_base + ox] = src[src_base + ox * stride];
                    }
                }
            }
        }
    }
    (cols, out_h, out_w)
}

/// Scatter-add a column matrix back into padded-image layout (inverse of
/// [`im2col`] up to summation of overlapping patches).
pub fn col2im(
    cols: &[f64],
    c: usize,
    hp: usize,
    wp: usize,
    k: usize,
    stride: usize,
) -> Tensor {
    let out_h = (hp - k) / stride + 1;
    let out_w = (wp - k) / stride + 1;
    let patches = out_h * out_w;
    assert_eq!(cols.len(), c * k * k * patches);
    let mut out = Tensor::zeros(vec![c, hp, wp]);
    let dst = out.data_mut();
    for ch in 0..c {
        for ky in 0..k {
            for kx in 0..k {
                let row = ((ch * k + ky) * k + kx) * patches;
                for oy in 0..out_h {
                    let sy = oy * stride + ky;
                    let dst_base = (ch * hp + sy) * wp + kx;
                    let src_base = row + oy * out_w;
                    for ox in 0..out_w {
                        dst[dst_base + ox * stride] += cols[src_base + ox];
                    }
                }
            }
        }
    }
    out
}

/// 2-D convolution with weight layout `[out_ch, in_ch, k, k]`.
#[derive(Debug, Clone)]
pub struct Conv2d {
    pub in_ch: usize,
    pub out_ch: usize,
    pub k: usize,
    pub stride: usize,
    pub pad: Padding,
    pub weight: Slot,
    pub bias: Slot,
}

impl Conv2d {
    pub fn out_size(&self, h: usize) -> usize {
        let (pb, pa) = self.pad.amounts();
        (h + pb + pa - self.k) / self.stride + 1
    }

    pub fn forward(&self, params: &[f64], x: &Tensor) -> Tensor {
        let (c, h, _w) = x.dims3();
        assert_eq!(c, self.in_ch, "conv input channels {c} != {}", self.in_ch);
        let xp = pad_image(x, self.pad);
        let (cols, out_h, out_w) = im2col(&xp, self.k, self.stride);
        let kk = self.in_ch * self.k * self.k;
        let w = &params[self.weight.range()];
        let mut out = matmul(w, &cols, self.out_ch, kk, out_h * out_w);
        let b = &params[self.bias.range()];
        for oc in 0..self.out_ch {
            let bias = b[oc];
            for v in &mut out[oc * out_h * out_w..(oc + 1) * out_h * out_w] {
                *v += bias;
            }
        }
        debug_assert_eq!(out_h, self.out_size(h));
        Tensor::from_vec(vec![self.out_ch, out_h, out_w], out)
    }

    /// Backward pass. Recomputes the column matrix from `x` rather than
    /// caching it, trading time for a much smaller activation footprint.
    pub fn backward(
        &self,
        params: &[f64],
        x: &Tensor,
        grad_out: &Tensor,
        grads: &mut [f64],
    ) -> Tensor {
        let (_, h, w) = x.dims3();
        let xp = pad_image(x, self.pad);
        let (_, hp, wp) = xp.dims3();
        let (cols, out_h, out_w) = im2col(&xp, self.k, self.stride);
        let patches = out_h * out_w;
        let kk = self.in_ch * self.k * self.k;
        let g = grad_out.data();
        assert_eq!(g.len(), self.out_ch * patches);

        // grad_w[oc, j] += sum_p g[oc, p] * cols[j, p]
        {
            let gw = &mut grads[self.weight.range()];
            for oc in 0..self.out_ch {
                let grow = &g[oc * patches..(oc + 1) * patches];
                let wrow = &mut gw[oc * kk..(oc + 1) * kk];
                for j in 0..kk {
                    let crow = &cols[j * patches..(j + 1) * patches];
                    let mut acc = 0.0;
                    for (gv, cv) in grow.iter().zip(crow) {
                        acc += gv * cv;
                    }
                    wrow[j] += acc;
                }
            }
            let gb = &mut grads[self.bias.range()];
            for oc in 0..self.out_ch {
                gb[oc] += g[oc * patches..(oc + 1) * patches].iter().sum::<f64>();
            }
        }

        // grad_cols = W^T @ g, then fold back to image layout.
        let wmat = &params[self.weight.range()];
        let mut wt = vec![0.0; kk * self.out_ch];
        for oc in 0..self.out_ch {
            for j in 0..kk {
                wt[j * self.out_ch + oc] = wmat[oc * kk + j];
            }
        }
        let grad_cols = matmul(&wt, g, kk, self.out_ch, patches);
        let grad_padded = col2im(&grad_cols, self.in_ch, hp, wp, self.k, self.stride);
        unpad_backward(&grad_padded, self.pad, h, w)
    }
}

/// Transposed 2-D convolution with weight layout `[in_ch, out_ch, k, k]`.
/// Output size is `(in - 1) * stride - 2 * pad + k + output_pad`.
#[derive(Debug, Clone)]
pub struct ConvTranspose2d {
    pub in_ch: usize,
    pub out_ch: usize,
    pub k: usize,
    pub stride: usize,
    pub pad: usize,
    pub output_pad: usize,
    pub weight: Slot,
    pub bias: Slot,
}

impl ConvTranspose2d {
    pub fn out_size(&self, h: usize) -> usize {
        (h - 1) * self.stride + self.k + self.output_pad - 2 * self.pad
    }

    pub fn forward(&self, params: &[f64], x: &Tensor) -> Tensor {
        let (c, h, w) = x.dims3();
        assert_eq!(c, self.in_ch);
        let (oh, ow) = (self.out_size(h), self.out_size(w));
        let wmat = &params[self.weight.range()];
        let b = &params[self.bias.range()];
        let mut out = Tensor::zeros(vec![self.out_ch, oh, ow]);
        {
            let dst = out.data_mut();
            for oc in 0..self.out_ch {
                let bias = b[oc];
                for v in &mut dst[oc * oh * ow..(oc + 1) * oh * ow] {
                    *v = bias;
                }
            }
            let src = x.data();
            for ic in 0..self.in_ch {
                for iy in 0..h {
                    for ix in 0..w {
                        let xv = src[(ic * h + iy) * w + ix];
                        if xv == 0.0 {
                            continue;
                        }
                        for ky in 0..self.k {
                            let oy = (iy * self.stride + ky) as isize - self.pad as isize;
                            if oy < 0 || oy >= oh as isize {
                                continue;
                            }
                            for kx in 0..self.k {
                                let ox = (ix * self.stride + kx) as isize - self.pad as isize;
                                if ox < 0 || ox >= ow as isize {
                                    continue;
                                }
                                for oc in 0..self.out_ch {
                                    let wv = wmat[((ic * self.out_ch + oc) * self.k + ky)
                                        * self.k
                                        + kx];
                                    dst[(oc * oh + oy as usize) * ow + ox as usize] += xv * wv;
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn backward(
        &self,
        params: &[f64],
        x: &Tensor,
        grad_out: &Tensor,
        grads: &mut [f64],
    ) -> Tensor {
        let (_, h, w) = x.dims3();
        let (_, oh, ow) = grad_out.dims3();
        let wmat = &params[self.weight.range()];
        let g = grad_out.data();
        let src = x.data();
        let mut grad_x = Tensor::zeros(vec![self.in_ch, h, w]);
        {
            let gw = &mut grads[self.weight.range()];
            let gx = grad_x.data_mut();
            for ic in 0..self.in_ch {
                for iy in 0..h {
                    for ix in 0..w {
                        let xv = src[(ic * h + iy) * w + ix];
                        let mut acc = 0.0;
                        for ky in 0..self.k {
                            let oy = (iy * self.stride + ky) as isize - self.pad as isize;
                            if oy < 0 || oy >= oh as isize {
                                continue;
                            }
                            for kx in 0..self.k {
                                let ox = (ix * self.stride + kx) as isize - self.pad as isize;
                                if ox < 0 || ox >= ow as isize {
                                    continue;
                                }
                                for oc in 0..self.out_ch {
                                    let widx =
                                        ((ic * self.out_ch + oc) * self.k + ky) * self.k + kx;
                                    let gv = g[(oc * oh + oy as usize) * ow + ox as usize];
                                    acc += gv * wmat[widx];
                                    gw[widx] += xv * gv;
                                }
                            }
                        }
                        gx[(ic * h + iy) * w + ix] = acc;
                    }
                }
            }
            let gb = &mut grads[self.bias.range()];
            for oc in 0..self.out_ch {
                gb[oc] += g[oc * oh * ow..(oc + 1) * oh * ow].iter().sum::<f64>();
            }
        }
        grad_x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::init::ParamAlloc;

    fn simple_conv(in_ch: usize, out_ch: usize, k: usize, stride: usize, pad: Padding) -> (Conv2d, Vec<f64>) {
        let mut alloc = ParamAlloc::new();
        let weight = alloc.slot(out_ch * in_ch * k * k);
        let bias = alloc.slot(out_ch);
        let conv = Conv2d { in_ch, out_ch, k, stride, pad, weight, bias };
        (conv, vec![0.0; alloc.total()])
    }

    #[test]
    fn identity_kernel_passthrough() {
        let (conv, mut params) = simple_conv(1, 1, 3, 1, Padding::zero(1));
        params[conv.weight.offset + 4] = 1.0; // center tap
        let x = Tensor::from_fn(vec![1, 4, 4], |i| i as f64);
        let y = conv.forward(&params, &x);
        assert_eq!(y.shape(), &[1, 4, 4]);
        assert_eq!(y.data(), x.data());
    }

    #[test]
    fn stride_two_halves_even_sizes() {
        let (conv, params) = simple_conv(2, 3, 3, 2, Padding::reflect(1));
        let x = Tensor::from_fn(vec![2, 8, 8], |i| (i as f64).cos());
        let y = conv.forward(&params, &x);
        assert_eq!(y.shape(), &[3, 4, 4]);
    }

    #[test]
    fn asymmetric_zero_pad_keeps_size_with_k4() {
        let (conv, params) = simple_conv(1, 1, 4, 1, Padding::Zero { before: 1, after: 2 });
        let x = Tensor::zeros(vec![1, 28, 28]);
        let y = conv.forward(&params, &x);
        assert_eq!(y.shape(), &[1, 28, 28]);
    }

    #[test]
    fn transpose_doubles_size() {
        let mut alloc = ParamAlloc::new();
        let weight = alloc.slot(2 * 3 * 3 * 3);
        let bias = alloc.slot(3);
        let up = ConvTranspose2d {
            in_ch: 2,
            out_ch: 3,
            k: 3,
            stride: 2,
            pad: 1,
            output_pad: 1,
            weight,
            bias,
        };
        let params = vec![0.1; alloc.total()];
        let x = Tensor::from_fn(vec![2, 5, 5], |i| i as f64 * 0.01);
        let y = up.forward(&params, &x);
        assert_eq!(y.shape(), &[3, 10, 10]);
    }

    #[test]
    fn im2col_col2im_adjoint() {
        // <im2col(x), c> == <x, col2im(c)> for zero-padded layout.
        let x = Tensor::from_fn(vec![2, 5, 5], |i| ((i * 37) % 11) as f64 - 5.0);
        let (cols, oh, ow) = im2col(&x, 3, 2);
        let c: Vec<f64> = (0..cols.len()).map(|i| ((i * 13) % 7) as f64 - 3.0).collect();
        let lhs: f64 = cols.iter().zip(&c).map(|(a, b)| a * b).sum();
        let folded = col2im(&c, 2, 5, 5, 3, 2);
        let rhs: f64 = folded.data().iter().zip(x.data()).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-9, "{lhs} vs {rhs}, {oh}x{ow}");
    }
}
