use super::init::Slot;

/// Recurrent state of an LSTM cell.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        LstmState { h: vec![0.0; hidden], c: vec![0.0; hidden] }
    }
}

/// Per-step cache for backpropagation through time.
#[derive(Debug, Clone)]
pub struct LstmCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    /// Post-activation gates, order (i, f, g, o).
    pub gates: Vec<f64>,
    pub c_new: Vec<f64>,
}

/// Single LSTM cell. Weight layout: `w_ih [4H, In]`, `w_hh [4H, H]`,
/// `bias [4H]`, gate order (input, forget, cell, output).
#[derive(Debug, Clone)]
pub struct LstmCell {
    pub input_size: usize,
    pub hidden: usize,
    pub w_ih: Slot,
    pub w_hh: Slot,
    pub bias: Slot,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl LstmCell {
    pub fn param_count(input_size: usize, hidden: usize) -> usize {
        4 * hidden * input_size + 4 * hidden * hidden + 4 * hidden
    }

    pub fn forward(&self, params: &[f64], x: &[f64], state: &LstmState) -> (LstmState, LstmCache) {
        let hn = self.hidden;
        assert_eq!(x.len(), self.input_size);
        assert_eq!(state.h.len(), hn);
        let w_ih = &params[self.w_ih.range()];
        let w_hh = &params[self.w_hh.range()];
        let bias = &params[self.bias.range()];

        let mut z = bias.to_vec();
        for r in 0..4 * hn {
            let row = &w_ih[r * self.input_size..(r + 1) * self.input_size];
            let mut acc = 0.0;
            for (w, v) in row.iter().zip(x) {
                acc += w * v;
            }
            let hrow = &w_hh[r * hn..(r + 1) * hn];
            for (w, v) in hrow.iter().zip(&state.h) {
                acc += w * v;
            }
            z[r] += acc;
        }

        let mut gates = vec![0.0; 4 * hn];
        let mut c_new = vec![0.0; hn];
        let mut h_new = vec![0.0; hn];
        for j in 0..hn {
            let i = sigmoid(z[j]);
            let f = sigmoid(z[hn + j]);
            let g = z[2 * hn + j].tanh();
            let o = sigmoid(z[3 * hn + j]);
            gates[j] = i;
            gates[hn + j] = f;
            gates[2 * hn + j] = g;
            gates[3 * hn + j] = o;
            c_new[j] = f * state.c[j] + i * g;
            h_new[j] = o * c_new[j].tanh();
        }
        let cache = LstmCache {
            x: x.to_vec(),
            h_prev: state.h.clone(),
            c_prev: state.c.clone(),
            gates,
            c_new: c_new.clone(),
        };
        (LstmState { h: h_new, c: c_new }, cache)
    }

    /// Backward through one step. `grad_h`/`grad_c` are gradients w.r.t. the
    /// step's output state; returns (grad_x, grad_h_prev, grad_c_prev) and
    /// accumulates weight gradients into `grads`.
    pub fn backward(
        &self,
        params: &[f64],
        cache: &LstmCache,
        grad_h: &[f64],
        grad_c: &[f64],
        grads: &mut [f64],
    ) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let hn = self.hidden;
        let w_ih = &params[self.w_ih.range()];
        let w_hh = &params[self.w_hh.range()];

        // Gradients w.r.t. pre-activation gate inputs z.
        let mut dz = vec![0.0; 4 * hn];
        let mut grad_c_prev = vec![0.0; hn];
        for j in 0..hn {
            let i = cache.gates[j];
            let f = cache.gates[hn + j];
            let g = cache.gates[2 * hn + j];
            let o = cache.gates[3 * hn + j];
            let tc = cache.c_new[j].tanh();
            // dL/dc through h = o * tanh(c) plus direct grad_c.
            let dc = grad_c[j] + grad_h[j] * o * (1.0 - tc * tc);
            dz[j] = dc * g * i * (1.0 - i); // input gate
            dz[hn + j] = dc * cache.c_prev[j] * f * (1.0 - f); // forget gate
            dz[2 * hn + j] = dc * i * (1.0 - g * g); // cell gate
            dz[3 * hn + j] = grad_h[j] * tc * o * (1.0 - o); // output gate
            grad_c_prev[j] = dc * f;
        }

        let mut grad_x = vec![0.0; self.input_size];
        let mut grad_h_prev = vec![0.0; hn];
        {
            let gw_ih = &mut grads[self.w_ih.range()];
            for r in 0..4 * hn {
                let d = dz[r];
                if d == 0.0 {
                    continue;
                }
                let row = &mut gw_ih[r * self.input_size..(r + 1) * self.input_size];
                for (gw, xv) in row.iter_mut().zip(&cache.x) {
                    *gw += d * xv;
                }
            }
        }
        {
            let gw_hh = &mut grads[self.w_hh.range()];
            for r in 0..4 * hn {
                let d = dz[r];
                if d == 0.0 {
                    continue;
                }
                let row = &mut gw_hh[r * hn..(r + 1) * hn];
                for (gw, hv) in row.iter_mut().zip(&cache.h_prev) {
                    *gw += d * hv;
                }
            }
        }
        {
            let gb = &mut grads[self.bias.range()];
            for (g, d) in gb.iter_mut().zip(&dz) {
                *g += d;
            }
        }
        for r in 0..4 * hn {
            let d = dz[r];
            if d == 0.0 {
                continue;
            }
            let row = &w_ih[r * self.input_size..(r + 1) * self.input_size];
            for (gx, w) in grad_x.iter_mut().zip(row) {
                *gx += d * w;
            }
            let hrow = &w_hh[r * hn..(r + 1) * hn];
            for (gh, w) in grad_h_prev.iter_mut().zip(hrow) {
                *gh += d * w;
            }
        }
        (grad_x, grad_h_prev, grad_c_prev)
    }
}
