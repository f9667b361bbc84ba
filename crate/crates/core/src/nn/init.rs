use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Contiguous range inside a flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub offset: usize,
    pub len: usize,
}

impl Slot {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len
    }
}

/// Sequential allocator for slots in a flat parameter vector.
#[derive(Debug, Default)]
pub struct ParamAlloc {
    total: usize,
}

impl ParamAlloc {
    pub fn new() -> Self {
        ParamAlloc { total: 0 }
    }

    pub fn slot(&mut self, len: usize) -> Slot {
        let s = Slot { offset: self.total, len };
        self.total += len;
        s
    }

    pub fn total(&self) -> usize {
        self.total
    }
}

/// Fill a slice with draws from Normal(0, std^2).
pub fn normal_init<R: Rng>(rng: &mut R, out: &mut [f64], std: f64) {
    for v in out.iter_mut() {
        let z: f64 = StandardNormal.sample(rng);
        *v = z * std;
    }
}

/// Fill `out`, viewed as a `rows x cols` matrix, with an orthogonal (or
/// row/column-orthonormal) matrix obtained from the QR decomposition of a
/// Gaussian draw, sign-corrected so the factorization is unique.
pub fn orthogonal_init<R: Rng>(rng: &mut R, out: &mut [f64], rows: usize, cols: usize) {
    assert_eq!(out.len(), rows * cols);
    let transpose = rows < cols;
    let (m, n) = if transpose { (cols, rows) } else { (rows, cols) };
    let mut a = vec![0.0; m * n];
    normal_init(rng, &mut a, 1.0);
    let (q, r_diag) = thin_qr(&mut a, m, n);
    // q is m x n with orthonormal columns; flip column signs by sign(diag(R)).
    let mut qs = q;
    for j in 0..n {
        if r_diag[j] < 0.0 {
            for i in 0..m {
                qs[i * n + j] = -qs[i * n + j];
            }
        }
    }
    if transpose {
        for i in 0..rows {
            for j in 0..cols {
                out[i * cols + j] = qs[j * n + i];
            }
        }
    } else {
        out.copy_from_slice(&qs);
    }
}

/// Householder thin QR of an m x n matrix (m >= n). Consumes `a`, returns
/// (Q thin m x n, diag(R)).
fn thin_qr(a: &mut [f64], m: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= n);
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut r_diag = vec![0.0; n];
    for k in 0..n {
        // Householder vector for column k below the diagonal.
        let mut norm = 0.0;
        for i in k..m {
            norm += a[i * n + k] * a[i * n + k];
        }
        let norm = norm.sqrt();
        let alpha = if a[k * n + k] >= 0.0 { -norm } else { norm };
        let mut v = vec![0.0; m];
        let mut vnorm2 = 0.0;
        for i in k..m {
            v[i] = a[i * n + k];
        }
        v[k] -= alpha;
        for i in k..m {
            vnorm2 += v[i] * v[i];
        }
        if vnorm2 > 1e-300 {
            // Apply H = I - 2 v v^T / (v^T v) to the remaining columns.
            for j in k..n {
                let mut dot = 0.0;
                for i in k..m {
                    dot += v[i] * a[i * n + j];
                }
                let f = 2.0 * dot / vnorm2;
                for i in k..m {
                    a[i * n + j] -= f * v[i];
                }
            }
        }
        r_diag[k] = a[k * n + k];
        vs.push(v);
    }
    // Accumulate Q = H_0 H_1 ... H_{n-1} applied to the first n columns of I.
    let mut q = vec![0.0; m * n];
    for j in 0..n {
        q[j * n + j] = 1.0;
    }
    for k in (0..n).rev() {
        let v = &vs[k];
        let vnorm2: f64 = v[k..].iter().map(|x| x * x).sum();
        if vnorm2 <= 1e-300 {
            continue;
        }
        for j in 0..n {
            let mut dot = 0.0;
            for i in k..m {
                dot += v[i] * q[i * n + j];
            }
            let f = 2.0 * dot / vnorm2;
            for i in k..m {
                q[i * n + j] -= f * v[i];
            }
        }
    }
    (q, r_diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn orthogonal_columns_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (rows, cols) = (10, 6);
        let mut w = vec![0.0; rows * cols];
        orthogonal_init(&mut rng, &mut w, rows, cols);
        for j1 in 0..cols {
            for j2 in 0..cols {
                let dot: f64 = (0..rows).map(|i| w[i * cols + j1] * w[i * cols + j2]).sum();
                let expect = if j1 == j2 { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-10, "col {j1}.{j2} dot {dot}");
            }
        }
    }

    #[test]
    fn orthogonal_rows_when_wide() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (rows, cols) = (4, 9);
        let mut w = vec![0.0; rows * cols];
        orthogonal_init(&mut rng, &mut w, rows, cols);
        for i1 in 0..rows {
            for i2 in 0..rows {
                let dot: f64 = (0..cols).map(|j| w[i1 * cols + j] * w[i2 * cols + j]).sum();
                let expect = if i1 == i2 { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn normal_init_std_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut buf = vec![0.0; 20000];
        normal_init(&mut rng, &mut buf, 0.02);
        let mean = buf.iter().sum::<f64>() / buf.len() as f64;
        let var = buf.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / buf.len() as f64;
        assert!(mean.abs() < 1e-3);
        assert!((var.sqrt() - 0.02).abs() < 2e-3);
    }
}
