//! Central finite-difference gradient checking.

/// Numerically differentiate `f` w.r.t. every entry of `params` using
/// central differences. `f` must not retain state between calls.
pub fn central_difference(
    params: &mut [f64],
    h: f64,
    mut f: impl FnMut(&[f64]) -> f64,
) -> Vec<f64> {
    let mut grad = vec![0.0; params.len()];
    for i in 0..params.len() {
        let orig = params[i];
        params[i] = orig + h;
        let fp = f(params);
        params[i] = orig - h;
        let fm = f(params);
        params[i] = orig;
        grad[i] = (fp - fm) / (2.0 * h);
    }
    grad
}

/// Largest relative error between analytic and numeric gradients, with the
/// denominator floored at 1 so near-zero entries compare absolutely.
pub fn max_rel_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| (a - n).abs() / a.abs().max(n.abs()).max(1.0))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_gradient() {
        let mut p = vec![1.5, -2.0, 0.25];
        let num = central_difference(&mut p, 1e-5, |q| q.iter().map(|v| v * v).sum());
        let ana: Vec<f64> = p.iter().map(|v| 2.0 * v).collect();
        assert!(max_rel_error(&ana, &num) < 1e-9);
    }
}
