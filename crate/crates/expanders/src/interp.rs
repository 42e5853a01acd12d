//! Small interpolation helpers shared by the operator grids and the flow.


/// Four-point Lagrange (cubic) evaluation on a uniformly indexed table;
/// O(h⁴) and exact on cubics. `x` is in index units; queries near the ends
/// fall back to the one-sided boundary cubic.
pub(crate) fn cubic_uniform(values: &[f64], x: f64) -> f64 {
    let n = values.len();
    assert!(n >= 4, "need at least four samples");
    let xf = x.clamp(0.0, (n - 1) as f64);
    // Stencil [j-1, j, j+1, j+2] clamped into range; u measured from j.
    let j = (xf.floor() as usize).clamp(1, n - 3);
    let u = xf - j as f64;
    let p0 = values[j - 1];
    let p1 = values[j];
    let p2 = values[j + 1];
    let p3 = values[j + 2];
    -u * (u - 1.0) * (u - 2.0) / 6.0 * p0
        + (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0 * p1
        - (u + 1.0) * u * (u - 2.0) / 2.0 * p2
        + (u + 1.0) * u * (u - 1.0) / 6.0 * p3
}


/// Fourth-order cumulative integral of uniformly sampled data (Adams-Moulton
/// corrector weights); returns the antiderivative at every node with I[0] = 0.
pub(crate) fn cumulative_integral(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    if n < 4 {
        for i in 1..n {
            out[i] = out[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
        }
        return out;
    }
    out[1] = out[0] + h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]);
    for i in 1..n - 2 {
        out[i + 1] = out[i] + h / 24.0 * (-f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2]);
    }
    out[n - 1] = out[n - 2]
        + h / 24.0 * (f[n - 4] - 5.0 * f[n - 3] + 19.0 * f[n - 2] + 9.0 * f[n - 1]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cubic_reproduces_cubics_and_converges_fast() {
        let g = |x: f64| 0.05 * x * x * x - 0.7 * x * x + 2.0 * x - 5.0;
        let values: Vec<f64> = (0..20).map(|i| g(i as f64)).collect();
        for &x in &[0.4, 2.25, 7.5, 13.9, 18.7] {
            assert_abs_diff_eq!(cubic_uniform(&values, x), g(x), epsilon = 1e-9);
        }
        // O(h^4) on a smooth function.
        let f = |x: f64| (2.0 * x).sin();
        let err_at = |n: usize| {
            let h = 1.0 / (n - 1) as f64;
            let vals: Vec<f64> = (0..n).map(|i| f(i as f64 * h)).collect();
            (0..(10 * n))
                .map(|k| 0.1 + 0.8 * k as f64 / (10 * n) as f64)
                .map(|x| (cubic_uniform(&vals, x / h) - f(x)).abs())
                .fold(0.0f64, f64::max)
        };
        let (e1, e2) = (err_at(41), err_at(81));
        assert!(e1 / e2 > 10.0, "expected ~16x, got {e1:.2e}/{e2:.2e}");
    }

    #[test]
    fn cumulative_integral_is_fourth_order() {
        let f = |x: f64| (1.3 * x).sin();
        let exact = |x: f64| (1.0 - (1.3 * x).cos()) / 1.3;
        let mut errs = Vec::new();
        for &n in &[51usize, 101] {
            let h = 2.0 / (n - 1) as f64;
            let data: Vec<f64> = (0..n).map(|i| f(i as f64 * h)).collect();
            let integral = cumulative_integral(&data, h);
            let err = integral
                .iter()
                .enumerate()
                .map(|(i, v)| (v - exact(i as f64 * h)).abs())
                .fold(0.0f64, f64::max);
            errs.push(err);
        }
        assert!(errs[0] / errs[1] > 10.0, "expected ~16x, got {:?}", errs);
    }
}
