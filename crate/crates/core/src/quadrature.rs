//! Trapezoidal quadrature on uniform grids.

/// Trapezoidal rule for `f` on `[a, b]` with `n` equally spaced nodes.
///
/// Summation runs left to right so results are reproducible.
pub fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n >= 2, "trapezoid needs at least two nodes");
    let h = (b - a) / (n - 1) as f64;
    let mut sum = 0.5 * (f(a) + f(b));
    for i in 1..n - 1 {
        sum += f(a + i as f64 * h);
    }
    sum * h
}

/// Trapezoidal rule over already-sampled values with spacing `dx`.
pub fn trapezoid_samples(values: &[f64], dx: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, inner @ .., last] => (0.5 * (first + last) + inner.iter().sum::<f64>()) * dx,
    }
}

/// Trapezoid weights for `n` nodes with spacing `dx`.
pub fn trapezoid_weights(n: usize, dx: f64) -> Vec<f64> {
    let mut w = vec![dx; n];
    if n >= 2 {
        w[0] = 0.5 * dx;
        w[n - 1] = 0.5 * dx;
    }
    w
}
