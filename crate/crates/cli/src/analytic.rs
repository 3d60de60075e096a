//! Free-space reference trace for the homogeneous point-source test.

use std::f64::consts::PI;

use chunktune::{ricker, RickerSource};

/// `s(t - r/c) / (4 pi r)` sampled at `t = (i + 1) dt`, matching the time at which
/// the propagator records step `i`.
pub fn analytical_trace(src: &RickerSource, r: f64, c: f64, ns: usize, dt: f64) -> Vec<f64> {
    (0..ns)
        .map(|i| ricker((i + 1) as f64 * dt - r / c, src) / (4.0 * PI * r))
        .collect()
}

/// Divides by the sample of largest magnitude, keeping its sign, so the peak becomes +1.
pub fn peak_normalize(v: &[f64]) -> Vec<f64> {
    let peak = v
        .iter()
        .copied()
        .fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
    if peak == 0.0 {
        return v.to_vec();
    }
    v.iter().map(|x| x / peak).collect()
}

pub fn mse(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    if a.is_empty() {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64
}
