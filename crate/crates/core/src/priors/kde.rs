//! Gaussian kernel density estimates over relative-position samples.

use std::f64::consts::PI;

/// Smallest bandwidth (meters); duplicated samples would otherwise collapse
/// the kernel to a spike.
pub const BANDWIDTH_FLOOR: f64 = 0.05;

fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    var.sqrt()
}

/// Scott's rule bandwidth for one axis of a `dims`-dimensional sample,
/// `n^(-1/(dims+4)) * σ`, floored at [`BANDWIDTH_FLOOR`].
pub fn scott_bandwidth(values: &[f64], dims: usize) -> f64 {
    let n = values.len().max(1) as f64;
    let h = n.powf(-1.0 / (dims as f64 + 4.0)) * sample_std(values);
    if h.is_finite() {
        h.max(BANDWIDTH_FLOOR)
    } else {
        BANDWIDTH_FLOOR
    }
}

/// Diagonal-bandwidth 2D Gaussian KDE at `q`.
pub fn planar_density(samples: &[[f64; 2]], bandwidth: [f64; 2], q: [f64; 2]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let [hx, hy] = bandwidth;
    let norm = 1.0 / (2.0 * PI * hx * hy);
    let sum: f64 = samples
        .iter()
        .map(|s| {
            let dx = (q[0] - s[0]) / hx;
            let dy = (q[1] - s[1]) / hy;
            (-0.5 * (dx * dx + dy * dy)).exp()
        })
        .sum();
    norm * sum / samples.len() as f64
}

/// 1D Gaussian KDE at `q`.
pub fn radial_density(samples: &[f64], bandwidth: f64, q: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let norm = 1.0 / ((2.0 * PI).sqrt() * bandwidth);
    let sum: f64 = samples
        .iter()
        .map(|s| {
            let d = (q - s) / bandwidth;
            (-0.5 * d * d).exp()
        })
        .sum();
    norm * sum / samples.len() as f64
}
