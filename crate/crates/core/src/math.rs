//! Small statistics helpers shared across modules.

use alloc::vec::Vec;

pub(crate) fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation.
pub(crate) fn std_dev(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64;
    libm::sqrt(var)
}

/// Median of a slice; averages the two central values for even lengths.
pub(crate) fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Least-squares line through `(i, xs[i])`; returns `(slope, intercept)`.
pub(crate) fn line_fit(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return (0.0, mean(xs));
    }
    let t_mean = (n - 1.0) / 2.0;
    let x_mean = mean(xs);
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let dt = i as f64 - t_mean;
        num += dt * (x - x_mean);
        den += dt * dt;
    }
    let slope = num / den;
    (slope, x_mean - slope * t_mean)
}

/// Subtracts the least-squares line.
pub(crate) fn remove_line(xs: &[f64]) -> Vec<f64> {
    let (slope, intercept) = line_fit(xs);
    xs.iter().enumerate().map(|(i, &x)| x - (slope * i as f64 + intercept)).collect()
}

/// Rounds a duration in samples to the nearest odd count, at least one.
pub(crate) fn odd_window(samples: f64) -> usize {
    let n = libm::round(samples).max(1.0) as usize;
    if n.is_multiple_of(2) {
        n + 1
    } else {
        n
    }
}
