use alloc::vec;
use alloc::vec::Vec;

use super::{moving_average, Signal};
use crate::{Error, Result};

/// Smoothness regularizer used at [`LAMBDA_REFERENCE_RATE`].
pub const DEFAULT_LAMBDA: f64 = 300.0;
/// Sampling rate at which `lambda` is quoted. Other rates rescale it by
/// `(fs / 30)^2`, which keeps the high-pass cutoff fixed in Hz.
pub const LAMBDA_REFERENCE_RATE: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DetrendMethod {
    /// Regularized least squares with a second-difference penalty.
    SmoothnessPriors,
    /// Subtract a one-second centered moving average.
    MovingBaseline,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DetrendConfig {
    pub lambda: f64,
    pub method: DetrendMethod,
}

impl Default for DetrendConfig {
    fn default() -> Self {
        Self { lambda: DEFAULT_LAMBDA, method: DetrendMethod::SmoothnessPriors }
    }
}

/// Removes slow trends from `signal`.
///
/// With [`DetrendMethod::SmoothnessPriors`] the trend `x` solves
/// `(I + l^2 D'D) x = z` where `D` is the second-difference operator, and the
/// output is `z - x`. Because `D` annihilates affine sequences, any `a*t + b`
/// component of the input is removed exactly, and the output always sums to
/// zero.
pub fn detrend(signal: &Signal, config: &DetrendConfig) -> Result<Signal> {
    if !(config.lambda.is_finite() && config.lambda > 0.0) {
        return Err(Error::InvalidInput("detrend lambda must be positive"));
    }
    signal.require_len(3, "detrend needs at least three samples")?;
    let out = match config.method {
        DetrendMethod::SmoothnessPriors => {
            let scale = signal.sampling_rate() / LAMBDA_REFERENCE_RATE;
            let lambda = config.lambda * scale * scale;
            smoothness_priors(signal.samples(), lambda)
        }
        DetrendMethod::MovingBaseline => {
            let window = (libm::round(signal.sampling_rate()) as usize).clamp(1, signal.len());
            let baseline = moving_average(signal, window)?;
            let mut out: Vec<f64> = signal.samples().iter().zip(baseline.samples()).map(|(z, b)| z - b).collect();
            let m = crate::math::mean(&out);
            out.iter_mut().for_each(|x| *x -= m);
            out
        }
    };
    Ok(signal.with_samples(out))
}

fn smoothness_priors(z: &[f64], lambda: f64) -> Vec<f64> {
    let n = z.len();
    let l2 = lambda * lambda;

    // D'D for the (n-2) x n second-difference matrix is symmetric pentadiagonal.
    // Store the main diagonal and the first two super-diagonals of I + l2 D'D.
    let mut d0 = vec![0.0; n];
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for r in 0..n - 2 {
        // Row r of D has coefficients (1, -2, 1) at columns r, r+1, r+2.
        let c = [1.0, -2.0, 1.0];
        for a in 0..3 {
            for b in a..3 {
                let v = l2 * c[a] * c[b];
                match b - a {
                    0 => d0[r + a] += v,
                    1 => d1[r + a] += v,
                    _ => d2[r + a] += v,
                }
            }
        }
    }
    for d in d0.iter_mut() {
        *d += 1.0;
    }

    let trend = solve_pentadiagonal_spd(&d0, &d1, &d2, z);
    z.iter().zip(trend).map(|(a, b)| a - b).collect()
}

/// Solves `A x = rhs` for symmetric positive-definite pentadiagonal `A` given
/// its diagonal `d0` and super-diagonals `d1`, `d2`, via banded LDL'.
fn solve_pentadiagonal_spd(d0: &[f64], d1: &[f64], d2: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = d0.len();
    let mut diag = vec![0.0; n];
    // l1[i] = L[i+1][i], l2[i] = L[i+2][i]
    let mut l1 = vec![0.0; n];
    let mut l2 = vec![0.0; n];
    for i in 0..n {
        let mut d = d0[i];
        if i >= 1 {
            d -= l1[i - 1] * l1[i - 1] * diag[i - 1];
        }
        if i >= 2 {
            d -= l2[i - 2] * l2[i - 2] * diag[i - 2];
        }
        diag[i] = d;
        if i + 1 < n {
            let mut v = d1[i];
            if i >= 1 {
                v -= l2[i - 1] * l1[i - 1] * diag[i - 1];
            }
            l1[i] = v / d;
        }
        if i + 2 < n {
            l2[i] = d2[i] / d;
        }
    }
    let mut y = rhs.to_vec();
    for i in 0..n {
        if i >= 1 {
            y[i] -= l1[i - 1] * y[i - 1];
        }
        if i >= 2 {
            y[i] -= l2[i - 2] * y[i - 2];
        }
    }
    for i in 0..n {
        y[i] /= diag[i];
    }
    for i in (0..n).rev() {
        if i + 1 < n {
            y[i] -= l1[i] * y[i + 1];
        }
        if i + 2 < n {
            y[i] -= l2[i] * y[i + 2];
        }
    }
    y
}
