use alloc::vec::Vec;

use super::Signal;
use crate::{Error, Result};

/// Centered moving average.
///
/// Sample `i` averages indices `i - (window-1)/2 ..= i + window/2`, clipped to
/// the signal. Near the edges the window loses the samples that fall outside
/// instead of being zero padded, so `[1, 2, 3, 4, 5]` with `window = 3` gives
/// `[1.5, 2, 3, 4, 4.5]`.
pub fn moving_average(signal: &Signal, window: usize) -> Result<Signal> {
    let n = signal.len();
    if window == 0 || window > n {
        return Err(Error::InvalidInput("moving average window must be in 1..=len"));
    }
    if window == 1 {
        return Ok(signal.clone());
    }
    let x = signal.samples();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &v in x {
        acc += v;
        prefix.push(acc);
    }
    let back = (window - 1) / 2;
    let ahead = window / 2;
    let out = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(back);
            let hi = (i + ahead).min(n - 1);
            (prefix[hi + 1] - prefix[lo]) / (hi + 1 - lo) as f64
        })
        .collect();
    Ok(signal.with_samples(out))
}
