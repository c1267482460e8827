use alloc::vec::Vec;

use super::bvp::BvpSignal;
use crate::signal::{detect_peaks, DEFAULT_MIN_DISTANCE_S, DEFAULT_MIN_PROMINENCE};
use crate::{math, Error, Result};

/// Physiological inter-beat interval limits, ms.
pub const IBI_RANGE_MS: (f64, f64) = (250.0, 2000.0);
/// Largest accepted deviation from the running median, as a fraction.
pub const MAX_IBI_DEVIATION: f64 = 0.3;
const RUNNING_MEDIAN_LEN: usize = 5;
/// Peaks this close to either end of the pulse signal carry filter start-up
/// transients and are ignored, seconds.
pub const EDGE_GUARD_S: f64 = 1.5;

/// Accepted inter-beat intervals in milliseconds.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IbiSequence {
    intervals_ms: Vec<f64>,
}

impl IbiSequence {
    /// Every interval must lie within [`IBI_RANGE_MS`].
    pub fn new(intervals_ms: Vec<f64>) -> Result<Self> {
        if intervals_ms.iter().any(|v| !(v.is_finite() && *v >= IBI_RANGE_MS.0 && *v <= IBI_RANGE_MS.1)) {
            return Err(Error::InvalidInput("inter-beat intervals must lie within [250, 2000] ms"));
        }
        Ok(Self { intervals_ms })
    }

    pub fn intervals(&self) -> &[f64] {
        &self.intervals_ms
    }

    pub fn len(&self) -> usize {
        self.intervals_ms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals_ms.is_empty()
    }

    pub fn mean(&self) -> f64 {
        math::mean(&self.intervals_ms)
    }

    pub fn std_dev(&self) -> f64 {
        math::std_dev(&self.intervals_ms)
    }
}

/// Intervals between successive peak times with outlier rejection.
///
/// Intervals outside [`IBI_RANGE_MS`] are dropped, as are intervals that
/// differ by more than 30% from the median of the last five accepted ones
/// (or, before any is accepted, from the median of all in-range intervals).
pub fn intervals_from_peak_times(times: &[f64]) -> Result<IbiSequence> {
    if times.len() < 3 {
        return Err(Error::InsufficientPeaks { found: times.len() });
    }
    let raw: Vec<f64> = times.windows(2).map(|w| (w[1] - w[0]) * 1000.0).collect();
    let in_range = |v: &f64| *v >= IBI_RANGE_MS.0 && *v <= IBI_RANGE_MS.1;
    let plausible: Vec<f64> = raw.iter().copied().filter(in_range).collect();
    let seed = math::median(&plausible);
    let mut accepted: Vec<f64> = Vec::with_capacity(raw.len());
    for iv in raw.into_iter().filter(in_range) {
        let reference = if accepted.is_empty() {
            seed
        } else {
            let start = accepted.len().saturating_sub(RUNNING_MEDIAN_LEN);
            math::median(&accepted[start..])
        };
        if libm::fabs(iv - reference) <= MAX_IBI_DEVIATION * reference {
            accepted.push(iv);
        }
    }
    IbiSequence::new(accepted)
}

/// Inter-beat intervals from the peaks of a pulse signal, skipping peaks
/// within [`EDGE_GUARD_S`] of either end.
pub fn compute_ibis(bvp: &BvpSignal) -> Result<IbiSequence> {
    let s = &bvp.signal;
    let peaks = detect_peaks(s, DEFAULT_MIN_DISTANCE_S, DEFAULT_MIN_PROMINENCE)?;
    let first = s.start_time() + EDGE_GUARD_S;
    let last = s.start_time() + (s.len() - 1) as f64 / s.sampling_rate() - EDGE_GUARD_S;
    let inner: Vec<f64> = peaks.times().iter().copied().filter(|t| (first..=last).contains(t)).collect();
    intervals_from_peak_times(&inner)
}

/// Root mean square of successive interval differences, in ms:
/// `sqrt(sum_{i=1}^{N-1} (IBI_i - IBI_{i+1})^2 / (N - 1))`.
pub fn estimate_hrv(ibis: &IbiSequence) -> Result<f64> {
    let x = ibis.intervals();
    if x.len() < 2 {
        return Err(Error::InsufficientData("heart rate variability needs at least two intervals"));
    }
    let sum_sq: f64 = x.windows(2).map(|w| (w[0] - w[1]) * (w[0] - w[1])).sum();
    Ok(libm::sqrt(sum_sq / (x.len() - 1) as f64))
}
