use alloc::vec::Vec;

use crate::roi::FrameTrace;
use crate::signal::{bandpass, detrend, moving_average, DetrendConfig, Signal};
use crate::{math, Error, Result};

/// Heart-rate band, Hz (42-240 bpm).
pub const HR_BAND: (f64, f64) = (0.7, 4.0);
/// Minimum trace length for cardiac analysis, seconds.
pub const MIN_BVP_SECONDS: f64 = 10.0;
/// Moving-average smoothing applied after detrending, seconds.
pub const SMOOTHING_S: f64 = 0.2;

/// Which color combination carries the pulse.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ChannelMode {
    #[default]
    Green,
    /// Mean-normalized `G - R/2 - B/2`.
    ChrominanceCombined,
}

/// Filtered, zero-mean blood volume pulse on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BvpSignal {
    pub signal: Signal,
    pub source: ChannelMode,
}

impl BvpSignal {
    pub fn is_zero(&self) -> bool {
        self.signal.samples().iter().all(|&v| v == 0.0)
    }
}

/// Linear interpolation of `(times, values)` onto a grid starting at the first
/// timestamp with spacing `1 / fps`.
pub(crate) fn resample_uniform(times: &[f64], values: &[f64], fps: f64) -> Vec<f64> {
    let t0 = times[0];
    let span = times[times.len() - 1] - t0;
    let n = libm::floor(span * fps + 1e-9) as usize + 1;
    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    for i in 0..n {
        let t = t0 + i as f64 / fps;
        while j + 2 < times.len() && times[j + 1] < t {
            j += 1;
        }
        let (ta, tb) = (times[j], times[j + 1]);
        let w = ((t - ta) / (tb - ta)).clamp(0.0, 1.0);
        out.push(values[j] + w * (values[j + 1] - values[j]));
    }
    out
}

/// Resampled single channel as a [`Signal`].
pub(crate) fn channel_signal(trace: &FrameTrace, values: &[f64]) -> Result<Signal> {
    let times = trace.timestamps();
    let samples = resample_uniform(&times, values, trace.nominal_fps());
    Signal::with_start(samples, trace.nominal_fps(), times[0])
}

pub(crate) fn require_duration(trace: &FrameTrace, seconds: f64, what: &'static str) -> Result<()> {
    // Half a frame of slack for timestamp jitter.
    if trace.duration() + 0.5 / trace.nominal_fps() < seconds {
        Err(Error::InsufficientData(what))
    } else {
        Ok(())
    }
}

fn is_constant(xs: &[f64]) -> bool {
    let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    hi - lo <= 1e-12 * (1.0 + libm::fabs(math::mean(xs)))
}

/// Resample, detrend, smooth, band-limit to [`HR_BAND`] and remove the mean.
pub fn extract_bvp(trace: &FrameTrace, mode: ChannelMode) -> Result<BvpSignal> {
    require_duration(trace, MIN_BVP_SECONDS, "pulse extraction needs at least 10 s of trace")?;
    if trace.nominal_fps() <= 2.0 * HR_BAND.1 {
        return Err(Error::InvalidInput("frame rate too low for the heart-rate band"));
    }
    let raw: Vec<f64> = match mode {
        ChannelMode::Green => trace.green(),
        ChannelMode::ChrominanceCombined => {
            let (r, g, b) = (trace.red(), trace.green(), trace.blue());
            let (mr, mg, mb) = (math::mean(&r), math::mean(&g), math::mean(&b));
            if mr <= 0.0 || mg <= 0.0 || mb <= 0.0 {
                return Err(Error::Degenerate("channel mean is zero"));
            }
            g.iter().zip(&r).zip(&b).map(|((g, r), b)| g / mg - 0.5 * r / mr - 0.5 * b / mb).collect()
        }
    };
    let resampled = channel_signal(trace, &raw)?;
    if is_constant(resampled.samples()) {
        let zeros = alloc::vec![0.0; resampled.len()];
        return Ok(BvpSignal { signal: resampled.with_samples(zeros), source: mode });
    }
    let detrended = detrend(&resampled, &DetrendConfig::default())?;
    let window = math::odd_window(SMOOTHING_S * trace.nominal_fps()).min(detrended.len());
    let smoothed = moving_average(&detrended, window)?;
    let filtered = bandpass(&smoothed, HR_BAND.0, HR_BAND.1)?;
    let m = math::mean(filtered.samples());
    let centered = filtered.samples().iter().map(|v| v - m).collect();
    Ok(BvpSignal { signal: filtered.with_samples(centered), source: mode })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resample_identity_on_uniform_grid() {
        let t: Vec<f64> = (0..10).map(|i| i as f64 / 10.0).collect();
        let v: Vec<f64> = (0..10).map(|i| (i * i) as f64).collect();
        let out = resample_uniform(&t, &v, 10.0);
        assert_eq!(out.len(), 10);
        for (a, b) in out.iter().zip(&v) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn resample_interpolates_jittered_grid() {
        let t = [0.0, 0.12, 0.2, 0.31, 0.4];
        let v: Vec<f64> = t.iter().map(|x| 3.0 * x + 1.0).collect();
        let out = resample_uniform(&t, &v, 10.0);
        assert_eq!(out.len(), 5);
        for (i, y) in out.iter().enumerate() {
            assert!((y - (3.0 * i as f64 / 10.0 + 1.0)).abs() < 1e-12);
        }
    }
}
