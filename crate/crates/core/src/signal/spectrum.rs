use alloc::vec::Vec;
use core::f64::consts::PI;

use super::Signal;
use crate::{fft, math, Error, Result};

/// In-band magnitude spectrum and its dominant frequency.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectrumEstimate {
    pub frequencies: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub dominant_frequency: f64,
}

impl SpectrumEstimate {
    /// Frequency spacing between bins.
    pub fn resolution(&self) -> f64 {
        match self.frequencies.as_slice() {
            [a, b, ..] => b - a,
            _ => 0.0,
        }
    }

    pub fn peak_magnitude(&self) -> f64 {
        self.magnitudes.iter().copied().fold(0.0, f64::max)
    }

    /// Ratio of the dominant magnitude to the median in-band magnitude.
    /// Infinite when the median is zero and the peak is not.
    pub fn peak_to_median(&self) -> f64 {
        let med = math::median(&self.magnitudes);
        let peak = self.peak_magnitude();
        if med > 0.0 {
            peak / med
        } else if peak > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }
}

/// Hann-windowed magnitude spectrum of the mean-removed signal, restricted to
/// the bins inside `[low_hz, high_hz]`.
///
/// Bins sit at `k * fs / n` for the full signal length `n` (no zero padding).
/// The dominant frequency is the first bin of maximal magnitude.
pub fn estimate_spectrum(signal: &Signal, low_hz: f64, high_hz: f64) -> Result<SpectrumEstimate> {
    let fs = signal.sampling_rate();
    let n = signal.len();
    if (n as f64) < 2.0 * fs {
        return Err(Error::InsufficientData("spectrum needs at least two seconds of signal"));
    }
    if !(low_hz >= 0.0 && low_hz < high_hz && high_hz <= fs / 2.0) {
        return Err(Error::InvalidInput("spectrum band must lie within [0, fs/2]"));
    }
    let m = math::mean(signal.samples());
    let windowed: Vec<f64> = signal.samples().iter().enumerate().map(|(i, &x)| (x - m) * hann(i, n)).collect();
    let spectrum = fft::forward_real(&windowed);

    let df = fs / n as f64;
    let first = libm::ceil(low_hz / df - 1e-9).max(0.0) as usize;
    let last = (libm::floor(high_hz / df + 1e-9) as usize).min(n / 2);
    if first > last {
        return Err(Error::InvalidInput("band is narrower than one frequency bin"));
    }
    let frequencies: Vec<f64> = (first..=last).map(|k| k as f64 * df).collect();
    let magnitudes: Vec<f64> = (first..=last).map(|k| spectrum[k].norm()).collect();

    let mut best = 0;
    for (i, &mag) in magnitudes.iter().enumerate() {
        if mag > magnitudes[best] {
            best = i;
        }
    }
    // Rounding in the mean removal leaves dust on constant inputs.
    let scale: f64 = signal.samples().iter().map(|x| x.abs()).sum();
    if magnitudes[best] <= 1e-12 * scale || magnitudes[best] == 0.0 {
        return Err(Error::FlatSignal);
    }
    Ok(SpectrumEstimate { dominant_frequency: frequencies[best], frequencies, magnitudes })
}

/// Symmetric Hann window value for sample `i` of `n`.
pub(crate) fn hann(i: usize, n: usize) -> f64 {
    if n < 2 {
        return 1.0;
    }
    0.5 - 0.5 * libm::cos(2.0 * PI * i as f64 / (n - 1) as f64)
}
