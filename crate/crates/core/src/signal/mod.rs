//! One-dimensional signal-processing primitives.
//!
//! Every operation here is a pure function of its inputs.

mod detrend;
mod filter;
mod peaks;
mod smoothing;
mod spectrum;

use alloc::vec::Vec;

use crate::{Error, Result};

pub use detrend::{detrend, DetrendConfig, DetrendMethod, DEFAULT_LAMBDA, LAMBDA_REFERENCE_RATE};
pub use filter::{bandpass, Butterworth};
pub use peaks::{detect_peaks, PeakSeries, DEFAULT_MIN_DISTANCE_S, DEFAULT_MIN_PROMINENCE};
pub use smoothing::moving_average;
pub use spectrum::{estimate_spectrum, SpectrumEstimate};

/// A uniformly sampled real-valued signal.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Signal {
    samples: Vec<f64>,
    sampling_rate: f64,
    start_time: f64,
}

impl Signal {
    /// Builds a signal, rejecting non-finite samples and non-positive rates.
    pub fn new(samples: Vec<f64>, sampling_rate: f64) -> Result<Self> {
        Self::with_start(samples, sampling_rate, 0.0)
    }

    pub fn with_start(samples: Vec<f64>, sampling_rate: f64, start_time: f64) -> Result<Self> {
        if !(sampling_rate.is_finite() && sampling_rate > 0.0) {
            return Err(Error::InvalidInput("sampling rate must be positive and finite"));
        }
        if !start_time.is_finite() {
            return Err(Error::InvalidInput("start time must be finite"));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("samples must be finite"));
        }
        Ok(Self { samples, sampling_rate, start_time })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sampling_rate(&self) -> f64 {
        self.sampling_rate
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Length in seconds.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sampling_rate
    }

    /// Time of sample `i` in seconds.
    pub fn time_at(&self, i: usize) -> f64 {
        self.start_time + i as f64 / self.sampling_rate
    }

    /// Same timing, new samples. Caller guarantees finiteness.
    pub(crate) fn with_samples(&self, samples: Vec<f64>) -> Self {
        debug_assert!(samples.iter().all(|x| x.is_finite()));
        Self { samples, sampling_rate: self.sampling_rate, start_time: self.start_time }
    }

    pub(crate) fn require_len(&self, min: usize, what: &'static str) -> Result<()> {
        if self.samples.len() < min {
            Err(Error::InvalidInput(what))
        } else {
            Ok(())
        }
    }
}
