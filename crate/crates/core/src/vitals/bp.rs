//! Blood pressure from pulse-shape features.
//!
//! Learned regressors plug in through [`BpEstimator`]. The shipped
//! [`AffineBpModel`] is a linear baseline whose coefficients come from a flat
//! `key = value` text file:
//!
//! ```text
//! # intercepts are required
//! sbp_intercept = 80
//! dbp_intercept = 55
//! # a bare feature name applies to both outputs
//! hr_bpm = 0.1
//! # prefixed names apply to one output and add to the shared weight
//! sbp_hr_bpm = 0.45
//! dbp_hr_bpm = 0.15
//! ```

use alloc::format;
use alloc::vec::Vec;

use super::bvp::BvpSignal;
use super::hrv::IbiSequence;
use crate::signal::{detect_peaks, DEFAULT_MIN_DISTANCE_S, DEFAULT_MIN_PROMINENCE};
use crate::{math, Error, Result};

/// Physiological output bounds, mmHg.
pub const SBP_RANGE: (f64, f64) = (80.0, 200.0);
pub const DBP_RANGE: (f64, f64) = (40.0, 120.0);
/// Fewest intervals the feature extractor accepts.
pub const MIN_BP_IBIS: usize = 5;

/// Names accepted in coefficient files, in [`BpFeatures::as_array`] order.
pub const FEATURE_NAMES: [&str; 6] =
    ["mean_ibi_ms", "std_ibi_ms", "mean_peak_amplitude", "mean_rise_time_s", "half_width_s", "hr_bpm"];

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BpFeatures {
    pub mean_ibi_ms: f64,
    pub std_ibi_ms: f64,
    pub mean_peak_amplitude: f64,
    /// Trough-to-peak time of the systolic upstroke.
    pub mean_rise_time_s: f64,
    /// Pulse width at half of the trough-to-peak amplitude.
    pub half_width_s: f64,
    pub hr_bpm: f64,
}

impl BpFeatures {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.mean_ibi_ms,
            self.std_ibi_ms,
            self.mean_peak_amplitude,
            self.mean_rise_time_s,
            self.half_width_s,
            self.hr_bpm,
        ]
    }
}

/// Maps pulse features to `(systolic, diastolic)` in mmHg. Implementations
/// must not keep per-call state.
pub trait BpEstimator {
    fn predict(&self, features: &BpFeatures) -> Result<(f64, f64)>;
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AffineBpModel {
    pub sbp_intercept: f64,
    pub dbp_intercept: f64,
    pub sbp_weights: [f64; 6],
    pub dbp_weights: [f64; 6],
}

impl AffineBpModel {
    /// Intercept-only model.
    pub fn constant(sbp: f64, dbp: f64) -> Self {
        Self { sbp_intercept: sbp, dbp_intercept: dbp, sbp_weights: [0.0; 6], dbp_weights: [0.0; 6] }
    }

    /// Parses the `key = value` coefficient format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut sbp_intercept = None;
        let mut dbp_intercept = None;
        let mut sbp_weights = [0.0; 6];
        let mut dbp_weights = [0.0; 6];
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("line {}: `{}` is not a number", lineno + 1, value.trim())))?;
            if !value.is_finite() {
                return Err(Error::Config(format!("line {}: value must be finite", lineno + 1)));
            }
            match key {
                "sbp_intercept" => sbp_intercept = Some(value),
                "dbp_intercept" => dbp_intercept = Some(value),
                _ => {
                    let (to_sbp, to_dbp, name) = if let Some(rest) = key.strip_prefix("sbp_") {
                        (true, false, rest)
                    } else if let Some(rest) = key.strip_prefix("dbp_") {
                        (false, true, rest)
                    } else {
                        (true, true, key)
                    };
                    let idx = FEATURE_NAMES
                        .iter()
                        .position(|f| *f == name)
                        .ok_or_else(|| Error::Config(format!("line {}: unknown key `{}`", lineno + 1, key)))?;
                    if to_sbp {
                        sbp_weights[idx] += value;
                    }
                    if to_dbp {
                        dbp_weights[idx] += value;
                    }
                }
            }
        }
        Ok(Self {
            sbp_intercept: sbp_intercept.ok_or_else(|| Error::Config("missing sbp_intercept".into()))?,
            dbp_intercept: dbp_intercept.ok_or_else(|| Error::Config("missing dbp_intercept".into()))?,
            sbp_weights,
            dbp_weights,
        })
    }
}

/// Baseline coefficients: pressure rises gently with heart rate.
pub const DEFAULT_COEFFICIENTS: &str = "\
sbp_intercept = 80
dbp_intercept = 55
sbp_hr_bpm = 0.55
dbp_hr_bpm = 0.25
sbp_std_ibi_ms = -0.05
dbp_std_ibi_ms = -0.02
";

impl Default for AffineBpModel {
    fn default() -> Self {
        Self::parse(DEFAULT_COEFFICIENTS).expect("built-in coefficients parse")
    }
}

impl BpEstimator for AffineBpModel {
    fn predict(&self, features: &BpFeatures) -> Result<(f64, f64)> {
        let x = features.as_array();
        let dot = |w: &[f64; 6]| w.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>();
        Ok((self.sbp_intercept + dot(&self.sbp_weights), self.dbp_intercept + dot(&self.dbp_weights)))
    }
}

/// Per-user offsets taken from a reference cuff reading.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BpCalibration {
    pub sbp_offset: f64,
    pub dbp_offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BpEstimate {
    pub sbp: f64,
    pub dbp: f64,
    pub calibrated: bool,
    /// True when the raw prediction had to be pulled into the physiological range.
    pub clamped: bool,
}

/// Shape features of the pulse wave.
pub fn extract_bp_features(bvp: &BvpSignal, ibis: &IbiSequence) -> Result<BpFeatures> {
    if ibis.len() < MIN_BP_IBIS {
        return Err(Error::InsufficientData("blood pressure needs at least five intervals"));
    }
    let s = &bvp.signal;
    let x = s.samples();
    let fs = s.sampling_rate();
    let peaks = detect_peaks(s, DEFAULT_MIN_DISTANCE_S, DEFAULT_MIN_PROMINENCE)?;
    let idx: Vec<usize> =
        peaks.times().iter().map(|t| (libm::round((t - s.start_time()) * fs) as usize).min(x.len() - 1)).collect();

    let mut rise = Vec::new();
    let mut width = Vec::new();
    for w in idx.windows(2) {
        let (prev, peak) = (w[0], w[1]);
        let (trough, &trough_val) = x[prev..=peak]
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, v)| (i + prev, v))
            .unwrap_or((prev, &x[prev]));
        if trough >= peak {
            continue;
        }
        rise.push((peak - trough) as f64 / fs);
        let half = trough_val + 0.5 * (x[peak] - trough_val);
        let mut left = peak;
        while left > trough && x[left] > half {
            left -= 1;
        }
        let mut right = peak;
        while right + 1 < x.len() && x[right] > half {
            right += 1;
        }
        let cross = |a: usize, b: usize| {
            let (ya, yb) = (x[a], x[b]);
            if yb == ya {
                a as f64
            } else {
                a as f64 + (half - ya) / (yb - ya) * (b as f64 - a as f64)
            }
        };
        let l = if left < peak { cross(left, left + 1) } else { peak as f64 };
        let r = if right > peak { cross(right - 1, right) } else { peak as f64 };
        width.push((r - l) / fs);
    }

    let mean_ibi = ibis.mean();
    Ok(BpFeatures {
        mean_ibi_ms: mean_ibi,
        std_ibi_ms: ibis.std_dev(),
        mean_peak_amplitude: math::mean(peaks.amplitudes()),
        mean_rise_time_s: math::mean(&rise),
        half_width_s: math::mean(&width),
        hr_bpm: 60_000.0 / mean_ibi,
    })
}

/// Runs `model` on the pulse features, applies the optional user calibration
/// and keeps the result within the physiological range with SBP above DBP.
pub fn estimate_bp(
    bvp: &BvpSignal,
    ibis: &IbiSequence,
    model: &dyn BpEstimator,
    calibration: Option<&BpCalibration>,
) -> Result<BpEstimate> {
    let features = extract_bp_features(bvp, ibis)?;
    let (mut sbp, mut dbp) = model.predict(&features)?;
    if !(sbp.is_finite() && dbp.is_finite()) {
        return Err(Error::Degenerate("model produced a non-finite pressure"));
    }
    if let Some(c) = calibration {
        sbp += c.sbp_offset;
        dbp += c.dbp_offset;
    }
    let (cs, cd) = (sbp.clamp(SBP_RANGE.0, SBP_RANGE.1), dbp.clamp(DBP_RANGE.0, DBP_RANGE.1));
    if cs <= cd {
        return Err(Error::Degenerate("model produced systolic <= diastolic"));
    }
    Ok(BpEstimate { sbp: cs, dbp: cd, calibrated: calibration.is_some(), clamped: cs != sbp || cd != dbp })
}
