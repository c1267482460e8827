use super::bp::{estimate_bp, AffineBpModel, BpCalibration, BpEstimator};
use super::bvp::{extract_bvp, ChannelMode};
use super::hr::estimate_hr;
use super::hrv::{compute_ibis, estimate_hrv};
use super::rr::estimate_rr;
use super::spo2::{compute_channel_components, estimate_spo2, SpO2Calibration};
use super::stress::{classify_stress, StressLabel};
use crate::roi::FrameTrace;
use crate::{Error, Result};

/// How much a reported value can be trusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Validity {
    Valid,
    /// Estimated, but from a weak spectral peak.
    LowConfidence,
    /// Estimated, but outside the calibrated range and clamped.
    OutOfRange,
    /// Model output without a per-user calibration.
    Uncalibrated,
    /// Could not be estimated.
    Unavailable,
}

impl Validity {
    pub const ALL: [Validity; 5] =
        [Validity::Valid, Validity::LowConfidence, Validity::OutOfRange, Validity::Uncalibrated, Validity::Unavailable];

    pub fn as_str(self) -> &'static str {
        match self {
            Validity::Valid => "valid",
            Validity::LowConfidence => "low_confidence",
            Validity::OutOfRange => "out_of_range",
            Validity::Uncalibrated => "uncalibrated",
            Validity::Unavailable => "unavailable",
        }
    }
}

impl core::str::FromStr for Validity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|v| v.as_str() == s).ok_or(Error::InvalidInput("unknown validity flag"))
    }
}

impl core::fmt::Display for Validity {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single vital sign and its validity marker.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Reading {
    pub value: Option<f64>,
    pub validity: Validity,
}

impl Reading {
    pub fn valid(value: f64) -> Self {
        Self { value: Some(value), validity: Validity::Valid }
    }

    pub fn flagged(value: f64, validity: Validity) -> Self {
        Self { value: Some(value), validity }
    }

    pub fn unavailable() -> Self {
        Self { value: None, validity: Validity::Unavailable }
    }

    /// True for values that can be reported without caveat. Uncalibrated
    /// blood pressure counts as usable.
    pub fn is_valid(&self) -> bool {
        matches!(self.validity, Validity::Valid | Validity::Uncalibrated)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VitalsReport {
    pub hr_bpm: Reading,
    pub hrv_ms: Reading,
    pub spo2_percent: Reading,
    pub rr_brpm: Reading,
    pub sbp_mmhg: Reading,
    pub dbp_mmhg: Reading,
    pub stress: StressLabel,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VitalsConfig {
    pub channel_mode: ChannelMode,
    pub spo2_calibration: SpO2Calibration,
    /// AC/DC window; whole recording when `None`.
    pub spo2_window_s: Option<f64>,
    pub bp_model: AffineBpModel,
    pub bp_calibration: Option<BpCalibration>,
}

impl Default for VitalsConfig {
    fn default() -> Self {
        Self {
            channel_mode: ChannelMode::Green,
            spo2_calibration: SpO2Calibration::default(),
            spo2_window_s: None,
            bp_model: AffineBpModel::default(),
            bp_calibration: None,
        }
    }
}

/// Every vital sign from one trace, using the configured affine BP model.
pub fn estimate_all(trace: &FrameTrace, config: &VitalsConfig) -> Result<VitalsReport> {
    estimate_all_with(trace, config, &config.bp_model)
}

/// Like [`estimate_all`] with a caller-supplied blood pressure model.
///
/// Only a trace too short or too coarse for pulse extraction fails the whole
/// report; every other failure marks the affected vital unavailable.
pub fn estimate_all_with(
    trace: &FrameTrace,
    config: &VitalsConfig,
    bp_model: &dyn BpEstimator,
) -> Result<VitalsReport> {
    let bvp = extract_bvp(trace, config.channel_mode).map_err(|e| match e {
        Error::InsufficientData(_) => Error::UnusableRecording("recording too short for pulse analysis"),
        Error::InvalidInput(_) => Error::UnusableRecording("frame rate too low for pulse analysis"),
        other => other,
    })?;

    let hr = estimate_hr(&bvp).ok();
    let hr_bpm = match hr {
        Some(h) if h.confident => Reading::valid(h.bpm),
        Some(h) => Reading::flagged(h.bpm, Validity::LowConfidence),
        None => Reading::unavailable(),
    };
    let stress = match hr_bpm.is_valid() {
        true => classify_stress(hr.map_or(f64::NAN, |h| h.bpm)),
        false => StressLabel::Unknown,
    };

    let ibis = if bvp.is_zero() { None } else { compute_ibis(&bvp).ok() };
    let hrv_ms = match ibis.as_ref().map(estimate_hrv) {
        Some(Ok(v)) if hr_bpm.is_valid() => Reading::valid(v),
        Some(Ok(v)) => Reading::flagged(v, Validity::LowConfidence),
        _ => Reading::unavailable(),
    };

    let spo2 = compute_channel_components(trace, config.spo2_window_s)
        .and_then(|c| estimate_spo2(&c, &config.spo2_calibration));
    let spo2_percent = match spo2 {
        Ok(s) if !s.in_range => Reading::flagged(s.percent, Validity::OutOfRange),
        Ok(s) if hr_bpm.is_valid() => Reading::valid(s.percent),
        Ok(s) => Reading::flagged(s.percent, Validity::LowConfidence),
        Err(_) => Reading::unavailable(),
    };

    let rr_brpm = match estimate_rr(trace) {
        Ok(r) if r.confident => Reading::valid(r.brpm),
        Ok(r) => Reading::flagged(r.brpm, Validity::LowConfidence),
        Err(_) => Reading::unavailable(),
    };

    let bp = ibis.as_ref().and_then(|i| estimate_bp(&bvp, i, bp_model, config.bp_calibration.as_ref()).ok());
    let (sbp_mmhg, dbp_mmhg) = match bp {
        Some(b) => {
            let validity = if b.clamped {
                Validity::OutOfRange
            } else if !hr_bpm.is_valid() {
                Validity::LowConfidence
            } else if b.calibrated {
                Validity::Valid
            } else {
                Validity::Uncalibrated
            };
            (Reading::flagged(b.sbp, validity), Reading::flagged(b.dbp, validity))
        }
        None => (Reading::unavailable(), Reading::unavailable()),
    };

    Ok(VitalsReport { hr_bpm, hrv_ms, spo2_percent, rr_brpm, sbp_mmhg, dbp_mmhg, stress })
}
