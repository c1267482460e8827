use super::bvp::{channel_signal, require_duration, HR_BAND};
use crate::roi::FrameTrace;
use crate::signal::bandpass;
use crate::{math, Error, Result};

/// Reported SpO2 is clamped to this range, percent.
pub const SPO2_REPORT_RANGE: (f64, f64) = (70.0, 100.0);

/// Pulsatile and baseline levels of the red channel and of the infrared proxy.
///
/// RGB cameras have no infrared channel; blue stands in for it.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChannelComponents {
    pub ac_r: f64,
    pub dc_r: f64,
    pub ac_ir: f64,
    pub dc_ir: f64,
}

impl ChannelComponents {
    /// `(AC_R / DC_R) / (AC_IR / DC_IR)`.
    pub fn ratio_of_ratios(&self) -> Result<f64> {
        if !(self.dc_r > 0.0 && self.dc_ir > 0.0) {
            return Err(Error::Degenerate("DC components must be positive"));
        }
        let ir = self.ac_ir / self.dc_ir;
        if !(ir > 0.0) {
            return Err(Error::Degenerate("infrared AC component is zero"));
        }
        Ok((self.ac_r / self.dc_r) / ir)
    }
}

/// Linear calibration `SpO2 = a - b * ratio`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpO2Calibration {
    a: f64,
    b: f64,
}

impl SpO2Calibration {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a <= 1.2) {
            return Err(Error::InvalidInput("calibration a must lie in (0, 1.2]"));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidInput("calibration b must be positive"));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Unclamped saturation in percent for a given ratio of ratios.
    pub fn percent(&self, ratio: f64) -> f64 {
        (self.a - self.b * ratio) * 100.0
    }
}

impl Default for SpO2Calibration {
    fn default() -> Self {
        Self { a: 1.0, b: 0.04 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Spo2Estimate {
    /// Clamped to [`SPO2_REPORT_RANGE`].
    pub percent: f64,
    pub unclamped_percent: f64,
    pub ratio_of_ratios: f64,
    /// False when the unclamped fraction fell outside [0.7, 1.0].
    pub in_range: bool,
}

/// AC/DC decomposition over the last `window_s` seconds (whole trace when `None`).
///
/// DC is the mean of the raw channel; AC is the standard deviation of the
/// channel band-passed to the heart-rate band.
pub fn compute_channel_components(trace: &FrameTrace, window_s: Option<f64>) -> Result<ChannelComponents> {
    if let Some(w) = window_s {
        if !(w > 0.0) {
            return Err(Error::InvalidInput("window must be positive"));
        }
        require_duration(trace, w, "trace shorter than the AC/DC window")?;
    }
    if trace.nominal_fps() <= 2.0 * HR_BAND.1 {
        return Err(Error::InvalidInput("frame rate too low for the heart-rate band"));
    }
    let red = channel_signal(trace, &trace.red())?;
    let blue = channel_signal(trace, &trace.blue())?;
    let n = red.len();
    let take = match window_s {
        Some(w) => (libm::round(w * trace.nominal_fps()) as usize).clamp(2, n),
        None => n,
    };
    let start = n - take;

    let dc_r = math::mean(&red.samples()[start..]);
    let dc_ir = math::mean(&blue.samples()[start..]);
    if !(dc_r > 0.0 && dc_ir > 0.0) {
        return Err(Error::Degenerate("channel DC level is zero"));
    }
    let ac = |s: &crate::signal::Signal| -> Result<f64> {
        let filtered = bandpass(s, HR_BAND.0, HR_BAND.1)?;
        Ok(math::std_dev(&filtered.samples()[start..]))
    };
    Ok(ChannelComponents { ac_r: ac(&red)?, dc_r, ac_ir: ac(&blue)?, dc_ir })
}

/// Ratio-of-ratios oximetry with a linear calibration.
pub fn estimate_spo2(components: &ChannelComponents, cal: &SpO2Calibration) -> Result<Spo2Estimate> {
    let ratio = components.ratio_of_ratios()?;
    let unclamped = cal.percent(ratio);
    let fraction = unclamped / 100.0;
    Ok(Spo2Estimate {
        percent: unclamped.clamp(SPO2_REPORT_RANGE.0, SPO2_REPORT_RANGE.1),
        unclamped_percent: unclamped,
        ratio_of_ratios: ratio,
        in_range: (0.7..=1.0).contains(&fraction),
    })
}
