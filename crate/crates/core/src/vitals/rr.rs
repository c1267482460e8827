use super::bvp::{channel_signal, require_duration, HR_BAND};
use super::hr::MIN_PEAK_TO_MEDIAN;
use crate::roi::FrameTrace;
use crate::signal::{bandpass, estimate_spectrum};
use crate::{math, Error, Result};

/// Respiratory band, Hz (9-21 breaths per minute).
pub const RR_BAND: (f64, f64) = (0.15, 0.35);
/// Minimum trace length for respiratory analysis, seconds.
pub const MIN_RR_SECONDS: f64 = 30.0;
/// The respiratory peak must reach this fraction of the cardiac peak
/// magnitude (1% in power) to count as present.
pub const MIN_RESPIRATORY_TO_CARDIAC: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RrEstimate {
    pub brpm: f64,
    pub dominant_hz: f64,
    pub peak_to_median: f64,
    pub respiratory_to_cardiac: f64,
    pub confident: bool,
}

/// Respiratory rate: band-pass the green channel to [`RR_BAND`] and take the
/// dominant frequency times 60.
pub fn estimate_rr(trace: &FrameTrace) -> Result<RrEstimate> {
    require_duration(trace, MIN_RR_SECONDS, "respiratory rate needs at least 30 s of trace")?;
    if trace.nominal_fps() <= 2.0 * HR_BAND.1 {
        return Err(Error::InvalidInput("frame rate too low"));
    }
    let green = channel_signal(trace, &trace.green())?;
    let level = green.with_samples(math::remove_line(green.samples()));
    let respiratory = bandpass(&level, RR_BAND.0, RR_BAND.1)?;
    let spectrum = estimate_spectrum(&respiratory, RR_BAND.0, RR_BAND.1)?;

    let cardiac_peak = match estimate_spectrum(&level, HR_BAND.0, HR_BAND.1) {
        Ok(s) => s.peak_magnitude(),
        Err(Error::FlatSignal) => 0.0,
        Err(e) => return Err(e),
    };
    let ratio = if cardiac_peak > 0.0 { spectrum.peak_magnitude() / cardiac_peak } else { f64::INFINITY };
    let ptm = spectrum.peak_to_median();
    Ok(RrEstimate {
        brpm: spectrum.dominant_frequency * 60.0,
        dominant_hz: spectrum.dominant_frequency,
        peak_to_median: ptm,
        respiratory_to_cardiac: ratio,
        confident: ptm >= MIN_PEAK_TO_MEDIAN && ratio >= MIN_RESPIRATORY_TO_CARDIAC,
    })
}
