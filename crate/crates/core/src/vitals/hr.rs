use super::bvp::{BvpSignal, HR_BAND, MIN_BVP_SECONDS};
use crate::signal::estimate_spectrum;
use crate::{Error, Result};

/// Spectral peak-to-median ratio below which a rate is reported as weak.
pub const MIN_PEAK_TO_MEDIAN: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HrEstimate {
    pub bpm: f64,
    pub dominant_hz: f64,
    pub peak_to_median: f64,
    pub confident: bool,
}

/// Heart rate in beats per minute: the dominant in-band frequency times 60.
pub fn estimate_hr(bvp: &BvpSignal) -> Result<HrEstimate> {
    let s = &bvp.signal;
    if s.duration() + 0.5 / s.sampling_rate() < MIN_BVP_SECONDS {
        return Err(Error::InsufficientData("heart rate needs at least 10 s of pulse signal"));
    }
    let spectrum = estimate_spectrum(s, HR_BAND.0, HR_BAND.1)?;
    let ptm = spectrum.peak_to_median();
    Ok(HrEstimate {
        bpm: spectrum.dominant_frequency * 60.0,
        dominant_hz: spectrum.dominant_frequency,
        peak_to_median: ptm,
        confident: ptm >= MIN_PEAK_TO_MEDIAN,
    })
}
