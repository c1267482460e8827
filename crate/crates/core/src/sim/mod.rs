//! Seeded generator of color traces and frames with known vital signs.
//!
//! Each channel follows
//!
//! ```text
//! value(t) = dc + amp * ((1 + depth * sin(2π rr/60 t)) * (1 + p(t)) - 1)
//!            + drift * t + white noise + motion spikes
//! ```
//!
//! where `p(t)` is a unit-RMS-√½ pulse (fundamental plus 0.3 × second
//! harmonic) at `hr / 60` Hz. The respiratory term modulates both the pulse
//! amplitude and the baseline, so the trace carries respiratory energy in the
//! 0.15-0.35 Hz band as a real skin-reflectance trace does.

mod render;
mod synth;

pub use render::{render_frames, RenderedFrames};
pub use synth::synth_trace;

use crate::roi::BoundingBox;
use crate::vitals::SpO2Calibration;
use crate::{Error, Result};

/// One value per color channel. The blue channel plays the infrared role in
/// ratio-of-ratios oximetry.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChannelTriple {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl ChannelTriple {
    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        Self { r, g, b }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.r, self.g, self.b]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct NoiseSpec {
    /// Standard deviation of independent Gaussian noise per channel sample.
    pub white_sigma: f64,
    /// Linear illumination change, trace units per second, on all channels.
    pub illumination_drift_per_s: f64,
    /// Mean rate of Poisson-distributed motion spikes.
    pub motion_spike_rate_hz: f64,
    /// Height of each boxcar spike; the sign is random.
    pub motion_spike_amp: f64,
}

/// Scripted movement of the face box in rendered frames.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum MotionScript {
    #[default]
    Static,
    /// The box moves by `(dx, dy)` pixels at `at_s` and stays there.
    Jump { at_s: f64, dx: f64, dy: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct FrameGeometry {
    pub width: usize,
    pub height: usize,
    pub bounding_box: BoundingBox,
    pub motion: MotionScript,
}

impl Default for FrameGeometry {
    fn default() -> Self {
        Self {
            width: 640,
            height: 480,
            bounding_box: BoundingBox { x: 220.0, y: 120.0, width: 200.0, height: 240.0 },
            motion: MotionScript::Static,
        }
    }
}

impl FrameGeometry {
    /// A `width x height` frame with a centered box covering half of each
    /// dimension, snapped to multiples of four pixels.
    pub fn small(width: usize, height: usize) -> Self {
        let snap = |v: usize| (v / 4 * 4) as f64;
        let (bw, bh) = (snap(width / 2).max(4.0), snap(height / 2).max(4.0));
        Self {
            width,
            height,
            bounding_box: BoundingBox {
                x: snap((width - bw as usize) / 2),
                y: snap((height - bh as usize) / 2),
                width: bw,
                height: bh,
            },
            motion: MotionScript::Static,
        }
    }

    /// Box position at time `t`.
    pub fn box_at(&self, t: f64) -> BoundingBox {
        match self.motion {
            MotionScript::Jump { at_s, dx, dy } if t >= at_s => {
                BoundingBox { x: self.bounding_box.x + dx, y: self.bounding_box.y + dy, ..self.bounding_box }
            }
            _ => self.bounding_box,
        }
    }

    pub fn frame_area(&self) -> f64 {
        (self.width * self.height) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SimSpec {
    pub duration_s: f64,
    pub fps: f64,
    pub hr_bpm: f64,
    pub rr_brpm: f64,
    /// Peak pulse amplitude per channel, in 8-bit trace units.
    pub pulse_amplitude: ChannelTriple,
    pub dc_level: ChannelTriple,
    /// Respiratory modulation depth in `[0, 1)`.
    pub resp_modulation_depth: f64,
    pub noise: NoiseSpec,
    pub seed: u64,
    pub geometry: FrameGeometry,
}

impl Default for SimSpec {
    /// 30 s at 30 fps, 72 bpm, 15 breaths/min, ratio of ratios 0.5.
    fn default() -> Self {
        Self {
            duration_s: 30.0,
            fps: 30.0,
            hr_bpm: 72.0,
            rr_brpm: 15.0,
            pulse_amplitude: ChannelTriple::new(0.3, 1.0, 0.36),
            dc_level: ChannelTriple::new(150.0, 110.0, 90.0),
            resp_modulation_depth: 0.3,
            noise: NoiseSpec::default(),
            seed: 0,
            geometry: FrameGeometry::default(),
        }
    }
}

impl SimSpec {
    /// Sets white noise so the green pulse RMS to noise RMS ratio is `snr_db`.
    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        let pulse_rms = self.pulse_amplitude.g / core::f64::consts::SQRT_2;
        self.noise.white_sigma = pulse_rms * libm::pow(10.0, -snr_db / 20.0);
        self
    }

    pub fn frame_count(&self) -> usize {
        libm::round(self.duration_s * self.fps) as usize
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.duration_s,
            self.fps,
            self.hr_bpm,
            self.rr_brpm,
            self.resp_modulation_depth,
            self.noise.white_sigma,
            self.noise.illumination_drift_per_s,
            self.noise.motion_spike_rate_hz,
            self.noise.motion_spike_amp,
        ];
        if finite.iter().any(|v| !v.is_finite())
            || self.pulse_amplitude.as_array().iter().any(|v| !v.is_finite())
            || self.dc_level.as_array().iter().any(|v| !v.is_finite())
        {
            return Err(Error::InvalidSpec("all parameters must be finite"));
        }
        if self.duration_s <= 0.0 {
            return Err(Error::InvalidSpec("duration must be positive"));
        }
        if self.hr_bpm <= 0.0 {
            return Err(Error::InvalidSpec("heart rate must be positive"));
        }
        if self.fps <= 2.0 * self.hr_bpm / 60.0 {
            return Err(Error::InvalidSpec("frame rate is below the Nyquist rate of the pulse"));
        }
        if self.rr_brpm < 0.0 {
            return Err(Error::InvalidSpec("respiratory rate must not be negative"));
        }
        if !(0.0..1.0).contains(&self.resp_modulation_depth) {
            return Err(Error::InvalidSpec("modulation depth must lie in [0, 1)"));
        }
        if self.frame_count() < 2 {
            return Err(Error::InvalidSpec("spec yields fewer than two frames"));
        }
        if self.pulse_amplitude.as_array().iter().any(|&a| a < 0.0) {
            return Err(Error::InvalidSpec("pulse amplitudes must not be negative"));
        }
        if self.dc_level.as_array().iter().any(|&d| !(d > 0.0 && d <= 255.0)) {
            return Err(Error::InvalidSpec("dc levels must lie in (0, 255]"));
        }
        let n = &self.noise;
        if n.white_sigma < 0.0 || n.motion_spike_rate_hz < 0.0 || n.motion_spike_amp < 0.0 {
            return Err(Error::InvalidSpec("noise magnitudes must not be negative"));
        }
        let g = &self.geometry;
        if g.width == 0 || g.height == 0 {
            return Err(Error::InvalidSpec("frame must have non-zero size"));
        }
        for b in [g.box_at(f64::NEG_INFINITY), g.box_at(f64::INFINITY)] {
            if b.validate().is_err() || b.pixel_span(g.width, g.height).is_none() {
                return Err(Error::InvalidSpec("face box must overlap the frame"));
            }
        }
        Ok(())
    }
}

/// Vital signs implied by a [`SimSpec`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroundTruth {
    pub hr_bpm: f64,
    /// Zero without respiratory modulation, where beats are evenly spaced.
    /// Amplitude modulation shifts the sampled peak positions by an amount
    /// that depends on the estimator, so no reference exists then.
    pub hrv_ms: Option<f64>,
    /// `None` without respiratory modulation.
    pub rr_brpm: Option<f64>,
    pub ratio_of_ratios: f64,
    pub spo2_percent: f64,
    pub frame_width: usize,
    pub frame_height: usize,
}

impl GroundTruth {
    pub fn from_spec(spec: &SimSpec) -> Self {
        let amp = spec.pulse_amplitude;
        let dc = spec.dc_level;
        let ratio = if amp.b > 0.0 { (amp.r / dc.r) / (amp.b / dc.b) } else { f64::NAN };
        Self {
            hr_bpm: spec.hr_bpm,
            hrv_ms: (spec.resp_modulation_depth == 0.0).then_some(0.0),
            rr_brpm: (spec.resp_modulation_depth > 0.0 && spec.rr_brpm > 0.0).then_some(spec.rr_brpm),
            ratio_of_ratios: ratio,
            spo2_percent: SpO2Calibration::default().percent(ratio),
            frame_width: spec.geometry.width,
            frame_height: spec.geometry.height,
        }
    }
}
