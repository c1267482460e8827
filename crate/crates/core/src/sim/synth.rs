use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::{GroundTruth, SimSpec};
use crate::roi::{FrameTrace, TraceEntry};
use crate::Result;

/// Relative weight and phase offset of the pulse's second harmonic.
const HARMONIC_WEIGHT: f64 = 0.3;
const HARMONIC_PHASE: f64 = 0.6 * PI;
/// Motion spike duration range, seconds.
const SPIKE_DURATION_S: (f64, f64) = (0.1, 0.3);

struct Rng(ChaCha8Rng);

impl Rng {
    fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(TAU * u2)
    }

    fn exponential(&mut self, rate: f64) -> f64 {
        -libm::log(1.0 - self.uniform()) / rate
    }
}

struct Spike {
    start: f64,
    end: f64,
    height: f64,
}

fn pulse(phase: f64) -> f64 {
    let norm = libm::sqrt(1.0 + HARMONIC_WEIGHT * HARMONIC_WEIGHT);
    (libm::sin(phase) + HARMONIC_WEIGHT * libm::sin(2.0 * phase + HARMONIC_PHASE)) / norm
}

/// Noise-free-to-noisy trace and its ground truth. Identical specs give
/// bit-identical traces.
pub fn synth_trace(spec: &SimSpec) -> Result<(FrameTrace, GroundTruth)> {
    spec.validate()?;
    let mut rng = Rng::new(spec.seed);
    let cardiac_phase = TAU * rng.uniform();
    let resp_phase = TAU * rng.uniform();

    let n = spec.frame_count();
    let noise = &spec.noise;
    let mut spikes = Vec::new();
    if noise.motion_spike_rate_hz > 0.0 && noise.motion_spike_amp > 0.0 {
        let mut t = rng.exponential(noise.motion_spike_rate_hz);
        while t < spec.duration_s {
            let (lo, hi) = SPIKE_DURATION_S;
            let len = lo + (hi - lo) * rng.uniform();
            let sign = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
            spikes.push(Spike { start: t, end: t + len, height: sign * noise.motion_spike_amp });
            t += rng.exponential(noise.motion_spike_rate_hz);
        }
    }

    let f_hr = spec.hr_bpm / 60.0;
    let f_rr = spec.rr_brpm / 60.0;
    let dc = spec.dc_level.as_array();
    let amp = spec.pulse_amplitude.as_array();
    let mut entries = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / spec.fps;
        let p = pulse(TAU * f_hr * t + cardiac_phase);
        let m = 1.0 + spec.resp_modulation_depth * libm::sin(TAU * f_rr * t + resp_phase);
        let spike: f64 = spikes.iter().filter(|s| s.start <= t && t < s.end).map(|s| s.height).sum();
        let common = noise.illumination_drift_per_s * t + spike;
        let mut value = [0.0; 3];
        for c in 0..3 {
            let white = if noise.white_sigma > 0.0 { noise.white_sigma * rng.normal() } else { 0.0 };
            let v = dc[c] + amp[c] * (m * (1.0 + p) - 1.0) + common + white;
            value[c] = v.clamp(0.0, 255.0);
        }
        entries.push(TraceEntry {
            timestamp: t,
            mean_r: value[0],
            mean_g: value[1],
            mean_b: value[2],
            brightness: (value[0] + value[1] + value[2]) / 3.0,
            bounding_box: spec.geometry.box_at(t),
        });
    }
    Ok((FrameTrace::new(entries, spec.fps)?, GroundTruth::from_spec(spec)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math;
    use crate::signal::{estimate_spectrum, Signal};
    use crate::sim::NoiseSpec;

    #[test]
    fn pulse_has_rms_of_a_unit_sinusoid() {
        let n = 10_000;
        let ms = (0..n).map(|i| pulse(TAU * i as f64 / n as f64).powi(2)).sum::<f64>() / n as f64;
        assert!((ms - 0.5).abs() < 1e-9, "{ms}");
    }

    #[test]
    fn same_seed_same_trace() {
        let spec = SimSpec {
            noise: NoiseSpec {
                white_sigma: 0.5,
                illumination_drift_per_s: 0.1,
                motion_spike_rate_hz: 0.2,
                motion_spike_amp: 5.0,
            },
            seed: 42,
            ..SimSpec::default()
        };
        let (a, _) = synth_trace(&spec).unwrap();
        let (b, _) = synth_trace(&spec).unwrap();
        assert_eq!(a, b);
        let (c, _) = synth_trace(&SimSpec { seed: 43, ..spec }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn clean_green_spectrum_peaks_at_heart_rate() {
        let (trace, _) = synth_trace(&SimSpec::default()).unwrap();
        let s = Signal::new(trace.green(), 30.0).unwrap();
        let spec = estimate_spectrum(&s, 0.7, 4.0).unwrap();
        assert!((spec.dominant_frequency - 1.2).abs() <= spec.resolution() + 1e-9);
    }

    #[test]
    fn no_modulation_means_no_respiratory_power() {
        let spec = SimSpec { resp_modulation_depth: 0.0, duration_s: 60.0, ..SimSpec::default() };
        let (trace, gt) = synth_trace(&spec).unwrap();
        assert_eq!(gt.rr_brpm, None);
        let g = Signal::new(math::remove_line(&trace.green()), 30.0).unwrap();
        let resp = estimate_spectrum(&g, 0.15, 0.35).unwrap().peak_magnitude();
        let card = estimate_spectrum(&g, 0.7, 4.0).unwrap().peak_magnitude();
        assert!((resp / card).powi(2) < 0.01);
    }

    #[test]
    fn spikes_are_boxcars_on_every_channel() {
        let spec = SimSpec {
            pulse_amplitude: super::super::ChannelTriple::new(0.0, 0.0, 0.0),
            noise: NoiseSpec { motion_spike_rate_hz: 0.5, motion_spike_amp: 8.0, ..NoiseSpec::default() },
            seed: 7,
            ..SimSpec::default()
        };
        let (trace, _) = synth_trace(&spec).unwrap();
        let g = trace.green();
        let r = trace.red();
        assert!(g.iter().any(|&v| (v - 110.0).abs() == 8.0));
        for (gv, rv) in g.iter().zip(&r) {
            assert_eq!(gv - 110.0, rv - 150.0);
        }
    }

    #[test]
    fn invalid_spec_is_rejected() {
        let spec = SimSpec { fps: 2.0, ..SimSpec::default() };
        assert!(matches!(synth_trace(&spec), Err(crate::Error::InvalidSpec(_))));
    }
}
