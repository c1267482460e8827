use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use super::Signal;
use crate::{Error, Result};

/// Order of the Butterworth prototype used by [`bandpass`].
pub const BANDPASS_ORDER: usize = 3;

/// One second-order section, `H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
}

impl Biquad {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let num = self.b[0] + z_inv * (self.b[1] + z_inv * self.b[2]);
        let den = 1.0 + z_inv * (self.a[0] + z_inv * self.a[1]);
        num / den
    }

    /// Direct-form-II-transposed state that a constant input `u` settles to.
    fn steady_state(&self, u: f64) -> ([f64; 2], f64) {
        let dc = (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1]);
        let y = dc * u;
        let s2 = self.b[2] * u - self.a[1] * y;
        let s1 = self.b[1] * u - self.a[0] * y + s2;
        ([s1, s2], y)
    }

    fn run(&self, x: &mut [f64], mut state: [f64; 2]) {
        for v in x.iter_mut() {
            let input = *v;
            let y = self.b[0] * input + state[0];
            state[0] = self.b[1] * input - self.a[0] * y + state[1];
            state[1] = self.b[2] * input - self.a[1] * y;
            *v = y;
        }
    }
}

/// Digital Butterworth band-pass filter as a cascade of second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct Butterworth {
    sections: Vec<Biquad>,
    sampling_rate: f64,
    low_hz: f64,
    high_hz: f64,
}

impl Butterworth {
    /// Designs an order-`order` band-pass (2·order poles) via the analog
    /// prototype, the low-pass to band-pass transform and the bilinear map with
    /// pre-warped band edges. Gain is normalized to one at the band center.
    pub fn bandpass(order: usize, low_hz: f64, high_hz: f64, sampling_rate: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidInput("filter order must be positive"));
        }
        let nyquist = sampling_rate / 2.0;
        if !(low_hz > 0.0 && low_hz < high_hz && high_hz < nyquist) {
            return Err(Error::InvalidInput("band must satisfy 0 < low < high < fs/2"));
        }
        let fs2 = 2.0 * sampling_rate;
        let w1 = fs2 * libm::tan(PI * low_hz / sampling_rate);
        let w2 = fs2 * libm::tan(PI * high_hz / sampling_rate);
        let bw = w2 - w1;
        let w0_sq = w1 * w2;

        let to_digital = |s: Complex64| (fs2 + s) / (fs2 - s);
        let section = |p: Complex64, q: Complex64| Biquad { b: [1.0, 0.0, -1.0], a: [-(p + q).re, (p * q).re] };

        let mut sections = Vec::with_capacity(order);
        for k in 0..order {
            let theta = PI * (2 * k + order + 1) as f64 / (2 * order) as f64;
            let proto = Complex64::from_polar(1.0, theta);
            if proto.im < -1e-12 {
                // Conjugate partner already handled.
                continue;
            }
            let pb = proto * bw;
            let disc = (pb * pb - 4.0 * w0_sq).sqrt();
            let s1 = to_digital((pb + disc) / 2.0);
            let s2 = to_digital((pb - disc) / 2.0);
            if proto.im > 1e-12 {
                sections.push(section(s1, s1.conj()));
                sections.push(section(s2, s2.conj()));
            } else {
                sections.push(section(s1, s2));
            }
        }

        let mut filter = Self { sections, sampling_rate, low_hz, high_hz };
        let center = sampling_rate / PI * libm::atan(libm::sqrt(w0_sq) / fs2);
        let gain = filter.gain_at(center);
        let per_section = libm::pow(gain, 1.0 / filter.sections.len() as f64);
        for s in filter.sections.iter_mut() {
            for b in s.b.iter_mut() {
                *b /= per_section;
            }
        }
        Ok(filter)
    }

    /// Magnitude of the single-pass frequency response at `freq_hz`.
    pub fn gain_at(&self, freq_hz: f64) -> f64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * freq_hz / self.sampling_rate);
        self.sections.iter().fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(z_inv)).norm()
    }

    pub fn band(&self) -> (f64, f64) {
        (self.low_hz, self.high_hz)
    }

    /// Causal single pass, starting from the steady state of the first sample.
    fn run(&self, x: &mut [f64]) {
        let Some(&first) = x.first() else { return };
        let mut level = first;
        for s in &self.sections {
            let (state, out) = s.steady_state(level);
            s.run(x, state);
            level = out;
        }
    }

    /// Forward-backward filtering; zero phase, squared magnitude response.
    ///
    /// The input is extended at both ends by odd reflection before filtering
    /// to suppress start-up transients.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        if n < 2 {
            return x.to_vec();
        }
        let settle = libm::ceil(3.0 * self.sampling_rate / self.low_hz) as usize;
        let pad = settle.min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        for i in (1..=pad).rev() {
            ext.push(2.0 * x[0] - x[i]);
        }
        ext.extend_from_slice(x);
        for i in 1..=pad {
            ext.push(2.0 * x[n - 1] - x[n - 1 - i]);
        }
        self.run(&mut ext);
        ext.reverse();
        self.run(&mut ext);
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }
}

/// Zero-phase order-3 Butterworth band-pass over `[low_hz, high_hz]`.
pub fn bandpass(signal: &Signal, low_hz: f64, high_hz: f64) -> Result<Signal> {
    signal.require_len(2, "bandpass needs at least two samples")?;
    let filter = Butterworth::bandpass(BANDPASS_ORDER, low_hz, high_hz, signal.sampling_rate())?;
    Ok(signal.with_samples(filter.filtfilt(signal.samples())))
}
