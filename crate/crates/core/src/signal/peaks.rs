use alloc::vec::Vec;

use super::Signal;
use crate::{Error, Result};

/// Shortest beat-to-beat spacing at the top of the heart-rate band (240 bpm).
pub const DEFAULT_MIN_DISTANCE_S: f64 = 0.25;
/// Minimum prominence as a fraction of the signal range.
pub const DEFAULT_MIN_PROMINENCE: f64 = 0.1;

/// Times and amplitudes of detected peaks.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PeakSeries {
    peak_times: Vec<f64>,
    peak_amplitudes: Vec<f64>,
}

impl PeakSeries {
    /// Builds a series from times that must be strictly increasing.
    pub fn new(peak_times: Vec<f64>, peak_amplitudes: Vec<f64>) -> Result<Self> {
        if peak_times.len() != peak_amplitudes.len() {
            return Err(Error::InvalidInput("peak times and amplitudes differ in length"));
        }
        if peak_times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("peak times must be strictly increasing"));
        }
        Ok(Self { peak_times, peak_amplitudes })
    }

    /// Series with unit amplitudes, for callers that only have times.
    pub fn from_times(peak_times: Vec<f64>) -> Result<Self> {
        let amps = alloc::vec![1.0; peak_times.len()];
        Self::new(peak_times, amps)
    }

    pub fn times(&self) -> &[f64] {
        &self.peak_times
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.peak_amplitudes
    }

    pub fn len(&self) -> usize {
        self.peak_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peak_times.is_empty()
    }
}

struct Candidate {
    index: usize,
    plateau: bool,
}

/// Finds local maxima that are at least `min_distance_s` apart and whose
/// topographic prominence reaches `min_prominence * (max - min)`.
///
/// When two peaks are closer than the minimum distance the taller one is
/// kept. Peak positions are refined to sub-sample precision by fitting a
/// parabola through the three samples around each strict maximum.
pub fn detect_peaks(signal: &Signal, min_distance_s: f64, min_prominence: f64) -> Result<PeakSeries> {
    if !(min_distance_s.is_finite() && min_distance_s > 0.0) {
        return Err(Error::InvalidInput("min_distance_s must be positive"));
    }
    if !(0.0..=1.0).contains(&min_prominence) {
        return Err(Error::InvalidInput("min_prominence must be within [0, 1]"));
    }
    let x = signal.samples();
    let n = x.len();
    if n < 3 {
        return Ok(PeakSeries::default());
    }
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let threshold = min_prominence * (hi - lo);

    let mut candidates: Vec<Candidate> =
        local_maxima(x).into_iter().filter(|c| prominence(x, c.index) >= threshold).collect();

    // Keep the tallest peaks first, dropping neighbours inside the exclusion zone.
    let min_gap = min_distance_s * signal.sampling_rate();
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| x[candidates[b].index].total_cmp(&x[candidates[a].index]).then(a.cmp(&b)));
    let mut keep = alloc::vec![true; candidates.len()];
    for &i in &order {
        if !keep[i] {
            continue;
        }
        let pi = candidates[i].index as f64;
        for j in (0..i).rev() {
            if pi - candidates[j].index as f64 >= min_gap {
                break;
            }
            keep[j] = false;
        }
        for j in i + 1..candidates.len() {
            if candidates[j].index as f64 - pi >= min_gap {
                break;
            }
            keep[j] = false;
        }
    }
    let mut k = 0;
    candidates.retain(|_| {
        let r = keep[k];
        k += 1;
        r
    });

    let mut times = Vec::with_capacity(candidates.len());
    let mut amps = Vec::with_capacity(candidates.len());
    for c in &candidates {
        let (offset, amp) =
            if c.plateau { (0.0, x[c.index]) } else { refine(x[c.index - 1], x[c.index], x[c.index + 1]) };
        times.push(signal.start_time() + (c.index as f64 + offset) / signal.sampling_rate());
        amps.push(amp);
    }
    PeakSeries::new(times, amps)
}

fn local_maxima(x: &[f64]) -> Vec<Candidate> {
    let n = x.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i < n - 1 {
        if x[i - 1] < x[i] {
            let mut ahead = i + 1;
            while ahead < n - 1 && x[ahead] == x[i] {
                ahead += 1;
            }
            if x[ahead] < x[i] {
                out.push(Candidate { index: (i + ahead - 1) / 2, plateau: ahead - 1 > i });
                i = ahead;
            }
        }
        i += 1;
    }
    out
}

fn prominence(x: &[f64], peak: usize) -> f64 {
    let height = x[peak];
    let mut left_min = height;
    for &v in x[..peak].iter().rev() {
        if v > height {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = height;
    for &v in &x[peak + 1..] {
        if v > height {
            break;
        }
        right_min = right_min.min(v);
    }
    height - left_min.max(right_min)
}

/// Vertex of the parabola through `(-1, y0), (0, y1), (1, y2)`.
fn refine(y0: f64, y1: f64, y2: f64) -> (f64, f64) {
    let denom = y0 - 2.0 * y1 + y2;
    if denom >= 0.0 {
        return (0.0, y1);
    }
    let offset = (0.5 * (y0 - y2) / denom).clamp(-0.5, 0.5);
    (offset, y1 - 0.25 * (y0 - y2) * offset)
}
