use alloc::vec::Vec;

use super::{
    assess_quality, equalize_histogram, extract_channel_means, AnnotatedFrame, BoundingBox, FrameAnnotation,
    QualityAssessment, RoiMode, DARK_BRIGHTNESS,
};
use crate::{math, Error, Result};

/// Fraction of frames allowed to have no usable face before the recording is
/// rejected outright.
pub const MAX_NO_FACE_FRACTION: f64 = 0.2;
/// Sliding-median window used to remove motion jumps, seconds.
pub const DESPIKE_WINDOW_S: f64 = 0.5;
/// Samples further than this many scaled MADs from the local median are spikes.
pub const DESPIKE_MADS: f64 = 3.0;
/// Deviations of at most one 8-bit level are never treated as spikes.
pub const DESPIKE_FLOOR: f64 = 1.0;

/// When to run histogram equalization on a frame before sampling it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum IlluminationPolicy {
    Never,
    #[default]
    OnDark,
    Always,
}

/// One sample of the raw color trace.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceEntry {
    pub timestamp: f64,
    pub mean_r: f64,
    pub mean_g: f64,
    pub mean_b: f64,
    pub brightness: f64,
    pub bounding_box: BoundingBox,
}

/// Time-stamped RoI color means for a recording.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrameTrace {
    entries: Vec<TraceEntry>,
    nominal_fps: f64,
}

impl FrameTrace {
    /// Validates ordering, channel ranges and length.
    pub fn new(entries: Vec<TraceEntry>, nominal_fps: f64) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::InsufficientData("a trace needs at least two entries"));
        }
        if !(nominal_fps.is_finite() && nominal_fps > 0.0) {
            return Err(Error::InvalidInput("nominal fps must be positive"));
        }
        for e in &entries {
            let vals = [e.timestamp, e.mean_r, e.mean_g, e.mean_b, e.brightness];
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("trace values must be finite"));
            }
            if [e.mean_r, e.mean_g, e.mean_b, e.brightness].iter().any(|v| !(0.0..=255.0).contains(v)) {
                return Err(Error::InvalidInput("channel means must lie within [0, 255]"));
            }
            e.bounding_box.validate()?;
        }
        if entries.windows(2).any(|w| !(w[1].timestamp > w[0].timestamp)) {
            return Err(Error::InvalidInput("trace timestamps must be strictly increasing"));
        }
        Ok(Self { entries, nominal_fps })
    }

    /// Builds a trace whose nominal rate is inferred from the median frame
    /// interval.
    pub fn from_entries(entries: Vec<TraceEntry>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::InsufficientData("a trace needs at least two entries"));
        }
        let dts: Vec<f64> = entries.windows(2).map(|w| w[1].timestamp - w[0].timestamp).collect();
        let dt = math::median(&dts);
        if !(dt > 0.0) {
            return Err(Error::InvalidInput("trace timestamps must be strictly increasing"));
        }
        Self::new(entries, 1.0 / dt)
    }

    pub fn entries(&self) -> &[TraceEntry] {
        &self.entries
    }

    pub fn nominal_fps(&self) -> f64 {
        self.nominal_fps
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Time spanned by the entries plus one nominal frame period.
    pub fn duration(&self) -> f64 {
        let first = self.entries[0].timestamp;
        let last = self.entries[self.entries.len() - 1].timestamp;
        last - first + 1.0 / self.nominal_fps
    }

    pub fn timestamps(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.timestamp).collect()
    }

    pub fn red(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.mean_r).collect()
    }

    pub fn green(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.mean_g).collect()
    }

    pub fn blue(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.mean_b).collect()
    }

    pub fn brightness(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.brightness).collect()
    }

    /// Synthetic annotations recovered from the stored boxes.
    pub fn annotations(&self) -> Vec<FrameAnnotation> {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, e)| FrameAnnotation::new(i as u64, e.timestamp, e.bounding_box))
            .collect()
    }

    /// Quality gates evaluated from the stored boxes and brightness.
    pub fn assess_quality(&self, frame_area: f64) -> Result<QualityAssessment> {
        assess_quality(&self.annotations(), frame_area, &self.brightness())
    }
}

/// Turns an ordered stream of frames into a color trace and its quality
/// assessment.
///
/// Frames without an annotation, or whose box misses the image, are skipped.
/// More than [`MAX_NO_FACE_FRACTION`] of such frames makes the recording
/// unusable. The channel series are despiked with a sliding median before the
/// trace is returned.
pub fn build_trace<I>(frames: I, mode: RoiMode, policy: IlluminationPolicy) -> Result<(FrameTrace, QualityAssessment)>
where
    I: IntoIterator<Item = AnnotatedFrame>,
{
    let mut entries = Vec::new();
    let mut annotations = Vec::new();
    let mut total = 0usize;
    let mut frame_area = 0.0;
    let mut last_ts = f64::NEG_INFINITY;
    for AnnotatedFrame { frame, annotation } in frames {
        total += 1;
        if frame_area == 0.0 {
            frame_area = frame.area();
        }
        let Some(annotation) = annotation else { continue };
        if !(annotation.timestamp > last_ts) {
            return Err(Error::InvalidInput("frame timestamps must be strictly increasing"));
        }
        let raw = match extract_channel_means(&frame, &annotation, mode) {
            Ok(m) => m,
            Err(Error::NoFace) => continue,
            Err(e) => return Err(e),
        };
        let equalize = match policy {
            IlluminationPolicy::Never => false,
            IlluminationPolicy::Always => true,
            IlluminationPolicy::OnDark => raw.brightness < DARK_BRIGHTNESS,
        };
        let means = if equalize { extract_channel_means(&equalize_histogram(&frame), &annotation, mode)? } else { raw };
        last_ts = annotation.timestamp;
        entries.push(TraceEntry {
            timestamp: annotation.timestamp,
            mean_r: means.r,
            mean_g: means.g,
            mean_b: means.b,
            brightness: raw.brightness,
            bounding_box: annotation.bounding_box,
        });
        annotations.push(annotation);
    }
    if total < 2 || entries.len() < 2 {
        return Err(Error::InsufficientData("need at least two annotated frames"));
    }
    let missing = (total - entries.len()) as f64 / total as f64;
    if missing > MAX_NO_FACE_FRACTION {
        return Err(Error::UnusableRecording("no face found in too many frames"));
    }

    let brightness: Vec<f64> = entries.iter().map(|e| e.brightness).collect();
    let quality = assess_quality(&annotations, frame_area, &brightness)?;

    let trace = FrameTrace::from_entries(entries)?;
    let window = math::odd_window(DESPIKE_WINDOW_S * trace.nominal_fps()).max(3);
    let mut entries = trace.entries;
    let channels: [fn(&mut TraceEntry) -> &mut f64; 3] = [|e| &mut e.mean_r, |e| &mut e.mean_g, |e| &mut e.mean_b];
    for field in channels {
        let series: Vec<f64> = entries.iter_mut().map(|e| *field(e)).collect();
        for (e, v) in entries.iter_mut().zip(despike(&series, window)) {
            *field(e) = v;
        }
    }
    Ok((FrameTrace::new(entries, trace.nominal_fps)?, quality))
}

/// Hampel-style filter: replaces samples that deviate from the sliding median
/// by more than `DESPIKE_MADS` scaled median absolute deviations (and by more
/// than one 8-bit level) with that median.
///
/// The spread is the larger of the window's MAD and the MAD of the whole
/// line-detrended series. A half-second window covers under one cardiac cycle
/// at low heart rates, so the local MAD alone flags clean pulse peaks.
pub fn despike(series: &[f64], window: usize) -> Vec<f64> {
    let n = series.len();
    let half = window / 2;
    let mut out = series.to_vec();
    let residual = math::remove_line(series);
    let center = math::median(&residual);
    let spread: Vec<f64> = residual.iter().map(|v| libm::fabs(v - center)).collect();
    let global_mad = 1.4826 * math::median(&spread);
    let mut buf = Vec::with_capacity(window);
    for i in 0..n {
        let lo = i.saturating_sub(half);
        let hi = (i + half + 1).min(n);
        buf.clear();
        buf.extend_from_slice(&series[lo..hi]);
        let med = math::median(&buf);
        for v in buf.iter_mut() {
            *v = libm::fabs(*v - med);
        }
        let mad = (1.4826 * math::median(&buf)).max(global_mad);
        let limit = (DESPIKE_MADS * mad).max(DESPIKE_FLOOR);
        if libm::fabs(series[i] - med) > limit {
            out[i] = med;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roi::Frame;
    use alloc::vec;

    fn annotated(i: usize, rgb: [u8; 3], bbox: BoundingBox) -> AnnotatedFrame {
        AnnotatedFrame {
            frame: Frame::uniform(16, 16, rgb).unwrap(),
            annotation: Some(FrameAnnotation::new(i as u64, i as f64 / 30.0, bbox)),
        }
    }

    fn face() -> BoundingBox {
        BoundingBox::new(4.0, 4.0, 8.0, 8.0).unwrap()
    }

    #[test]
    fn color_ramp_round_trips() {
        let frames: Vec<_> = (0..30).map(|i| annotated(i, [100 + i as u8, 80, 60], face())).collect();
        let (trace, q) = build_trace(frames, RoiMode::FullBox, IlluminationPolicy::Never).unwrap();
        assert_eq!(trace.len(), 30);
        for (i, e) in trace.entries().iter().enumerate() {
            assert_eq!(e.mean_r, 100.0 + i as f64);
            assert_eq!(e.mean_g, 80.0);
        }
        assert!((trace.nominal_fps() - 30.0).abs() < 1e-9);
        assert!(q.is_ok());
    }

    #[test]
    fn single_frame_is_insufficient() {
        let frames = vec![annotated(0, [1, 2, 3], face())];
        assert!(matches!(
            build_trace(frames, RoiMode::FullBox, IlluminationPolicy::Never),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn one_missing_face_of_hundred() {
        let mut frames: Vec<_> = (0..100).map(|i| annotated(i, [120, 120, 120], face())).collect();
        frames[40].annotation.as_mut().unwrap().bounding_box = BoundingBox::new(50.0, 50.0, 4.0, 4.0).unwrap();
        let (trace, q) = build_trace(frames, RoiMode::FullBox, IlluminationPolicy::Never).unwrap();
        assert_eq!(trace.len(), 99);
        assert!(q.is_ok());
    }

    #[test]
    fn too_many_missing_faces() {
        let frames: Vec<_> = (0..10)
            .map(|i| {
                let mut f = annotated(i, [120, 120, 120], face());
                if i < 3 {
                    f.annotation = None;
                }
                f
            })
            .collect();
        assert!(matches!(
            build_trace(frames, RoiMode::FullBox, IlluminationPolicy::Never),
            Err(Error::UnusableRecording(_))
        ));
    }

    #[test]
    fn despike_removes_boxcar_and_keeps_smooth_signal() {
        let clean: Vec<f64> =
            (0..300).map(|i| 100.0 + 2.0 * libm::sin(2.0 * core::f64::consts::PI * 1.2 * i as f64 / 30.0)).collect();
        assert_eq!(despike(&clean, 15), clean);
        let mut spiky = clean.clone();
        for v in &mut spiky[100..105] {
            *v += 25.0;
        }
        let fixed = despike(&spiky, 15);
        for i in 100..105 {
            assert!((fixed[i] - clean[i]).abs() < 2.5, "{i}: {} vs {}", fixed[i], clean[i]);
        }
    }

    #[test]
    fn trace_rejects_bad_entries() {
        let e =
            TraceEntry { timestamp: 0.0, mean_r: 1.0, mean_g: 1.0, mean_b: 1.0, brightness: 1.0, bounding_box: face() };
        let mut later = e;
        later.timestamp = 0.0;
        assert!(FrameTrace::new(vec![e, later], 30.0).is_err());
        later.timestamp = 1.0;
        later.mean_g = 300.0;
        assert!(FrameTrace::new(vec![e, later], 30.0).is_err());
    }
}
