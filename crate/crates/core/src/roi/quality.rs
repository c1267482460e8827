use alloc::vec::Vec;

use super::FrameAnnotation;
use crate::{math, Error, Result};

/// Largest tolerated movement of the face-box center between consecutive
/// annotated frames, in pixels.
pub const MAX_DISPLACEMENT_PX: f64 = 15.0;
/// Below this face-area to frame-area ratio the subject is too far away.
pub const MIN_FACE_AREA_RATIO: f64 = 0.05;
/// Median RoI brightness (0-255) below which the scene counts as dark.
pub const DARK_BRIGHTNESS: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BrightnessClass {
    Bright,
    Dark,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Verdict {
    Ok,
    TooFar,
    TooMuchMotion,
    TooDark,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Ok => "ok",
            Verdict::TooFar => "too_far",
            Verdict::TooMuchMotion => "too_much_motion",
            Verdict::TooDark => "too_dark",
        }
    }
}

/// Guidance for a failed gate. The wire name matches the verdict it explains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MessageCode {
    TooMuchMotion,
    TooFar,
    TooDark,
}

impl MessageCode {
    pub fn as_str(self) -> &'static str {
        match self {
            MessageCode::TooMuchMotion => "too_much_motion",
            MessageCode::TooFar => "too_far",
            MessageCode::TooDark => "too_dark",
        }
    }

    /// User-facing guidance text.
    pub fn message(self) -> &'static str {
        match self {
            MessageCode::TooMuchMotion => "Please stay steady and record again.",
            MessageCode::TooFar => "Please move closer to the camera so your face fills more of the frame.",
            MessageCode::TooDark => "The scene is too dark; please move to a brighter place.",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QualityAssessment {
    pub face_area_ratio: f64,
    pub max_displacement: f64,
    pub brightness_class: BrightnessClass,
    pub verdict: Verdict,
    /// Every failed gate, highest precedence first. Empty when the verdict is ok.
    pub message_codes: Vec<MessageCode>,
}

impl QualityAssessment {
    pub fn is_ok(&self) -> bool {
        self.verdict == Verdict::Ok
    }

    pub fn primary_message(&self) -> Option<MessageCode> {
        self.message_codes.first().copied()
    }
}

/// Gates a recording on subject distance, motion and lighting.
///
/// Precedence: motion over distance over darkness. Only annotation geometry
/// and the brightness series are consulted.
pub fn assess_quality(
    annotations: &[FrameAnnotation],
    frame_area: f64,
    brightness: &[f64],
) -> Result<QualityAssessment> {
    if annotations.len() < 2 {
        return Err(Error::InsufficientData("quality assessment needs at least two annotations"));
    }
    if !(frame_area.is_finite() && frame_area > 0.0) {
        return Err(Error::InvalidInput("frame area must be positive"));
    }
    let areas: Vec<f64> = annotations.iter().map(|a| a.bounding_box.area()).collect();
    let face_area_ratio = (math::median(&areas) / frame_area).clamp(0.0, 1.0);
    let max_displacement =
        annotations.windows(2).map(|w| w[0].bounding_box.displacement_to(&w[1].bounding_box)).fold(0.0, f64::max);
    let brightness_class = if !brightness.is_empty() && math::median(brightness) < DARK_BRIGHTNESS {
        BrightnessClass::Dark
    } else {
        BrightnessClass::Bright
    };

    let mut message_codes = Vec::new();
    if max_displacement > MAX_DISPLACEMENT_PX {
        message_codes.push(MessageCode::TooMuchMotion);
    }
    if face_area_ratio < MIN_FACE_AREA_RATIO {
        message_codes.push(MessageCode::TooFar);
    }
    if brightness_class == BrightnessClass::Dark {
        message_codes.push(MessageCode::TooDark);
    }
    let verdict = match message_codes.first() {
        None => Verdict::Ok,
        Some(MessageCode::TooMuchMotion) => Verdict::TooMuchMotion,
        Some(MessageCode::TooFar) => Verdict::TooFar,
        Some(MessageCode::TooDark) => Verdict::TooDark,
    };
    Ok(QualityAssessment { face_area_ratio, max_displacement, brightness_class, verdict, message_codes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roi::BoundingBox;
    use alloc::vec;

    fn track(boxes: &[(f64, f64, f64, f64)]) -> Vec<FrameAnnotation> {
        boxes
            .iter()
            .enumerate()
            .map(|(i, &(x, y, w, h))| {
                FrameAnnotation::new(i as u64, i as f64 / 30.0, BoundingBox::new(x, y, w, h).unwrap())
            })
            .collect()
    }

    // 100x100 frame, 10% face area.
    const FRAME: f64 = 10_000.0;

    #[test]
    fn static_box_passes() {
        let a = track(&[(40.0, 40.0, 25.0, 40.0); 10]);
        let q = assess_quality(&a, FRAME, &[120.0; 10]).unwrap();
        assert_eq!(q.verdict, Verdict::Ok);
        assert!((q.face_area_ratio - 0.1).abs() < 1e-12);
        assert_eq!(q.max_displacement, 0.0);
        assert!(q.message_codes.is_empty());
    }

    #[test]
    fn twenty_pixel_jump_is_motion() {
        let a = track(&[(40.0, 40.0, 25.0, 40.0), (60.0, 40.0, 25.0, 40.0)]);
        let q = assess_quality(&a, FRAME, &[120.0; 2]).unwrap();
        assert_eq!(q.verdict, Verdict::TooMuchMotion);
        assert!((q.max_displacement - 20.0).abs() < 1e-12);
    }

    #[test]
    fn threshold_is_exclusive() {
        let a = track(&[(40.0, 40.0, 25.0, 40.0), (55.0, 40.0, 25.0, 40.0)]);
        assert_eq!(assess_quality(&a, FRAME, &[120.0; 2]).unwrap().verdict, Verdict::Ok);
    }

    #[test]
    fn small_face_is_too_far() {
        let a = track(&[(10.0, 10.0, 10.0, 20.0); 5]);
        let q = assess_quality(&a, FRAME, &[120.0; 5]).unwrap();
        assert!((q.face_area_ratio - 0.02).abs() < 1e-12);
        assert_eq!(q.verdict, Verdict::TooFar);
    }

    #[test]
    fn dark_scene() {
        let a = track(&[(40.0, 40.0, 25.0, 40.0); 3]);
        let q = assess_quality(&a, FRAME, &[30.0, 40.0, 200.0]).unwrap();
        assert_eq!(q.verdict, Verdict::TooDark);
        assert_eq!(q.brightness_class, BrightnessClass::Dark);
    }

    #[test]
    fn precedence_motion_then_distance_then_dark() {
        let a = track(&[(10.0, 10.0, 10.0, 20.0), (40.0, 10.0, 10.0, 20.0)]);
        let q = assess_quality(&a, FRAME, &[10.0, 10.0]).unwrap();
        assert_eq!(q.verdict, Verdict::TooMuchMotion);
        assert_eq!(q.message_codes, vec![MessageCode::TooMuchMotion, MessageCode::TooFar, MessageCode::TooDark]);
    }

    #[test]
    fn needs_two_annotations() {
        let a = track(&[(0.0, 0.0, 1.0, 1.0)]);
        assert!(assess_quality(&a, FRAME, &[100.0]).is_err());
    }
}
