//! Recording → quality gate → vital signs, shared by the CLI and the service.

use std::path::Path;

use serde::{Deserialize, Serialize};
use vitalcam_core::roi::{build_trace, FrameTrace, IlluminationPolicy, QualityAssessment, RoiMode};
use vitalcam_core::vitals::{estimate_all, VitalsConfig, VitalsReport};

use crate::formats::AnnotationSidecar;
use crate::video::{Paired, VideoDecoder};
use crate::{Error, Result};

/// Frame size assumed for trace uploads that do not state one.
pub const DEFAULT_FRAME_SIZE: (usize, usize) = (640, 480);

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PipelineConfig {
    pub roi_mode: RoiMode,
    pub illumination: IlluminationPolicy,
    pub vitals: VitalsConfig,
}

/// Quality verdict plus, only when the recording passed, the vital signs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub quality: QualityAssessment,
    pub report: Option<VitalsReport>,
}

impl Analysis {
    pub fn is_rejected(&self) -> bool {
        !self.quality.is_ok()
    }
}

/// Gates a trace on its own box and brightness columns, then estimates vitals.
pub fn analyze_trace(trace: &FrameTrace, frame_size: (usize, usize), config: &PipelineConfig) -> Result<Analysis> {
    let (w, h) = frame_size;
    if w == 0 || h == 0 {
        return Err(Error::Format("frame size must be positive".into()));
    }
    let quality = trace.assess_quality((w * h) as f64)?;
    finish(trace, quality, config)
}

/// Decodes `video`, pairs frames with the sidecar annotations, builds the
/// color trace and estimates vitals.
pub fn analyze_video(
    video: &Path,
    sidecar: &AnnotationSidecar,
    decoder: &dyn VideoDecoder,
    config: &PipelineConfig,
) -> Result<Analysis> {
    let frames = decoder.decode(video)?;
    let mut decode_error = None;
    let paired = Paired::new(frames, sidecar.frames.clone(), &mut decode_error);
    let built = build_trace(paired, config.roi_mode, config.illumination);
    if let Some(e) = decode_error {
        return Err(e);
    }
    let (trace, quality) = built?;
    finish(&trace, quality, config)
}

fn finish(trace: &FrameTrace, quality: QualityAssessment, config: &PipelineConfig) -> Result<Analysis> {
    if !quality.is_ok() {
        return Ok(Analysis { quality, report: None });
    }
    let report = estimate_all(trace, &config.vitals)?;
    Ok(Analysis { quality, report: Some(report) })
}
