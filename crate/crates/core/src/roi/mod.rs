//! From annotated video frames to a color trace plus a recording-quality verdict.

mod extract;
mod frame;
mod histogram;
mod quality;
mod trace;

pub use extract::{extract_channel_means, ChannelMeans, RoiMode};
pub use frame::{AnnotatedFrame, BoundingBox, Frame, FrameAnnotation, Landmarks, Point};
pub use histogram::equalize_histogram;
pub use quality::{
    assess_quality, BrightnessClass, MessageCode, QualityAssessment, Verdict, DARK_BRIGHTNESS, MAX_DISPLACEMENT_PX,
    MIN_FACE_AREA_RATIO,
};
pub use trace::{
    build_trace, despike, FrameTrace, IlluminationPolicy, TraceEntry, DESPIKE_WINDOW_S, MAX_NO_FACE_FRACTION,
};
