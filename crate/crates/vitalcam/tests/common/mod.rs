#![allow(dead_code)]

use std::fs::File;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use vitalcam::config::Config;
use vitalcam::formats::{write_trace, AnnotationSidecar};
use vitalcam::service::AppState;
use vitalcam::video::{write_raw_video, DefaultDecoder, VideoDecoder};
use vitalcam_core::roi::{Frame, FrameAnnotation};
use vitalcam_core::sim::{render_frames, synth_trace, FrameGeometry, GroundTruth, SimSpec};

pub fn trace_csv(spec: &SimSpec) -> (Vec<u8>, GroundTruth) {
    let (trace, truth) = synth_trace(spec).unwrap();
    let mut buf = Vec::new();
    write_trace(&mut buf, &trace).unwrap();
    (buf, truth)
}

/// A rendered recording on 64x64 frames as a raw video plus its sidecar.
pub fn small_video_spec(duration_s: f64, seed: u64) -> SimSpec {
    SimSpec { duration_s, seed, geometry: FrameGeometry::small(64, 64), ..SimSpec::default() }
}

pub fn write_video(dir: &Path, spec: &SimSpec) -> (PathBuf, PathBuf, GroundTruth) {
    let rendered = render_frames(spec).unwrap();
    let truth = *rendered.ground_truth();
    let (frames, annotations): (Vec<Frame>, Vec<FrameAnnotation>) =
        rendered.map(|f| (f.frame, f.annotation.expect("rendered frames are annotated"))).unzip();
    let video = dir.join("clip.raw");
    write_raw_video(File::create(&video).unwrap(), &frames).unwrap();
    let sidecar = AnnotationSidecar {
        frame_width: Some(spec.geometry.width),
        frame_height: Some(spec.geometry.height),
        frames: annotations,
    };
    let sidecar_path = dir.join("clip.annotations.json");
    std::fs::write(&sidecar_path, serde_json::to_vec(&sidecar).unwrap()).unwrap();
    (video, sidecar_path, truth)
}

pub fn test_config(data_dir: &Path) -> Config {
    Config { data_dir: data_dir.to_path_buf(), workers: 4, ..Config::default() }
}

pub fn state_with(config: Config, decoder: Arc<dyn VideoDecoder>) -> AppState {
    AppState::new(config, decoder).unwrap()
}

pub fn state(data_dir: &Path) -> AppState {
    state_with(test_config(data_dir), Arc::new(DefaultDecoder))
}
