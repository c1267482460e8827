use alloc::vec::Vec;

use super::{synth_trace, GroundTruth, SimSpec};
use crate::roi::{AnnotatedFrame, Frame, FrameAnnotation, TraceEntry};
use crate::Result;

const BACKGROUND: u8 = 128;

/// 4x4 Bayer matrix; thresholds are `(BAYER + 0.5) / 16`.
const BAYER: [[u8; 4]; 4] = [[0, 8, 2, 10], [12, 4, 14, 6], [3, 11, 1, 9], [15, 7, 13, 5]];

/// Lazily rendered frames for a [`SimSpec`], one per trace sample.
#[derive(Debug, Clone)]
pub struct RenderedFrames {
    entries: Vec<TraceEntry>,
    width: usize,
    height: usize,
    next: usize,
    truth: GroundTruth,
}

impl RenderedFrames {
    pub fn ground_truth(&self) -> &GroundTruth {
        &self.truth
    }
}

/// Frames whose face box is filled with the [`synth_trace`] colors of the same
/// spec.
///
/// When the box spans whole 4x4 tiles the fill is Bayer-dithered, so the box
/// mean matches the trace value to within 1/32 of a level; otherwise every
/// pixel is rounded and the error is at most half a level.
pub fn render_frames(spec: &SimSpec) -> Result<RenderedFrames> {
    let (trace, truth) = synth_trace(spec)?;
    Ok(RenderedFrames {
        entries: trace.entries().to_vec(),
        width: spec.geometry.width,
        height: spec.geometry.height,
        next: 0,
        truth,
    })
}

fn render(entry: &TraceEntry, width: usize, height: usize) -> Frame {
    let mut frame = Frame::uniform(width, height, [BACKGROUND; 3]).expect("geometry validated");
    let Some((x0, x1, y0, y1)) = entry.bounding_box.pixel_span(width, height) else {
        return frame;
    };
    let tiled = (x1 - x0) % 4 == 0 && (y1 - y0) % 4 == 0;
    let values = [entry.mean_r, entry.mean_g, entry.mean_b];
    for y in y0..y1 {
        for x in x0..x1 {
            let offset = if tiled { (BAYER[(y - y0) % 4][(x - x0) % 4] as f64 + 0.5) / 16.0 } else { 0.5 };
            let px = values.map(|v| libm::floor(v + offset).clamp(0.0, 255.0) as u8);
            frame.set_pixel(x, y, px);
        }
    }
    frame
}

impl Iterator for RenderedFrames {
    type Item = AnnotatedFrame;

    fn next(&mut self) -> Option<AnnotatedFrame> {
        let entry = self.entries.get(self.next)?;
        let frame = render(entry, self.width, self.height);
        let annotation = FrameAnnotation::new(self.next as u64, entry.timestamp, entry.bounding_box);
        self.next += 1;
        Some(AnnotatedFrame { frame, annotation: Some(annotation) })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.entries.len() - self.next;
        (left, Some(left))
    }
}

impl ExactSizeIterator for RenderedFrames {}
