//! On-disk interchange formats.
//!
//! * Trace CSV with the header [`TRACE_HEADER`], one row per frame.
//! * Annotation sidecar: JSON object with a `frames` array of per-frame
//!   annotations, paired with video frames by `frame_index`.
//! * Ground-truth sidecar (`*.truth.json`) next to a simulated trace.
//! * Blood pressure coefficients in the `key = value` format read by
//!   [`AffineBpModel::parse`].

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use vitalcam_core::roi::{BoundingBox, FrameAnnotation, FrameTrace, TraceEntry};
use vitalcam_core::sim::GroundTruth;
use vitalcam_core::vitals::AffineBpModel;

use crate::{Error, Result};

pub const TRACE_HEADER: [&str; 9] =
    ["timestamp_s", "mean_r", "mean_g", "mean_b", "brightness", "box_x", "box_y", "box_w", "box_h"];

/// Parses a trace CSV. The nominal frame rate is inferred from the median
/// timestamp step.
pub fn read_trace<R: Read>(reader: R) -> Result<FrameTrace> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::Format(format!("trace header: {e}")))?;
    if header.iter().ne(TRACE_HEADER.iter().copied()) {
        return Err(Error::Format(format!("trace header must be `{}`", TRACE_HEADER.join(","))));
    }
    let mut entries = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::Format(format!("trace line {line}: {e}")))?;
        let mut v = [0.0; 9];
        for (slot, field) in v.iter_mut().zip(row.iter()) {
            *slot =
                field.parse().map_err(|_| Error::Format(format!("trace line {line}: `{field}` is not a number")))?;
        }
        entries.push(TraceEntry {
            timestamp: v[0],
            mean_r: v[1],
            mean_g: v[2],
            mean_b: v[3],
            brightness: v[4],
            bounding_box: BoundingBox { x: v[5], y: v[6], width: v[7], height: v[8] },
        });
    }
    Ok(FrameTrace::from_entries(entries)?)
}

pub fn read_trace_file(path: &Path) -> Result<FrameTrace> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_trace(std::io::BufReader::new(file))
}

/// Writes a trace CSV. Floats use the shortest representation that parses
/// back to the same value.
pub fn write_trace<W: Write>(writer: W, trace: &FrameTrace) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let fmt = |e: csv::Error| Error::Format(format!("writing trace: {e}"));
    w.write_record(TRACE_HEADER).map_err(fmt)?;
    for e in trace.entries() {
        let b = &e.bounding_box;
        let row = [e.timestamp, e.mean_r, e.mean_g, e.mean_b, e.brightness, b.x, b.y, b.width, b.height];
        w.write_record(row.iter().map(|v| v.to_string())).map_err(fmt)?;
    }
    w.flush().map_err(|e| Error::Format(format!("writing trace: {e}")))?;
    Ok(())
}

pub fn write_trace_file(path: &Path, trace: &FrameTrace) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_trace(std::io::BufWriter::new(file), trace)
}

/// Per-frame annotations produced by the capture client.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnnotationSidecar {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_width: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_height: Option<usize>,
    pub frames: Vec<FrameAnnotation>,
}

impl AnnotationSidecar {
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::Format(format!("annotation sidecar: {e}")))
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read(path).map_err(|e| Error::io(path, e))?)
    }
}

/// Reference values for one recording. Every field is optional so that
/// partially labelled corpora can still be scored.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TruthFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hr_bpm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hrv_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spo2_percent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rr_brpm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sbp_mmhg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dbp_mmhg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_of_ratios: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame_width: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame_height: Option<usize>,
    /// Client-measured capture-to-display time, seconds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sr_time_s: Option<f64>,
}

impl From<GroundTruth> for TruthFile {
    fn from(gt: GroundTruth) -> Self {
        Self {
            hr_bpm: Some(gt.hr_bpm),
            hrv_ms: gt.hrv_ms,
            spo2_percent: Some(gt.spo2_percent),
            rr_brpm: gt.rr_brpm,
            ratio_of_ratios: Some(gt.ratio_of_ratios).filter(|r| r.is_finite()),
            frame_width: Some(gt.frame_width),
            frame_height: Some(gt.frame_height),
            ..Self::default()
        }
    }
}

impl TruthFile {
    pub fn read_file(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_slice(&bytes).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("truth file serializes");
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

pub fn read_bp_coefficients(path: &Path) -> Result<AffineBpModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    AffineBpModel::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use vitalcam_core::sim::{synth_trace, SimSpec};

    #[test]
    fn trace_csv_round_trips_exactly() {
        let spec = SimSpec { duration_s: 2.0, ..SimSpec::default() }.with_snr_db(3.0);
        let (trace, _) = synth_trace(&spec).unwrap();
        let mut buf = Vec::new();
        write_trace(&mut buf, &trace).unwrap();
        assert!(buf.starts_with(b"timestamp_s,mean_r,mean_g,mean_b,brightness,box_x,box_y,box_w,box_h\n"));
        let back = read_trace(buf.as_slice()).unwrap();
        assert_eq!(back.entries(), trace.entries());
    }

    #[test]
    fn wrong_header_or_cell_is_a_format_error() {
        let bad = "t,r,g,b,l,x,y,w,h\n0,1,1,1,1,0,0,1,1\n";
        assert!(matches!(read_trace(bad.as_bytes()), Err(Error::Format(_))));
        let bad = format!("{}\n0,1,1,1,1,0,0,1,1\n0.1,1,x,1,1,0,0,1,1\n", TRACE_HEADER.join(","));
        let err = read_trace(bad.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn out_of_range_channel_is_rejected() {
        let bad = format!("{}\n0,1,300,1,1,0,0,1,1\n0.1,1,1,1,1,0,0,1,1\n", TRACE_HEADER.join(","));
        assert!(read_trace(bad.as_bytes()).unwrap_err().is_bad_input());
    }

    #[test]
    fn sidecar_accepts_minimal_annotations() {
        let json =
            br#"{"frames":[{"frame_index":0,"timestamp":0.0,"bounding_box":{"x":1,"y":2,"width":3,"height":4}}]}"#;
        let s = AnnotationSidecar::from_json(json).unwrap();
        assert_eq!(s.frames.len(), 1);
        assert!(s.frames[0].landmarks.is_none());
        assert!(AnnotationSidecar::from_json(b"{}").is_err());
    }
}
