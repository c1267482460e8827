//! Accuracy and timing over a corpus of traces with reference values.
//!
//! A corpus is a directory of `<name>.csv` traces, each next to a
//! `<name>.truth.json`. Traces without a truth file are skipped.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use vitalcam_core::roi::Verdict;
use vitalcam_core::vitals::{Reading, VitalsReport};

use crate::formats::{read_trace_file, TruthFile};
use crate::pipeline::{analyze_trace, PipelineConfig, DEFAULT_FRAME_SIZE};
use crate::{Error, Result};

type Estimate = fn(&VitalsReport) -> Reading;
type Reference = fn(&TruthFile) -> Option<f64>;

/// Vitals scored by the harness, with their estimate and reference accessors.
pub const METRICS: [(&str, Estimate, Reference); 6] = [
    ("hr_bpm", |r| r.hr_bpm, |t| t.hr_bpm),
    ("hrv_ms", |r| r.hrv_ms, |t| t.hrv_ms),
    ("spo2_percent", |r| r.spo2_percent, |t| t.spo2_percent),
    ("rr_brpm", |r| r.rr_brpm, |t| t.rr_brpm),
    ("sbp_mmhg", |r| r.sbp_mmhg, |t| t.sbp_mmhg),
    ("dbp_mmhg", |r| r.dbp_mmhg, |t| t.dbp_mmhg),
];

#[derive(Debug, Clone, PartialEq)]
pub struct FileResult {
    pub name: String,
    pub truth: TruthFile,
    /// `None` when the file could not be processed at all.
    pub verdict: Option<Verdict>,
    pub report: Option<VitalsReport>,
    pub error: Option<String>,
    pub bp_time_s: f64,
}

impl FileResult {
    /// Estimate and reference for metric `i` of [`METRICS`], when both exist.
    /// Flagged estimates count; only missing ones are left out.
    pub fn pair(&self, i: usize) -> Option<(f64, f64)> {
        let (_, estimate, reference) = METRICS[i];
        Some((estimate(self.report.as_ref()?).value?, reference(&self.truth)?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub metric: String,
    pub value: Option<f64>,
    pub n: usize,
}

pub fn mean_absolute_error(pairs: impl IntoIterator<Item = (f64, f64)>) -> Option<f64> {
    let (sum, n) = pairs.into_iter().fold((0.0, 0usize), |(s, n), (e, t)| (s + (e - t).abs(), n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn mean(values: impl IntoIterator<Item = f64>) -> (Option<f64>, usize) {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    ((n > 0).then(|| sum / n as f64), n)
}

/// Trace/truth pairs in `dir`, ordered by file name.
pub fn corpus_pairs(dir: &Path) -> Result<Vec<(PathBuf, PathBuf)>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut pairs = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "csv") {
            let truth = path.with_extension("truth.json");
            if truth.is_file() {
                pairs.push((path, truth));
            } else {
                tracing::warn!(path = %path.display(), "no truth file, skipped");
            }
        }
    }
    if pairs.is_empty() {
        return Err(Error::Format(format!("no trace/truth pairs in {}", dir.display())));
    }
    pairs.sort();
    Ok(pairs)
}

pub fn evaluate_file(trace: &Path, truth: &Path, config: &PipelineConfig) -> Result<FileResult> {
    let truth = TruthFile::read_file(truth)?;
    let name = trace.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let size = match (truth.frame_width, truth.frame_height) {
        (Some(w), Some(h)) => (w, h),
        _ => DEFAULT_FRAME_SIZE,
    };
    let started = Instant::now();
    let outcome = read_trace_file(trace).and_then(|t| analyze_trace(&t, size, config));
    let bp_time_s = started.elapsed().as_secs_f64();
    Ok(match outcome {
        Ok(a) => FileResult { name, truth, verdict: Some(a.quality.verdict), report: a.report, error: None, bp_time_s },
        Err(e) => FileResult { name, truth, verdict: None, report: None, error: Some(e.to_string()), bp_time_s },
    })
}

/// Evaluates every pair in parallel; results keep the file-name order.
pub fn evaluate_corpus(dir: &Path, config: &PipelineConfig) -> Result<Vec<FileResult>> {
    corpus_pairs(dir)?.par_iter().map(|(trace, truth)| evaluate_file(trace, truth, config)).collect()
}

/// One row per vital (`<vital>_mae`), then `bp_time_s_mean` and, when any
/// truth file carries client timings, `sr_time_s_mean`.
pub fn summarize(results: &[FileResult]) -> Vec<Summary> {
    let mut rows: Vec<Summary> = METRICS
        .iter()
        .enumerate()
        .map(|(i, (name, _, _))| {
            let pairs: Vec<(f64, f64)> = results.iter().filter_map(|r| r.pair(i)).collect();
            Summary { metric: format!("{name}_mae"), value: mean_absolute_error(pairs.iter().copied()), n: pairs.len() }
        })
        .collect();
    let (bp, n) = mean(results.iter().map(|r| r.bp_time_s));
    rows.push(Summary { metric: "bp_time_s_mean".into(), value: bp, n });
    let (sr, n) = mean(results.iter().filter_map(|r| r.truth.sr_time_s));
    if n > 0 {
        rows.push(Summary { metric: "sr_time_s_mean".into(), value: sr, n });
    }
    rows
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// CSV with columns `metric,value,n`.
pub fn write_summary<W: Write>(out: W, rows: &[Summary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let fail = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(["metric", "value", "n"]).map_err(fail)?;
    for row in rows {
        w.write_record([row.metric.clone(), cell(row.value), row.n.to_string()]).map_err(fail)?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

/// Wide CSV, one row per file: verdict, timing, then estimate and truth for
/// every vital.
pub fn write_per_file<W: Write>(out: W, results: &[FileResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let fail = |e: csv::Error| Error::Format(e.to_string());
    let mut header = vec!["file".to_owned(), "verdict".into(), "bp_time_s".into(), "sr_time_s".into()];
    for (name, _, _) in METRICS {
        header.push(name.to_owned());
        header.push(format!("{name}_validity"));
        header.push(format!("{name}_truth"));
    }
    header.push("error".into());
    w.write_record(&header).map_err(fail)?;
    for r in results {
        let mut row = vec![
            r.name.clone(),
            r.verdict.map_or("error", |v| v.as_str()).to_owned(),
            r.bp_time_s.to_string(),
            cell(r.truth.sr_time_s),
        ];
        for (_, estimate, reference) in METRICS {
            let reading = r.report.as_ref().map(estimate);
            row.push(cell(reading.and_then(|x| x.value)));
            row.push(reading.map(|x| x.validity.as_str().to_owned()).unwrap_or_default());
            row.push(cell(reference(&r.truth)));
        }
        row.push(r.error.clone().unwrap_or_default());
        w.write_record(&row).map_err(fail)?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pair_mae() {
        assert_eq!(mean_absolute_error([(74.0, 72.0)]), Some(2.0));
        assert_eq!(mean_absolute_error([(70.0, 72.0), (75.0, 72.0)]), Some(2.5));
        assert_eq!(mean_absolute_error([]), None);
    }

    #[test]
    fn empty_directory_is_bad_input() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("orphan.csv"), "x").unwrap();
        assert!(corpus_pairs(dir.path()).unwrap_err().is_bad_input());
    }
}
