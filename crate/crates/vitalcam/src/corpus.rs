//! Synthetic corpora: a base simulation spec swept over a few parameters.
//!
//! ```toml
//! snr_db = 6.0          # optional, sets the white noise level
//!
//! [base]
//! duration_s = 30.0
//! seed = 7
//!
//! [sweep]
//! hr_bpm = [60.0, 90.0, 120.0]
//! ```
//!
//! Item `i` takes the `i mod len`-th value of every swept list and the seed
//! `base.seed + i`.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;
use vitalcam_core::sim::{synth_trace, SimSpec};

use crate::formats::{write_trace_file, TruthFile};
use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    pub hr_bpm: Vec<f64>,
    pub rr_brpm: Vec<f64>,
    pub snr_db: Vec<f64>,
    pub duration_s: Vec<f64>,
    pub fps: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSpec {
    pub base: SimSpec,
    pub snr_db: Option<f64>,
    pub sweep: Sweep,
}

fn pick(values: &[f64], i: usize) -> Option<f64> {
    (!values.is_empty()).then(|| values[i % values.len()])
}

impl CorpusSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(format!("corpus spec: {e}")))
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn item(&self, i: usize) -> SimSpec {
        let mut spec = self.base;
        spec.seed = spec.seed.wrapping_add(i as u64);
        let s = &self.sweep;
        if let Some(v) = pick(&s.hr_bpm, i) {
            spec.hr_bpm = v;
        }
        if let Some(v) = pick(&s.rr_brpm, i) {
            spec.rr_brpm = v;
        }
        if let Some(v) = pick(&s.duration_s, i) {
            spec.duration_s = v;
        }
        if let Some(v) = pick(&s.fps, i) {
            spec.fps = v;
        }
        match pick(&s.snr_db, i).or(self.snr_db) {
            Some(db) => spec.with_snr_db(db),
            None => spec,
        }
    }
}

pub fn trace_name(i: usize) -> String {
    format!("trace_{i:04}")
}

/// Writes `trace_NNNN.csv` and `trace_NNNN.truth.json` for every item. All
/// items are validated before anything is written.
pub fn write_corpus(spec: &CorpusSpec, count: usize, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let items: Vec<SimSpec> = (0..count).map(|i| spec.item(i)).collect();
    for (i, item) in items.iter().enumerate() {
        item.validate().map_err(|e| Error::Format(format!("item {i}: {e}")))?;
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    items
        .par_iter()
        .enumerate()
        .map(|(i, item)| {
            let (trace, truth) = synth_trace(item)?;
            let path = out_dir.join(format!("{}.csv", trace_name(i)));
            write_trace_file(&path, &trace)?;
            TruthFile::from(truth).write_file(&out_dir.join(format!("{}.truth.json", trace_name(i))))?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_cycles_and_seeds_advance() {
        let spec = CorpusSpec::from_toml("[base]\nseed = 10\n[sweep]\nhr_bpm = [60.0, 90.0]").unwrap();
        let hrs: Vec<f64> = (0..3).map(|i| spec.item(i).hr_bpm).collect();
        assert_eq!(hrs, [60.0, 90.0, 60.0]);
        assert_eq!(spec.item(2).seed, 12);
    }

    #[test]
    fn snr_sets_white_noise() {
        let spec = CorpusSpec::from_toml("snr_db = 0.0").unwrap();
        let sigma = spec.item(0).noise.white_sigma;
        let expected = SimSpec::default().pulse_amplitude.g / 2f64.sqrt();
        assert!((sigma - expected).abs() < 1e-12);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(CorpusSpec::from_toml("[sweep]\nheart = [1.0]").unwrap_err().is_bad_input());
    }

    #[test]
    fn invalid_item_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("c");
        let spec = CorpusSpec::from_toml("[base]\nfps = 6.0\n[sweep]\nhr_bpm = [60.0, 240.0]").unwrap();
        assert!(write_corpus(&spec, 2, &out).unwrap_err().is_bad_input());
        assert!(!out.exists());
    }
}
