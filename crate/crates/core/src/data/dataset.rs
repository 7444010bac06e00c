//! Batch feature extraction into a labeled feature matrix.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::io::load_recording;
use super::manifest::RecordingManifest;
use super::segment::segment;
use super::synth::FaultClass;
use crate::error::{Error, Provenance, Result};
use crate::features::{extract_features_with, FeatureOptions, FeatureVector, FEATURE_NAMES};
use crate::signal::Signal;
use crate::stft::extract_stft_features_with;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Features from the instantaneous amplitude/frequency series.
    #[default]
    Proposed,
    /// Features from the aggregated STFT power of the envelope.
    Stft,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::Stft => "stft",
        }
    }

    pub fn extract(self, signal: &Signal, options: FeatureOptions) -> Result<FeatureVector> {
        match self {
            Method::Proposed => extract_features_with(signal, options),
            Method::Stft => extract_stft_features_with(signal, options),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposed" => Ok(Method::Proposed),
            "stft" => Ok(Method::Stft),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        }
    }
}

/// A whole recording with its class name and source identifier.
#[derive(Debug, Clone)]
pub struct LabeledRecording {
    pub source: String,
    pub label: String,
    pub signal: Signal,
}

impl LabeledRecording {
    pub fn from_synth(items: Vec<(Signal, FaultClass)>) -> Vec<LabeledRecording> {
        let mut per_class = [0usize; 4];
        items
            .into_iter()
            .map(|(signal, class)| {
                let idx = class.id() as usize - 1;
                let source = format!("synth/{}/{:04}", class.name(), per_class[idx]);
                per_class[idx] += 1;
                LabeledRecording {
                    source,
                    label: class.name().to_string(),
                    signal,
                }
            })
            .collect()
    }

    /// Loads every manifest entry; the source id is the entry's path as written.
    pub fn from_manifest(manifest: &RecordingManifest) -> Result<Vec<LabeledRecording>> {
        manifest
            .entries
            .iter()
            .map(|e| {
                Ok(LabeledRecording {
                    source: e.path.display().to_string(),
                    label: e.label.to_string(),
                    signal: load_recording(&manifest.resolve(e), e.format, e.fs)?,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub features: FeatureVector,
    /// Index into [`LabeledDataset::class_names`].
    pub label: usize,
    pub source: String,
    pub segment: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub rows: Vec<Row>,
    pub class_names: Vec<String>,
    pub method: Method,
}

/// A segment dropped during extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct DroppedSegment {
    pub provenance: Provenance,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    pub total_segments: usize,
    pub dropped: Vec<DroppedSegment>,
    /// Recordings too short to yield a single segment.
    pub short_recordings: Vec<String>,
}

impl Diagnostics {
    pub fn write_report<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "segments: {}", self.total_segments)?;
        writeln!(out, "kept: {}", self.total_segments - self.dropped.len())?;
        writeln!(out, "dropped: {}", self.dropped.len())?;
        for d in &self.dropped {
            writeln!(out, "  {}: {}", d.provenance, d.reason)?;
        }
        writeln!(out, "short recordings: {}", self.short_recordings.len())?;
        for s in &self.short_recordings {
            writeln!(out, "  {s}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    pub segment_len: usize,
    pub method: Method,
    pub features: FeatureOptions,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            segment_len: super::segment::DEFAULT_SEGMENT_LEN,
            method: Method::Proposed,
            features: FeatureOptions::default(),
        }
    }
}

/// Segments every recording and extracts features in parallel.
///
/// Row order is recording order, then segment index, independent of thread count.
/// Degenerate segments are dropped and listed in the diagnostics; any other
/// extraction failure aborts the build.
pub fn build_dataset(
    recordings: &[LabeledRecording],
    options: BuildOptions,
) -> Result<(LabeledDataset, Diagnostics)> {
    let mut class_names: Vec<String> = Vec::new();
    for r in recordings {
        if !class_names.contains(&r.label) {
            class_names.push(r.label.clone());
        }
    }

    let mut diagnostics = Diagnostics::default();
    let mut jobs: Vec<(usize, usize, Signal)> = Vec::new();
    for (ri, r) in recordings.iter().enumerate() {
        let segs = segment(&r.signal, options.segment_len)?;
        if segs.is_empty() {
            diagnostics.short_recordings.push(r.source.clone());
        }
        jobs.extend(segs.into_iter().enumerate().map(|(si, s)| (ri, si, s)));
    }
    diagnostics.total_segments = jobs.len();

    let results: Vec<(usize, usize, Result<FeatureVector>)> = jobs
        .par_iter()
        .map(|(ri, si, s)| (*ri, *si, options.method.extract(s, options.features)))
        .collect();

    let mut rows = Vec::with_capacity(results.len());
    for (ri, si, res) in results {
        let rec = &recordings[ri];
        let provenance = Provenance {
            source: rec.source.clone(),
            segment: si,
        };
        match res {
            Ok(fv) if fv.is_finite() => rows.push(Row {
                features: fv,
                label: class_names
                    .iter()
                    .position(|c| *c == rec.label)
                    .expect("known class"),
                source: rec.source.clone(),
                segment: si,
            }),
            Ok(_) => diagnostics.dropped.push(DroppedSegment {
                provenance,
                reason: "non-finite feature".into(),
            }),
            Err(e) if e.is_degenerate() => diagnostics.dropped.push(DroppedSegment {
                provenance,
                reason: e.to_string(),
            }),
            Err(e) => return Err(e.with_provenance(provenance)),
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "no usable segments out of {}",
            diagnostics.total_segments
        )));
    }
    Ok((
        LabeledDataset {
            rows,
            class_names,
            method: options.method,
        },
        diagnostics,
    ))
}

pub const CSV_HEADER: [&str; 10] = [
    "source", "segment", "label", "ss", "sc", "cov", "cp", "pl", "mer", "method",
];

/// Formats a float with 17 significant digits.
pub fn format_full(v: f64) -> String {
    format!("{v:.16e}")
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_names.len()];
        for r in &self.rows {
            counts[r.label] += 1;
        }
        counts
    }

    pub fn features(&self) -> Vec<[f64; 6]> {
        self.rows.iter().map(|r| r.features.to_array()).collect()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.label).collect()
    }

    /// New dataset sharing class names and method, holding the given rows.
    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            class_names: self.class_names.clone(),
            method: self.method,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            let f = &r.features;
            w.write_record([
                r.source.clone(),
                r.segment.to_string(),
                self.class_names[r.label].clone(),
                format_full(f.ss),
                format_full(f.sc),
                format_full(f.cov),
                format_full(f.cp),
                f.pl.to_string(),
                format_full(f.mer),
                self.method.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a feature matrix. Class order is order of first appearance; the
    /// `method` column is optional (defaults to `proposed`).
    pub fn read_csv<R: Read>(input: R) -> Result<LabeledDataset> {
        let mut rdr = csv::ReaderBuilder::new().from_reader(input);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| -> Result<usize> {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Config(format!("feature CSV lacks column '{name}'")))
        };
        let source_col = col("source")?;
        let segment_col = col("segment")?;
        let label_col = col("label")?;
        let feature_cols: Vec<usize> = FEATURE_NAMES
            .iter()
            .map(|n| col(n))
            .collect::<Result<_>>()?;
        let method_col = headers.iter().position(|h| h == "method");

        let mut class_names: Vec<String> = Vec::new();
        let mut rows = Vec::new();
        let mut method = None;
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let bad =
                |what: &str| Error::Config(format!("feature CSV row {}: bad {what}", line + 2));
            let label = rec.get(label_col).ok_or_else(|| bad("label"))?.to_string();
            let label_idx = match class_names.iter().position(|c| *c == label) {
                Some(i) => i,
                None => {
                    class_names.push(label);
                    class_names.len() - 1
                }
            };
            let mut values = [0.0; 6];
            for (v, &c) in values.iter_mut().zip(&feature_cols) {
                *v = rec
                    .get(c)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(&headers[c]))?;
            }
            if let Some(mc) = method_col {
                let m: Method = rec.get(mc).ok_or_else(|| bad("method"))?.parse()?;
                if method.is_some_and(|prev| prev != m) {
                    return Err(Error::Config("feature CSV mixes methods".into()));
                }
                method = Some(m);
            }
            rows.push(Row {
                features: FeatureVector::from_array(values),
                label: label_idx,
                source: rec
                    .get(source_col)
                    .ok_or_else(|| bad("source"))?
                    .to_string(),
                segment: rec
                    .get(segment_col)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| bad("segment"))?,
            });
        }
        if rows.is_empty() {
            return Err(Error::EmptyDataset("feature CSV has no rows".into()));
        }
        Ok(LabeledDataset {
            rows,
            class_names,
            method: method.unwrap_or_default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth::{synth_generate, SynthConfig};

    fn small_synth(count: usize) -> Vec<LabeledRecording> {
        LabeledRecording::from_synth(synth_generate(&SynthConfig::default(), count, 3).unwrap())
    }

    #[test]
    fn one_row_per_synthetic_signal() {
        let recs = small_synth(5);
        let (ds, diag) = build_dataset(&recs, BuildOptions::default()).unwrap();
        assert_eq!(ds.len(), 20);
        assert_eq!(diag.total_segments, 20);
        assert!(diag.dropped.is_empty());
        assert_eq!(ds.class_names, vec!["healthy", "ir_or", "ir", "or"]);
        assert_eq!(ds.class_counts(), vec![5; 4]);
        assert_eq!(ds.rows[0].source, "synth/healthy/0000");
    }

    #[test]
    fn methods_share_row_count() {
        let recs = small_synth(2);
        let (a, _) = build_dataset(&recs, BuildOptions::default()).unwrap();
        let (b, _) = build_dataset(
            &recs,
            BuildOptions {
                method: Method::Stft,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(a.len(), b.len());
        assert_ne!(a.rows[0].features, b.rows[0].features);
        assert_eq!(b.method, Method::Stft);
    }

    #[test]
    fn degenerate_segments_dropped() {
        let zero = Signal::recording(vec![0.0; 6400 * 2], 64_000.0).unwrap();
        let mut recs = small_synth(1);
        recs.push(LabeledRecording {
            source: "dead".into(),
            label: "healthy".into(),
            signal: zero,
        });
        let (ds, diag) = build_dataset(&recs, BuildOptions::default()).unwrap();
        assert_eq!(ds.len(), 4);
        assert_eq!(diag.dropped.len(), 2);
        assert_eq!(diag.dropped[1].provenance.segment, 1);

        let only_dead = vec![recs.pop().unwrap()];
        assert!(matches!(
            build_dataset(&only_dead, BuildOptions::default()),
            Err(Error::EmptyDataset(_))
        ));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let (ds, _) = build_dataset(&small_synth(2), BuildOptions::default()).unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("source,segment,label,ss,sc,cov,cp,pl,mer,method\n"));
        assert!(!text.contains('\r'));
        let back = LabeledDataset::read_csv(&buf[..]).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn diagnostics_report_lists_drops() {
        let diag = Diagnostics {
            total_segments: 3,
            dropped: vec![DroppedSegment {
                provenance: Provenance {
                    source: "a".into(),
                    segment: 2,
                },
                reason: "degenerate".into(),
            }],
            short_recordings: vec!["b".into()],
        };
        let mut buf = Vec::new();
        diag.write_report(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("kept: 2"));
        assert!(text.contains("a#2: degenerate"));
    }
}
