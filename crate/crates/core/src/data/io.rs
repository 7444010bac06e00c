//! Recording ingestion from plain formats.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Signal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Format {
    /// One numeric value per line (first field), optional header line.
    #[serde(rename = "csv-column")]
    CsvColumn,
    /// Little-endian IEEE-754 doubles, no header.
    #[serde(rename = "raw-f64le")]
    RawF64Le,
    /// Mono RIFF/WAVE, integer PCM normalized to [-1, 1] or 32-bit float.
    #[serde(rename = "wav-pcm")]
    WavPcm,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::CsvColumn => "csv-column",
            Format::RawF64Le => "raw-f64le",
            Format::WavPcm => "wav-pcm",
        })
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv-column" => Ok(Format::CsvColumn),
            "raw-f64le" => Ok(Format::RawF64Le),
            "wav-pcm" => Ok(Format::WavPcm),
            other => Err(Error::Config(format!("unknown format tag '{other}'"))),
        }
    }
}

fn ingestion(path: &Path, message: impl Into<String>) -> Error {
    Error::Ingestion {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Loads a whole recording. The result may be shorter than one segment.
pub fn load_recording(path: &Path, format: Format, fs: f64) -> Result<Signal> {
    let samples = match format {
        Format::CsvColumn => read_csv_column(path)?,
        Format::RawF64Le => read_raw_f64le(path)?,
        Format::WavPcm => read_wav(path, fs)?,
    };
    if samples.is_empty() {
        return Err(ingestion(path, "no samples"));
    }
    Signal::recording(samples, fs).map_err(|e| ingestion(path, e.to_string()))
}

fn read_raw_f64le(path: &Path) -> Result<Vec<f64>> {
    let bytes = fs::read(path).map_err(|e| ingestion(path, e.to_string()))?;
    if bytes.is_empty() {
        return Err(ingestion(path, "empty file"));
    }
    if bytes.len() % 8 != 0 {
        let offset = bytes.len() - bytes.len() % 8;
        return Err(ingestion(
            path,
            format!(
                "truncated sample at byte offset {offset} (file is {} bytes)",
                bytes.len()
            ),
        ));
    }
    let samples: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
        return Err(ingestion(
            path,
            format!("non-finite sample at byte offset {}", i * 8),
        ));
    }
    Ok(samples)
}

fn read_csv_column(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| ingestion(path, e.to_string()))?;
    let mut samples = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let cell = line.split(',').next().unwrap_or("").trim();
        if cell.is_empty() {
            continue;
        }
        match cell.parse::<f64>() {
            Ok(v) if v.is_finite() => samples.push(v),
            Ok(_) => {
                return Err(ingestion(
                    path,
                    format!("non-finite value at line {}", idx + 1),
                ));
            }
            // first non-empty line may be a header
            Err(_) if samples.is_empty() && idx == first_content_line(&text) => {}
            Err(_) => {
                return Err(ingestion(
                    path,
                    format!("non-numeric cell '{cell}' at line {}", idx + 1),
                ));
            }
        }
    }
    if samples.is_empty() {
        return Err(ingestion(path, "no numeric rows"));
    }
    Ok(samples)
}

fn first_content_line(text: &str) -> usize {
    text.lines()
        .position(|l| !l.split(',').next().unwrap_or("").trim().is_empty())
        .unwrap_or(0)
}

fn read_wav(path: &Path, fs: f64) -> Result<Vec<f64>> {
    let mut reader = hound::WavReader::open(path).map_err(|e| ingestion(path, e.to_string()))?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(ingestion(
            path,
            format!("expected 1 channel, found {}", spec.channels),
        ));
    }
    if (spec.sample_rate as f64 - fs).abs() > 1e-9 {
        return Err(ingestion(
            path,
            format!(
                "file sample rate {} Hz differs from declared {fs} Hz",
                spec.sample_rate
            ),
        ));
    }
    let samples: std::result::Result<Vec<f64>, hound::Error> = match spec.sample_format {
        hound::SampleFormat::Int => {
            let full_scale = (1i64 << (spec.bits_per_sample - 1)) as f64;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f64 / full_scale))
                .collect()
        }
        hound::SampleFormat::Float => reader.samples::<f32>().map(|s| s.map(f64::from)).collect(),
    };
    samples.map_err(|e| ingestion(path, e.to_string()))
}

/// Writes samples as little-endian doubles.
pub fn write_raw_f64le(path: &Path, samples: &[f64]) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for v in samples {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}
