use crate::error::{Error, Result};

/// Shortest segment accepted by the analytic-signal path.
pub const MIN_SIGNAL_LEN: usize = 16;

/// A finite, uniformly sampled real vibration segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    fs: f64,
}

impl Signal {
    /// Validates length, sampling rate and finiteness.
    pub fn new(samples: Vec<f64>, fs: f64) -> Result<Self> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::InvalidInput(format!(
                "sampling rate must be positive, got {fs}"
            )));
        }
        if samples.len() < MIN_SIGNAL_LEN {
            return Err(Error::TooShort {
                len: samples.len(),
                min: MIN_SIGNAL_LEN,
            });
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite sample {} at index {i}",
                samples[i]
            )));
        }
        Ok(Self { samples, fs })
    }

    /// Builds a recording of arbitrary length, checking only finiteness and `fs`.
    ///
    /// Recordings are later cut into segments; each segment goes through [`Signal::new`].
    pub(crate) fn recording(samples: Vec<f64>, fs: f64) -> Result<Self> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::InvalidInput(format!(
                "sampling rate must be positive, got {fs}"
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite sample {} at index {i}",
                samples[i]
            )));
        }
        Ok(Self { samples, fs })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.fs
    }

    /// Returns a copy with every sample multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Signal::new(self.samples.iter().map(|v| v * factor).collect(), self.fs)
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}
