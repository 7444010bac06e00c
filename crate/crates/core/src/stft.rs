//! Baseline features from a short-time spectrum of the envelope.
//!
//! The envelope is cut into three Hamming-weighted windows of length N/2 at 50 %
//! overlap; each window's power spectrum (NFFT points, one-sided) is averaged across
//! windows and the six features are computed with aggregated power in place of IA
//! and the bin frequencies in place of IF.

use num_complex::Complex64;

use crate::analytic::{
    analytic_transform, fft_in_place, instantaneous_amplitude, InstantaneousSeries,
};
use crate::error::{Error, Result};
use crate::features::{features_from_series, FeatureOptions, FeatureVector};
use crate::signal::Signal;

pub const DEFAULT_NFFT: usize = 4096;
pub const WINDOW_COUNT: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct StftEnvelopeSpectrum {
    pub bin_freqs: Vec<f64>,
    pub agg_power: Vec<f64>,
}

/// Symmetric Hamming window, `0.54 − 0.46·cos(2πn/(L−1))`.
pub fn hamming(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let denom = (len - 1) as f64;
    (0..len)
        .map(|n| 0.54 - 0.46 * (2.0 * std::f64::consts::PI * n as f64 / denom).cos())
        .collect()
}

/// Start offsets and length of the three half-overlapping windows over `n` samples.
pub fn window_layout(n: usize) -> Result<(Vec<usize>, usize)> {
    if n < 16 || n % 4 != 0 {
        return Err(Error::InvalidLength(format!(
            "{n} samples cannot be split into {WINDOW_COUNT} windows at 50% overlap \
             (need a multiple of 4, at least 16)"
        )));
    }
    let len = n / 2;
    let hop = n / 4;
    Ok(((0..WINDOW_COUNT).map(|w| w * hop).collect(), len))
}

pub fn stft_envelope_spectrum(signal: &Signal) -> Result<StftEnvelopeSpectrum> {
    stft_envelope_spectrum_with(signal, DEFAULT_NFFT)
}

pub fn stft_envelope_spectrum_with(signal: &Signal, nfft: usize) -> Result<StftEnvelopeSpectrum> {
    if nfft < 2 {
        return Err(Error::InvalidLength(format!(
            "NFFT must be at least 2, got {nfft}"
        )));
    }
    let (offsets, win_len) = window_layout(signal.len())?;
    let envelope = instantaneous_amplitude(&analytic_transform(signal));
    let window = hamming(win_len);
    let bins = nfft / 2 + 1;
    let used = win_len.min(nfft);

    let mut agg_power = vec![0.0; bins];
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    for &start in &offsets {
        buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for i in 0..used {
            buf[i].re = envelope[start + i] * window[i];
        }
        fft_in_place(&mut buf, false);
        for (acc, z) in agg_power.iter_mut().zip(&buf[..bins]) {
            *acc += z.norm_sqr();
        }
    }
    let count = offsets.len() as f64;
    agg_power.iter_mut().for_each(|p| *p /= count);

    let bin_freqs = (0..bins)
        .map(|k| k as f64 * signal.fs() / nfft as f64)
        .collect();
    Ok(StftEnvelopeSpectrum {
        bin_freqs,
        agg_power,
    })
}

pub fn extract_stft_features(signal: &Signal) -> Result<FeatureVector> {
    extract_stft_features_with(signal, FeatureOptions::default())
}

pub fn extract_stft_features_with(
    signal: &Signal,
    options: FeatureOptions,
) -> Result<FeatureVector> {
    let spectrum = stft_envelope_spectrum(signal)?;
    let series =
        InstantaneousSeries::from_parts(spectrum.agg_power, spectrum.bin_freqs, signal.fs())?;
    features_from_series(&series, options)
}
