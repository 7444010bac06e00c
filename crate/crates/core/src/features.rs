//! The six shape features computed from IAFM, IAFC and IEFD.

use crate::analytic::InstantaneousSeries;
use crate::error::{Error, Result};
use crate::representations::{compute_iafc, compute_iafm, compute_iefd, Iafc, Iafm, Iefd};
use crate::signal::Signal;

/// Number of features per segment.
pub const FEATURE_COUNT: usize = 6;

/// Column names in serialization order.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = ["ss", "sc", "cov", "cp", "pl", "mer"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    /// Spectral centroid of the IAFM, Hz.
    pub sc: f64,
    /// Spectral spread around `sc`, Hz.
    pub ss: f64,
    /// `ss / sc × 100`, percent.
    pub cov: f64,
    /// Maximum of the IAFC.
    pub cp: f64,
    /// Lag of the IAFC maximum, samples.
    pub pl: i64,
    /// IEFD mean over IEFD entropy.
    pub mer: f64,
}

impl FeatureVector {
    /// Values in serialization order: SS, SC, CoV, CP, PL, MER.
    pub fn to_array(&self) -> [f64; FEATURE_COUNT] {
        [
            self.ss,
            self.sc,
            self.cov,
            self.cp,
            self.pl as f64,
            self.mer,
        ]
    }

    /// Inverse of [`FeatureVector::to_array`]; PL is rounded to the nearest integer.
    pub fn from_array(v: [f64; FEATURE_COUNT]) -> Self {
        Self {
            ss: v[0],
            sc: v[1],
            cov: v[2],
            cp: v[3],
            pl: v[4].round() as i64,
            mer: v[5],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// How the IEFD value distribution is formed for the entropy term of MER.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EntropyBinning {
    /// Every bit-distinct value is its own symbol.
    #[default]
    Exact,
    /// Equal-width histogram with this many bins between min and max.
    Bins(usize),
}

/// Denominator of MER.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EntropyForm {
    /// `−Σ P(x_i)·log2 P(x_i)`.
    #[default]
    Shannon,
    /// `−Σ x_i·log2 P(x_i)`, weighting each symbol by its value instead of its
    /// probability. Kept for compatibility with implementations that use it.
    ValueWeighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FeatureOptions {
    pub binning: EntropyBinning,
    pub entropy_form: EntropyForm,
}

fn weight_total(iafm: &Iafm) -> Result<f64> {
    let total: f64 = iafm.amp.iter().sum();
    if total == 0.0 || !total.is_finite() {
        return Err(Error::Degenerate("IAFM amplitudes sum to zero"));
    }
    Ok(total)
}

pub fn spectral_centroid(iafm: &Iafm) -> Result<f64> {
    let total = weight_total(iafm)?;
    let weighted: f64 = iafm.freq.iter().zip(&iafm.amp).map(|(f, a)| f * a).sum();
    Ok(weighted / total)
}

pub fn spectral_spread(iafm: &Iafm, sc: f64) -> Result<f64> {
    let total = weight_total(iafm)?;
    let moment: f64 = iafm
        .freq
        .iter()
        .zip(&iafm.amp)
        .map(|(f, a)| (f - sc) * (f - sc) * a)
        .sum();
    Ok((moment / total).sqrt())
}

pub fn coefficient_of_variation(sc: f64, ss: f64) -> Result<f64> {
    if sc == 0.0 {
        return Err(Error::Degenerate("spectral centroid is zero"));
    }
    Ok(ss / sc * 100.0)
}

/// Peak value and lag of the IAFC.
///
/// Ties go to the smallest absolute lag; an exact `±k` tie goes to `−k`.
pub fn correlation_peak(iafc: &Iafc) -> (f64, i64) {
    let mut best_value = f64::NEG_INFINITY;
    let mut best_lag = 0i64;
    for (&lag, &value) in iafc.lags.iter().zip(&iafc.values) {
        let better = value > best_value
            || (value == best_value
                && (lag.abs() < best_lag.abs() || (lag.abs() == best_lag.abs() && lag < best_lag)));
        if better {
            best_value = value;
            best_lag = lag;
        }
    }
    (best_value, best_lag)
}

/// Symbols (with their counts) of the IEFD value distribution.
fn value_histogram(values: &[f64], binning: EntropyBinning) -> Vec<(f64, usize)> {
    match binning {
        EntropyBinning::Exact => {
            let mut bits: Vec<u64> = values.iter().map(|v| v.to_bits()).collect();
            bits.sort_unstable();
            let mut out: Vec<(f64, usize)> = Vec::new();
            let mut i = 0;
            while i < bits.len() {
                let mut j = i + 1;
                while j < bits.len() && bits[j] == bits[i] {
                    j += 1;
                }
                out.push((f64::from_bits(bits[i]), j - i));
                i = j;
            }
            out
        }
        EntropyBinning::Bins(bins) => {
            let bins = bins.max(1);
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let width = (hi - lo) / bins as f64;
            let mut counts = vec![0usize; bins];
            for &v in values {
                let idx = if width > 0.0 {
                    (((v - lo) / width) as usize).min(bins - 1)
                } else {
                    0
                };
                counts[idx] += 1;
            }
            counts
                .into_iter()
                .enumerate()
                .filter(|(_, c)| *c > 0)
                .map(|(i, c)| (lo + (i as f64 + 0.5) * width, c))
                .collect()
        }
    }
}

/// Entropy (bits) of the IEFD value distribution under the given options.
pub fn iefd_entropy(iefd: &Iefd, options: FeatureOptions) -> f64 {
    let n = iefd.values.len() as f64;
    let hist = value_histogram(&iefd.values, options.binning);
    let mut h = 0.0;
    for (value, count) in hist {
        let p = count as f64 / n;
        let weight = match options.entropy_form {
            EntropyForm::Shannon => p,
            EntropyForm::ValueWeighted => value,
        };
        h -= weight * p.log2();
    }
    h
}

pub fn mean_to_entropy_ratio(iefd: &Iefd) -> Result<f64> {
    mean_to_entropy_ratio_with(iefd, FeatureOptions::default())
}

pub fn mean_to_entropy_ratio_with(iefd: &Iefd, options: FeatureOptions) -> Result<f64> {
    if iefd.values.is_empty() {
        return Err(Error::Degenerate("empty IEFD"));
    }
    let mean = iefd.values.iter().sum::<f64>() / iefd.values.len() as f64;
    let h = iefd_entropy(iefd, options);
    if h == 0.0 {
        return Err(Error::DegenerateDistribution);
    }
    Ok(mean / h)
}

/// Runs all feature operations on an already-computed series.
pub fn features_from_series(
    series: &InstantaneousSeries,
    options: FeatureOptions,
) -> Result<FeatureVector> {
    let iafm = compute_iafm(series);
    let sc = spectral_centroid(&iafm)?;
    let ss = spectral_spread(&iafm, sc)?;
    let cov = coefficient_of_variation(sc, ss)?;
    let (cp, pl) = correlation_peak(&compute_iafc(series));
    let mer = mean_to_entropy_ratio_with(&compute_iefd(series)?, options)?;
    Ok(FeatureVector {
        sc,
        ss,
        cov,
        cp,
        pl,
        mer,
    })
}

/// Full per-segment path: analytic signal, representations, features.
pub fn extract_features(signal: &Signal) -> Result<FeatureVector> {
    extract_features_with(signal, FeatureOptions::default())
}

pub fn extract_features_with(signal: &Signal, options: FeatureOptions) -> Result<FeatureVector> {
    features_from_series(&InstantaneousSeries::from_signal(signal), options)
}
