//! Joint instantaneous amplitude-frequency analysis of rolling-bearing vibration.
//!
//! A segment goes through the analytic signal ([`analytic`]), is turned into three
//! envelope representations ([`representations`]) and summarized by six features
//! ([`features`]). [`stft`] computes the same features from a short-time spectrum
//! of the envelope for comparison. [`data`] handles recordings, segmentation,
//! synthetic benchmarks and feature matrices; [`forest`] and [`metrics`] train and
//! score a random-forest classifier on them.

pub mod analytic;
pub mod data;
pub mod error;
pub mod features;
pub mod forest;
pub mod metrics;
pub mod representations;
pub mod signal;
pub mod stft;

pub use analytic::{
    analytic_transform, frequency_from_increments, instantaneous_amplitude,
    instantaneous_frequency, instantaneous_phase, InstantaneousSeries,
};
pub use error::{Error, ErrorKind, Provenance, Result};
pub use features::{extract_features, FeatureOptions, FeatureVector, FEATURE_COUNT, FEATURE_NAMES};
pub use forest::{ForestConfig, TrainedForest};
pub use metrics::{evaluate, EvalReport};
pub use representations::{compute_iafc, compute_iafm, compute_iefd, Iafc, Iafm, Iefd};
pub use signal::Signal;
pub use stft::{extract_stft_features, stft_envelope_spectrum, StftEnvelopeSpectrum};
