//! Synthetic four-class benchmark: an 8 kHz carrier, amplitude-modulated at the
//! fault rates of each class, plus white Gaussian noise at a fixed SNR.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::signal::Signal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FaultClass {
    Healthy,
    Combined,
    InnerRace,
    OuterRace,
}

impl FaultClass {
    pub const ALL: [FaultClass; 4] = [
        FaultClass::Healthy,
        FaultClass::Combined,
        FaultClass::InnerRace,
        FaultClass::OuterRace,
    ];

    /// Class id 1–4.
    pub fn id(self) -> u32 {
        match self {
            FaultClass::Healthy => 1,
            FaultClass::Combined => 2,
            FaultClass::InnerRace => 3,
            FaultClass::OuterRace => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FaultClass::Healthy => "healthy",
            FaultClass::Combined => "ir_or",
            FaultClass::InnerRace => "ir",
            FaultClass::OuterRace => "or",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub fs: f64,
    pub len: usize,
    pub carrier_hz: f64,
    pub f_ir: f64,
    pub f_or: f64,
    pub depth: f64,
    pub snr_db: f64,
    /// Draw the modulation phase uniformly per signal instead of starting every
    /// segment at phase 0.
    pub random_modulation_phase: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            fs: 64_000.0,
            len: 6400,
            carrier_hz: 8_000.0,
            f_ir: 123.0,
            f_or: 76.0,
            depth: 0.5,
            snr_db: 10.0,
            random_modulation_phase: false,
        }
    }
}

impl SynthConfig {
    /// Noise-free envelope of one signal of the given class.
    pub fn envelope(&self, class: FaultClass, phases: (f64, f64)) -> Vec<f64> {
        let m = self.depth;
        (0..self.len)
            .map(|i| {
                let t = i as f64 / self.fs;
                let ir = 1.0 + m * (2.0 * PI * self.f_ir * t + phases.0).cos();
                let or = 1.0 + m * (2.0 * PI * self.f_or * t + phases.1).cos();
                match class {
                    FaultClass::Healthy => 1.0,
                    FaultClass::Combined => ir * or,
                    FaultClass::InnerRace => ir,
                    FaultClass::OuterRace => or,
                }
            })
            .collect()
    }

    /// Generates one signal; the RNG stream is a pure function of
    /// `(seed, class, index)`.
    pub fn generate_one(&self, class: FaultClass, index: usize, seed: u64) -> Result<Signal> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(((class.id() as u64) << 32) | index as u64);

        let carrier_phase = rng.random_range(0.0..2.0 * PI);
        let phases = if self.random_modulation_phase {
            (
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(0.0..2.0 * PI),
            )
        } else {
            (0.0, 0.0)
        };
        let env = self.envelope(class, phases);
        let clean: Vec<f64> = env
            .iter()
            .enumerate()
            .map(|(i, a)| {
                a * (2.0 * PI * self.carrier_hz * i as f64 / self.fs + carrier_phase).cos()
            })
            .collect();
        let power = clean.iter().map(|v| v * v).sum::<f64>() / clean.len() as f64;
        let sigma = (power / 10f64.powf(self.snr_db / 10.0)).sqrt();
        let noise = Normal::new(0.0, sigma).map_err(|e| Error::Config(e.to_string()))?;
        let samples = clean
            .into_iter()
            .map(|v| v + noise.sample(&mut rng))
            .collect();
        Signal::new(samples, self.fs)
    }
}

/// `count` signals per class, classes in id order, each with its class.
pub fn synth_generate(
    config: &SynthConfig,
    count: usize,
    seed: u64,
) -> Result<Vec<(Signal, FaultClass)>> {
    if count == 0 {
        return Err(Error::Config("synthetic count must be positive".into()));
    }
    let jobs: Vec<(FaultClass, usize)> = FaultClass::ALL
        .iter()
        .flat_map(|&c| (0..count).map(move |i| (c, i)))
        .collect();
    jobs.par_iter()
        .map(|&(class, i)| config.generate_one(class, i, seed).map(|s| (s, class)))
        .collect()
}
