//! Discrete analytic signal and the instantaneous amplitude, phase and frequency
//! derived from it.
//!
//! The analytic signal is computed in the frequency domain: forward FFT, zero the
//! negative-frequency half, double the strictly positive bins, keep DC (and the
//! Nyquist bin for even lengths) at unit gain, inverse FFT.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signal::{Signal, MIN_SIGNAL_LEN};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Runs an in-place forward or inverse FFT using a per-thread planner cache.
/// The inverse is unnormalized, as in rustfft.
pub(crate) fn fft_in_place(buffer: &mut [Complex64], inverse: bool) {
    let fft = PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        if inverse {
            planner.plan_fft_inverse(buffer.len())
        } else {
            planner.plan_fft_forward(buffer.len())
        }
    });
    fft.process(buffer);
}

/// Computes `x[n] + j·H{x}[n]` for a validated signal.
pub fn analytic_transform(signal: &Signal) -> Vec<Complex64> {
    analytic_from_samples(signal.samples())
}

/// Same as [`analytic_transform`] for a raw slice, validating it first.
pub fn analytic_transform_checked(samples: &[f64]) -> Result<Vec<Complex64>> {
    if samples.len() < MIN_SIGNAL_LEN {
        return Err(Error::TooShort {
            len: samples.len(),
            min: MIN_SIGNAL_LEN,
        });
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite sample".into()));
    }
    Ok(analytic_from_samples(samples))
}

pub(crate) fn analytic_from_samples(samples: &[f64]) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_in_place(&mut buf, false);

    // Positive bins 1..ceil(n/2) doubled; Nyquist (even n) and DC untouched.
    let half = n / 2;
    let positive_end = if n % 2 == 0 { half } else { half + 1 };
    for v in &mut buf[1..positive_end] {
        *v *= 2.0;
    }
    for v in &mut buf[half + 1..] {
        *v = Complex64::new(0.0, 0.0);
    }

    fft_in_place(&mut buf, true);
    let scale = 1.0 / n as f64;
    for v in &mut buf {
        *v *= scale;
    }
    buf
}

/// Element-wise magnitude of the analytic signal (the envelope).
pub fn instantaneous_amplitude(analytic: &[Complex64]) -> Vec<f64> {
    analytic.iter().map(|z| z.norm()).collect()
}

/// Unwrapped instantaneous phase plus the number of zero-magnitude samples
/// whose phase was defined as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase {
    /// Unwrapped phase, radians.
    pub values: Vec<f64>,
    /// `values[n+1] − values[n]`, taken from the wrapped angles so the error
    /// does not grow with the accumulated phase.
    pub increments: Vec<f64>,
    pub zero_magnitude: usize,
}

/// Four-quadrant angle followed by unwrapping.
pub fn instantaneous_phase(analytic: &[Complex64]) -> Phase {
    let mut zero_magnitude = 0;
    let wrapped: Vec<f64> = analytic
        .iter()
        .map(|z| {
            if z.re == 0.0 && z.im == 0.0 {
                zero_magnitude += 1;
                0.0
            } else {
                z.im.atan2(z.re)
            }
        })
        .collect();
    Phase {
        values: unwrap_phase(&wrapped),
        increments: phase_increments(&wrapped),
        zero_magnitude,
    }
}

/// Folds a phase step into [-π, π]; a step of exactly ±π keeps its sign.
fn fold_step(step: f64) -> f64 {
    if step.abs() <= PI {
        return step;
    }
    let folded = (step + PI).rem_euclid(2.0 * PI) - PI;
    if folded == -PI && step > 0.0 {
        PI
    } else {
        folded
    }
}

/// Steps between consecutive wrapped angles, folded into [-π, π].
pub fn phase_increments(wrapped: &[f64]) -> Vec<f64> {
    wrapped.windows(2).map(|w| fold_step(w[1] - w[0])).collect()
}

/// Removes 2π jumps: whenever consecutive samples differ by more than π, the
/// remainder of the sequence is shifted by the multiple of 2π that brings the
/// step back into [-π, π].
pub fn unwrap_phase(wrapped: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(wrapped.len());
    let Some(&first) = wrapped.first() else {
        return out;
    };
    out.push(first);
    let mut offset = 0.0;
    for w in wrapped.windows(2) {
        let step = w[1] - w[0];
        offset += fold_step(step) - step;
        out.push(w[1] + offset);
    }
    out
}

/// Derivative of the unwrapped phase in Hz.
///
/// Central differences in the interior and one-sided differences at both ends,
/// so the output has the same length as the input.
pub fn instantaneous_frequency(phase: &[f64], fs: f64) -> Vec<f64> {
    if phase.len() < 2 {
        return vec![0.0; phase.len()];
    }
    let steps: Vec<f64> = phase.windows(2).map(|w| w[1] - w[0]).collect();
    frequency_from_increments(&steps, fs)
}

/// Same stencil as [`instantaneous_frequency`], written in terms of the N−1
/// phase increments: `θ[n+1] − θ[n−1] = inc[n−1] + inc[n]`.
pub fn frequency_from_increments(inc: &[f64], fs: f64) -> Vec<f64> {
    let Some((&first, &last)) = inc.first().zip(inc.last()) else {
        return vec![0.0; inc.len() + 1];
    };
    let one_sided = fs / (2.0 * PI);
    let central = fs / (4.0 * PI);
    let mut f = Vec::with_capacity(inc.len() + 1);
    f.push(one_sided * first);
    f.extend(inc.windows(2).map(|w| central * (w[0] + w[1])));
    f.push(one_sided * last);
    f
}

/// Aligned IA / IP / IF arrays for one segment.
#[derive(Debug, Clone, PartialEq)]
pub struct InstantaneousSeries {
    pub ia: Vec<f64>,
    pub ip: Vec<f64>,
    pub ifreq: Vec<f64>,
    pub fs: f64,
    /// Samples where the analytic signal was exactly zero.
    pub zero_magnitude: usize,
}

impl InstantaneousSeries {
    pub fn from_signal(signal: &Signal) -> Self {
        let analytic = analytic_transform(signal);
        let ia = instantaneous_amplitude(&analytic);
        let Phase {
            values: ip,
            increments,
            zero_magnitude,
        } = instantaneous_phase(&analytic);
        let ifreq = frequency_from_increments(&increments, signal.fs());
        Self {
            ia,
            ip,
            ifreq,
            fs: signal.fs(),
            zero_magnitude,
        }
    }

    /// Builds a series directly from IA and IF arrays (phase left empty).
    ///
    /// Used by the STFT baseline, where the "amplitude" is aggregated power and the
    /// "frequency" axis is the FFT bin grid.
    pub fn from_parts(ia: Vec<f64>, ifreq: Vec<f64>, fs: f64) -> Result<Self> {
        if ia.len() != ifreq.len() {
            return Err(Error::InvalidLength(format!(
                "amplitude and frequency arrays differ in length ({} vs {})",
                ia.len(),
                ifreq.len()
            )));
        }
        if ia.is_empty() {
            return Err(Error::InvalidLength("empty series".into()));
        }
        Ok(Self {
            ia,
            ip: Vec::new(),
            ifreq,
            fs,
            zero_magnitude: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.ia.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ia.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(f0: f64, fs: f64, n: usize, amp: f64) -> Signal {
        let s = (0..n)
            .map(|i| amp * (2.0 * PI * f0 * i as f64 / fs).cos())
            .collect();
        Signal::new(s, fs).unwrap()
    }

    fn interior(n: usize, frac: f64) -> std::ops::Range<usize> {
        let skip = (n as f64 * frac).ceil() as usize;
        skip..n - skip
    }

    #[test]
    fn cosine_maps_to_sine() {
        let (fs, f0, n) = (64_000.0, 8_000.0, 6400);
        let xa = analytic_transform(&tone(f0, fs, n, 1.0));
        let max_dev = interior(n, 0.05)
            .map(|i| (xa[i].im - (2.0 * PI * f0 * i as f64 / fs).sin()).abs())
            .fold(0.0, f64::max);
        assert!(max_dev < 1e-6, "max deviation {max_dev}");
    }

    #[test]
    fn constant_has_zero_imaginary_part() {
        let sig = Signal::new(vec![2.5; 100], 10.0).unwrap();
        let xa = analytic_transform(&sig);
        for z in &xa {
            assert!((z.re - 2.5).abs() < 1e-12);
            assert!(z.im.abs() < 1e-12);
        }
        let phase = instantaneous_phase(&xa);
        assert!(phase.values.iter().all(|p| p.abs() < 1e-12));
        let f = instantaneous_frequency(&phase.values, 10.0);
        assert!(f.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn odd_length_round_trip() {
        let x: Vec<f64> = (0..101).map(|i| ((i * 37 % 11) as f64) - 5.0).collect();
        let xa = analytic_transform_checked(&x).unwrap();
        for (a, b) in xa.iter().zip(&x) {
            assert!((a.re - b).abs() < 1e-12);
        }
    }

    #[test]
    fn checked_transform_errors() {
        assert!(matches!(
            analytic_transform_checked(&[1.0; 8]),
            Err(Error::TooShort { .. })
        ));
        let mut x = vec![0.0; 32];
        x[3] = f64::INFINITY;
        assert!(matches!(
            analytic_transform_checked(&x),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn tone_envelope_and_frequency() {
        let (fs, f0, n) = (64_000.0, 8_000.0, 6400);
        let series = InstantaneousSeries::from_signal(&tone(f0, fs, n, 1.0));
        assert_eq!(series.ia.len(), n);
        assert_eq!(series.ip.len(), n);
        assert_eq!(series.ifreq.len(), n);
        for i in interior(n, 0.05) {
            assert!((series.ia[i] - 1.0).abs() < 1e-3);
            assert!((series.ifreq[i] - f0).abs() < 0.01 * f0);
        }
    }

    #[test]
    fn tone_phase_slope() {
        let (fs, f0, n) = (64_000.0, 8_000.0, 6400);
        let xa = analytic_transform(&tone(f0, fs, n, 1.0));
        let ip = instantaneous_phase(&xa).values;
        // least-squares slope over the interior
        let idx: Vec<usize> = interior(n, 0.05).collect();
        let m = idx.len() as f64;
        let mx = idx.iter().map(|&i| i as f64).sum::<f64>() / m;
        let my = idx.iter().map(|&i| ip[i]).sum::<f64>() / m;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for &i in &idx {
            sxy += (i as f64 - mx) * (ip[i] - my);
            sxx += (i as f64 - mx).powi(2);
        }
        let slope = sxy / sxx;
        let expected = 2.0 * PI * f0 / fs;
        assert!(((slope - expected) / expected).abs() < 1e-3);
    }

    #[test]
    fn unwrap_keeps_steps_below_pi() {
        let raw: Vec<f64> = (0..200)
            .map(|i| {
                let p = 0.9 * i as f64;
                (p + PI).rem_euclid(2.0 * PI) - PI
            })
            .collect();
        let un = unwrap_phase(&raw);
        for (i, w) in un.windows(2).enumerate() {
            assert!((w[1] - w[0] - 0.9).abs() < 1e-9, "step {i}");
        }
    }

    #[test]
    fn zero_samples_counted() {
        let xa = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        let phase = instantaneous_phase(&xa);
        assert_eq!(phase.zero_magnitude, 2);
        assert_eq!(phase.values, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn frequency_stencil_on_quadratic_phase() {
        // phase = a·n², derivative 2a·n exactly under central differences
        let a = 0.001;
        let ip: Vec<f64> = (0..20).map(|i| a * (i * i) as f64).collect();
        let fs = 2.0 * PI;
        let f = instantaneous_frequency(&ip, fs);
        assert_eq!(f.len(), 20);
        for (i, v) in f.iter().enumerate().take(19).skip(1) {
            assert!((v - 2.0 * a * i as f64).abs() < 1e-12);
        }
        assert!((f[0] - a).abs() < 1e-15);
        assert!((f[19] - a * (361.0 - 324.0)).abs() < 1e-12);
    }

    #[test]
    fn from_parts_checks_alignment() {
        assert!(InstantaneousSeries::from_parts(vec![1.0; 3], vec![1.0; 4], 1.0).is_err());
        assert!(InstantaneousSeries::from_parts(vec![], vec![], 1.0).is_err());
    }
}
