//! Joint amplitude-frequency representations of a segment's envelope and their
//! plain-text exports.

use std::io::Write;

use num_complex::Complex64;

use crate::analytic::{fft_in_place, InstantaneousSeries};
use crate::error::{Error, Result};

/// IF/IA point cloud, one point per sample, in temporal order.
#[derive(Debug, Clone, PartialEq)]
pub struct Iafm {
    pub freq: Vec<f64>,
    pub amp: Vec<f64>,
}

/// Full (2N−1 lag) cross-correlation between IA and IF.
#[derive(Debug, Clone, PartialEq)]
pub struct Iafc {
    /// Lags in ascending order, `-(N-1)..=N-1`.
    pub lags: Vec<i64>,
    pub values: Vec<f64>,
}

impl Iafc {
    /// Number of samples in the series the correlation was built from.
    pub fn series_len(&self) -> usize {
        self.values.len().div_ceil(2)
    }

    pub fn value_at(&self, lag: i64) -> Option<f64> {
        let idx = lag + self.series_len() as i64 - 1;
        usize::try_from(idx)
            .ok()
            .and_then(|i| self.values.get(i).copied())
    }
}

/// Normalized instantaneous energy times normalized instantaneous frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct Iefd {
    pub values: Vec<f64>,
    pub ie_norm: Vec<f64>,
    pub if_norm: Vec<f64>,
}

pub fn compute_iafm(series: &InstantaneousSeries) -> Iafm {
    Iafm {
        freq: series.ifreq.clone(),
        amp: series.ia.clone(),
    }
}

pub fn compute_iafc(series: &InstantaneousSeries) -> Iafc {
    cross_correlate(&series.ia, &series.ifreq)
}

/// `R[k] = Σ_n a[n]·f[n−k]` for `k = -(N-1)..=N-1`, zero outside `[0, N)`.
///
/// Both inputs go through a single complex FFT (`a + j·reverse(f)`), the two real
/// spectra are separated by conjugate symmetry, multiplied and inverted.
pub fn cross_correlate(a: &[f64], f: &[f64]) -> Iafc {
    assert_eq!(a.len(), f.len(), "cross_correlate needs equal lengths");
    let n = a.len();
    let out_len = 2 * n - 1;
    let lags = (-(n as i64 - 1)..=(n as i64 - 1)).collect();
    if n == 0 {
        return Iafc {
            lags,
            values: Vec::new(),
        };
    }
    let size = out_len.next_power_of_two();

    let mut buf = vec![Complex64::new(0.0, 0.0); size];
    for (i, &v) in a.iter().enumerate() {
        buf[i].re = v;
    }
    for (i, &v) in f.iter().rev().enumerate() {
        buf[i].im = v;
    }
    fft_in_place(&mut buf, false);

    let mut prod = vec![Complex64::new(0.0, 0.0); size];
    for k in 0..size {
        let x = buf[k];
        let y = buf[(size - k) % size].conj();
        let spec_a = (x + y) * 0.5;
        let spec_g = (x - y) * Complex64::new(0.0, -0.5);
        prod[k] = spec_a * spec_g;
    }
    fft_in_place(&mut prod, true);

    let scale = 1.0 / size as f64;
    let values = prod[..out_len].iter().map(|z| z.re * scale).collect();
    Iafc { lags, values }
}

/// Direct O(N²) evaluation of the same sum; kept for verification and tiny inputs.
pub fn cross_correlate_direct(a: &[f64], f: &[f64]) -> Iafc {
    assert_eq!(a.len(), f.len(), "cross_correlate needs equal lengths");
    let n = a.len() as i64;
    let mut lags = Vec::with_capacity((2 * n - 1).max(0) as usize);
    let mut values = Vec::with_capacity(lags.capacity());
    for k in -(n - 1)..=(n - 1) {
        let lo = k.max(0);
        let hi = (n - 1).min(n - 1 + k);
        let mut acc = 0.0;
        for i in lo..=hi {
            acc += a[i as usize] * f[(i - k) as usize];
        }
        lags.push(k);
        values.push(acc);
    }
    Iafc { lags, values }
}

pub fn compute_iefd(series: &InstantaneousSeries) -> Result<Iefd> {
    let energy: f64 = series.ia.iter().map(|a| a * a).sum();
    if energy == 0.0 || !energy.is_finite() {
        return Err(Error::Degenerate("envelope has zero energy"));
    }
    let freq_sum: f64 = series.ifreq.iter().sum();
    if freq_sum == 0.0 || !freq_sum.is_finite() {
        return Err(Error::Degenerate("instantaneous frequency sums to zero"));
    }
    let ie_norm: Vec<f64> = series.ia.iter().map(|a| a * a / energy).collect();
    let if_norm: Vec<f64> = series.ifreq.iter().map(|f| f / freq_sum).collect();
    let values = ie_norm.iter().zip(&if_norm).map(|(e, f)| e * f).collect();
    Ok(Iefd {
        values,
        ie_norm,
        if_norm,
    })
}

/// One row of the joint time-energy-frequency heatmap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatmapPoint {
    pub time_s: f64,
    pub freq_hz: f64,
    pub energy: f64,
}

pub fn export_heatmap_data(series: &InstantaneousSeries) -> Vec<HeatmapPoint> {
    series
        .ia
        .iter()
        .zip(&series.ifreq)
        .enumerate()
        .map(|(n, (&a, &f))| HeatmapPoint {
            time_s: n as f64 / series.fs,
            freq_hz: f,
            energy: a,
        })
        .collect()
}

// Plot exports: `,`-separated, header row, `\n` terminators, shortest round-trip
// decimal formatting (no locale).

pub fn write_heatmap_csv<W: Write>(mut out: W, points: &[HeatmapPoint]) -> std::io::Result<()> {
    writeln!(out, "time_s,freq_hz,energy")?;
    for p in points {
        writeln!(out, "{},{},{}", p.time_s, p.freq_hz, p.energy)?;
    }
    Ok(())
}

pub fn write_iafm_csv<W: Write>(mut out: W, iafm: &Iafm) -> std::io::Result<()> {
    writeln!(out, "freq_hz,amp")?;
    for (f, a) in iafm.freq.iter().zip(&iafm.amp) {
        writeln!(out, "{f},{a}")?;
    }
    Ok(())
}

pub fn write_iafc_csv<W: Write>(mut out: W, iafc: &Iafc) -> std::io::Result<()> {
    writeln!(out, "lag,value")?;
    for (k, v) in iafc.lags.iter().zip(&iafc.values) {
        writeln!(out, "{k},{v}")?;
    }
    Ok(())
}

pub fn write_iefd_csv<W: Write>(mut out: W, iefd: &Iefd, fs: f64) -> std::io::Result<()> {
    writeln!(out, "time_s,iefd,ie_norm,if_norm")?;
    for (n, ((v, e), f)) in iefd
        .values
        .iter()
        .zip(&iefd.ie_norm)
        .zip(&iefd.if_norm)
        .enumerate()
    {
        writeln!(out, "{},{v},{e},{f}", n as f64 / fs)?;
    }
    Ok(())
}

/// IA and IF traces against time.
pub fn write_traces_csv<W: Write>(mut out: W, series: &InstantaneousSeries) -> std::io::Result<()> {
    writeln!(out, "time_s,ia,if_hz")?;
    for (n, (a, f)) in series.ia.iter().zip(&series.ifreq).enumerate() {
        writeln!(out, "{},{a},{f}", n as f64 / series.fs)?;
    }
    Ok(())
}
