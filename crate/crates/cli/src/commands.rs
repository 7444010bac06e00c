//! Subcommand implementations. Each returns a summary and writes its files; the
//! binary only parses arguments and maps errors to exit codes.

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use envelope_core::data::segment;
use envelope_core::data::{
    build_dataset, split, synth_generate, write_raw_f64le, BuildOptions, Diagnostics, FaultClass,
    Format, Label, LabeledDataset, LabeledRecording, ManifestEntry, Method, RecordingManifest,
    SynthConfig,
};
use envelope_core::forest::{train, ForestConfig, TrainedForest};
use envelope_core::metrics::{evaluate, EvalReport};
use envelope_core::representations::{
    compute_iafc, compute_iafm, compute_iefd, export_heatmap_data, write_heatmap_csv,
    write_iafc_csv, write_iafm_csv, write_iefd_csv, write_traces_csv,
};
use envelope_core::{extract_features, Error, InstantaneousSeries, Result, Signal};

use crate::alloc::measure_peak;

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(fs::File::create(path)?))
}

#[derive(Debug, Clone)]
pub struct ExtractConfig {
    pub manifest: PathBuf,
    pub out: PathBuf,
    /// Defaults to `<out>.diagnostics.txt`.
    pub diagnostics: Option<PathBuf>,
    pub method: Method,
    pub segment_len: usize,
}

#[derive(Debug, Clone)]
pub struct ExtractSummary {
    pub rows: usize,
    pub diagnostics: Diagnostics,
    pub diagnostics_path: PathBuf,
}

/// Manifest → feature CSV + diagnostics report. Nothing is written unless
/// extraction succeeds.
pub fn cmd_extract(config: &ExtractConfig) -> Result<ExtractSummary> {
    let manifest = RecordingManifest::load(&config.manifest)?;
    manifest.validate(1)?;
    let recordings = LabeledRecording::from_manifest(&manifest)?;
    let (dataset, diagnostics) = build_dataset(
        &recordings,
        BuildOptions {
            segment_len: config.segment_len,
            method: config.method,
            ..Default::default()
        },
    )?;

    let mut out = create(&config.out)?;
    dataset.write_csv(&mut out)?;
    out.flush()?;

    let diagnostics_path = config.diagnostics.clone().unwrap_or_else(|| {
        let mut p = config.out.clone().into_os_string();
        p.push(".diagnostics.txt");
        PathBuf::from(p)
    });
    let mut diag_out = create(&diagnostics_path)?;
    diagnostics.write_report(&mut diag_out)?;
    diag_out.flush()?;

    Ok(ExtractSummary {
        rows: dataset.len(),
        diagnostics,
        diagnostics_path,
    })
}

#[derive(Debug, Clone)]
pub struct TrainEvalConfig {
    pub features: PathBuf,
    pub train_fraction: f64,
    pub seed: u64,
    pub forest: ForestConfig,
    pub model_out: PathBuf,
    pub report_out: PathBuf,
    /// Defaults to `<report_out>` with a `.confusion.csv` suffix.
    pub confusion_out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct TrainEvalSummary {
    pub report: EvalReport,
    pub report_text: String,
    pub forest: TrainedForest,
    pub test_set: LabeledDataset,
}

pub fn cmd_train_eval(config: &TrainEvalConfig) -> Result<TrainEvalSummary> {
    let file = fs::File::open(&config.features).map_err(|e| Error::Ingestion {
        path: config.features.clone(),
        message: e.to_string(),
    })?;
    let dataset = LabeledDataset::read_csv(BufReader::new(file))?;
    if dataset.class_names.len() < 2 {
        return Err(Error::Config(
            "feature matrix has fewer than 2 classes".into(),
        ));
    }
    let (train_set, test_set) = split(&dataset, config.train_fraction, config.seed)?;
    let forest = train(&train_set, config.forest)?;
    let report = evaluate(&forest, &test_set)?;

    let mut text = Vec::new();
    let name = config
        .features
        .file_name()
        .unwrap_or(config.features.as_os_str());
    writeln!(
        text,
        "# features: {} ({} method)",
        name.to_string_lossy(),
        dataset.method
    )?;
    writeln!(
        text,
        "# split: {} train / {} test (train fraction {}, stratified, seed {})",
        train_set.len(),
        test_set.len(),
        config.train_fraction,
        config.seed
    )?;
    report.write_text(&mut text, &forest)?;
    let report_text = String::from_utf8(text).expect("report is UTF-8");

    let mut out = create(&config.report_out)?;
    out.write_all(report_text.as_bytes())?;
    out.flush()?;

    let confusion_path = config.confusion_out.clone().unwrap_or_else(|| {
        let mut p = config.report_out.clone().into_os_string();
        p.push(".confusion.csv");
        PathBuf::from(p)
    });
    let mut out = create(&confusion_path)?;
    report.write_confusion_csv(&mut out)?;
    out.flush()?;

    let mut out = create(&config.model_out)?;
    forest.save(&mut out)?;
    out.flush()?;

    Ok(TrainEvalSummary {
        report,
        report_text,
        forest,
        test_set,
    })
}

/// Loads a persisted model.
pub fn load_model(path: &Path) -> Result<TrainedForest> {
    let file = fs::File::open(path).map_err(|e| Error::Ingestion {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    TrainedForest::load(BufReader::new(file))
}

#[derive(Debug, Clone)]
pub struct SynthCmdConfig {
    pub per_class: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub synth: SynthConfig,
}

/// Writes one raw-f64le file per signal plus `manifest.json`; returns the
/// manifest path.
pub fn cmd_synth(config: &SynthCmdConfig) -> Result<PathBuf> {
    let items = synth_generate(&config.synth, config.per_class, config.seed)?;
    fs::create_dir_all(&config.out_dir)?;
    let mut counters = [0usize; 4];
    let mut entries = Vec::with_capacity(items.len());
    for (signal, class) in &items {
        let slot = &mut counters[class.id() as usize - 1];
        let name = format!("class{}_{}_{:04}.f64", class.id(), class.name(), *slot);
        *slot += 1;
        write_raw_f64le(&config.out_dir.join(&name), signal.samples())?;
        entries.push(ManifestEntry {
            path: PathBuf::from(name),
            label: Label::Name(class.name().to_string()),
            fs: config.synth.fs,
            format: Format::RawF64Le,
        });
    }
    let manifest_path = config.out_dir.join("manifest.json");
    RecordingManifest::new(entries).save(&manifest_path)?;
    Ok(manifest_path)
}

#[derive(Debug, Clone)]
pub struct PlotConfig {
    pub input: PathBuf,
    pub format: Format,
    pub fs: f64,
    pub segment_len: usize,
    pub segment_index: usize,
    pub out_dir: PathBuf,
}

/// Files written by [`cmd_plot_data`], in order.
pub const PLOT_FILES: [&str; 5] = [
    "traces.csv",
    "iafm.csv",
    "iafc.csv",
    "heatmap.csv",
    "iefd.csv",
];

pub fn cmd_plot_data(config: &PlotConfig) -> Result<Vec<PathBuf>> {
    let recording = envelope_core::data::load_recording(&config.input, config.format, config.fs)?;
    let segments = segment(&recording, config.segment_len)?;
    let count = segments.len();
    let signal = segments
        .into_iter()
        .nth(config.segment_index)
        .ok_or_else(|| {
            Error::Config(format!(
                "segment {} requested but the recording has {count} segment(s) of {} samples",
                config.segment_index, config.segment_len
            ))
        })?;
    plot_signal(&signal, &config.out_dir)
}

/// Writes every representation of one segment into `out_dir`.
pub fn plot_signal(signal: &Signal, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let series = InstantaneousSeries::from_signal(signal);
    let iefd = compute_iefd(&series)?;
    fs::create_dir_all(out_dir)?;
    let paths: Vec<PathBuf> = PLOT_FILES.iter().map(|f| out_dir.join(f)).collect();

    let mut w = create(&paths[0])?;
    write_traces_csv(&mut w, &series)?;
    w.flush()?;
    let mut w = create(&paths[1])?;
    write_iafm_csv(&mut w, &compute_iafm(&series))?;
    w.flush()?;
    let mut w = create(&paths[2])?;
    write_iafc_csv(&mut w, &compute_iafc(&series))?;
    w.flush()?;
    let mut w = create(&paths[3])?;
    write_heatmap_csv(&mut w, &export_heatmap_data(&series))?;
    w.flush()?;
    let mut w = create(&paths[4])?;
    write_iefd_csv(&mut w, &iefd, series.fs)?;
    w.flush()?;
    Ok(paths)
}

pub const DEFAULT_BENCH_SIZES: [usize; 5] = [1600, 3200, 6400, 12800, 25600];

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub runs: usize,
    pub fs: f64,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: DEFAULT_BENCH_SIZES.to_vec(),
            runs: 20,
            fs: 64_000.0,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub median_s: f64,
    pub p95_s: f64,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of log(median) against log(N·log2 N).
    pub exponent: f64,
    /// median(2N) / median(N) for N = 6400, when both sizes were run.
    pub doubling_ratio: Option<f64>,
    /// Peak bytes allocated while extracting one 6400-sample segment.
    pub peak_bytes: Option<usize>,
    pub machine: String,
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    // nearest-rank
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Times `extract_features` on `runs` repetitions of a synthetic segment of
/// length `n` (after one warm-up call). Returns per-run seconds.
pub fn time_extraction(n: usize, runs: usize, fs: f64, seed: u64) -> Result<Vec<f64>> {
    let synth = SynthConfig {
        len: n,
        fs,
        ..Default::default()
    };
    let signal = synth.generate_one(FaultClass::InnerRace, 0, seed)?;
    extract_features(&signal)?;
    let mut times = Vec::with_capacity(runs);
    for _ in 0..runs {
        let start = Instant::now();
        let fv = extract_features(&signal)?;
        times.push(start.elapsed().as_secs_f64());
        std::hint::black_box(fv);
    }
    Ok(times)
}

pub fn machine_description() -> String {
    let cpu = fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|s| {
            s.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split(':').nth(1))
                .map(|m| m.trim().to_string())
        })
        .unwrap_or_else(|| "unknown cpu".to_string());
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    format!(
        "{cpu}; {threads} hardware threads; {}-{}",
        std::env::consts::ARCH,
        std::env::consts::OS
    )
}

pub fn cmd_bench(config: &BenchConfig) -> Result<BenchReport> {
    if config.runs < 1 || config.sizes.is_empty() {
        return Err(Error::Config(
            "bench needs at least one size and one run".into(),
        ));
    }
    let mut rows = Vec::new();
    for &n in &config.sizes {
        let mut times = time_extraction(n, config.runs, config.fs, config.seed)?;
        times.sort_by(f64::total_cmp);
        rows.push(BenchRow {
            n,
            median_s: median(&times),
            p95_s: percentile(&times, 0.95),
        });
    }

    let points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| {
            let n = r.n as f64;
            ((n * n.log2()).ln(), r.median_s.ln())
        })
        .collect();
    let exponent = if points.len() >= 2 {
        let m = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
        let my = points.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    } else {
        f64::NAN
    };
    let at = |n: usize| rows.iter().find(|r| r.n == n).map(|r| r.median_s);
    let doubling_ratio = at(6400).zip(at(12800)).map(|(a, b)| b / a);

    let signal = SynthConfig::default().generate_one(FaultClass::InnerRace, 0, config.seed)?;
    let (res, peak_bytes) = measure_peak(|| extract_features(&signal));
    res?;

    Ok(BenchReport {
        rows,
        exponent,
        doubling_ratio,
        peak_bytes,
        machine: machine_description(),
    })
}

impl BenchReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "N,median_s,p95_s")?;
        for r in &self.rows {
            writeln!(out, "{},{:e},{:e}", r.n, r.median_s, r.p95_s)?;
        }
        Ok(())
    }

    pub fn write_summary<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "machine: {}", self.machine)?;
        writeln!(out, "scaling exponent vs N·log N: {:.3}", self.exponent)?;
        if let Some(r) = self.doubling_ratio {
            writeln!(out, "time(12800)/time(6400): {r:.3}")?;
        }
        match self.peak_bytes {
            Some(b) => writeln!(
                out,
                "peak allocation during 6400-sample extraction: {b} bytes ({:.3} MB)",
                b as f64 / 1e6
            )?,
            None => writeln!(
                out,
                "peak allocation: n/a (tracking allocator not installed)"
            )?,
        }
        Ok(())
    }
}
