use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use envelope_cli::alloc::TrackingAllocator;
use envelope_cli::{
    cmd_bench, cmd_extract, cmd_plot_data, cmd_synth, cmd_train_eval, exit_code, BenchConfig,
    ExtractConfig, PlotConfig, SynthCmdConfig, TrainEvalConfig,
};
use envelope_core::data::{Format, Method, SynthConfig, DEFAULT_SEGMENT_LEN};
use envelope_core::{Error, ForestConfig};

#[global_allocator]
static ALLOC: TrackingAllocator = TrackingAllocator;

#[derive(Parser)]
#[command(
    name = "envelope",
    version,
    about = "Envelope-based bearing vibration analysis"
)]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true, env = "ENVELOPE_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment recordings and write a feature matrix.
    Extract {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Diagnostics report path [default: <out>.diagnostics.txt].
        #[arg(long)]
        diagnostics: Option<PathBuf>,
        #[arg(long, default_value = "proposed")]
        method: Method,
        #[arg(long, default_value_t = DEFAULT_SEGMENT_LEN)]
        segment_len: usize,
    },
    /// Split a feature matrix, train a random forest and evaluate it.
    TrainEval {
        #[arg(long)]
        features: PathBuf,
        /// Training fraction.
        #[arg(long, default_value_t = 0.7)]
        split: f64,
        #[arg(long, default_value_t = 42, env = "ENVELOPE_SEED")]
        seed: u64,
        #[command(flatten)]
        forest: ForestArgs,
        #[arg(long, default_value = "model.json")]
        model_out: PathBuf,
        #[arg(long, default_value = "report.txt")]
        report_out: PathBuf,
        /// Confusion matrix CSV [default: <report-out>.confusion.csv].
        #[arg(long)]
        confusion_out: Option<PathBuf>,
    },
    /// Time feature extraction across segment lengths.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = envelope_cli::DEFAULT_BENCH_SIZES)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        runs: usize,
        #[arg(long, default_value_t = 64_000.0)]
        fs: f64,
        #[arg(long, default_value_t = 42, env = "ENVELOPE_SEED")]
        seed: u64,
        /// Write the timing CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate the synthetic 4-class benchmark as raw-f64le files plus a manifest.
    Synth {
        #[arg(long, default_value_t = 200)]
        per_class: usize,
        #[arg(long, default_value_t = 42, env = "ENVELOPE_SEED")]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 64_000.0)]
        fs: f64,
        #[arg(long, default_value_t = DEFAULT_SEGMENT_LEN)]
        len: usize,
        #[arg(long, default_value_t = 10.0)]
        snr_db: f64,
        #[arg(long, default_value_t = 0.5)]
        depth: f64,
        /// Draw the modulation phase at random per signal.
        #[arg(long)]
        random_modulation_phase: bool,
    },
    /// Export every envelope representation of one segment as CSV.
    PlotData {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "raw-f64le")]
        format: Format,
        #[arg(long, default_value_t = 64_000.0)]
        fs: f64,
        #[arg(long, default_value_t = DEFAULT_SEGMENT_LEN)]
        segment_len: usize,
        /// Zero-based segment index within the recording.
        #[arg(long, default_value_t = 0)]
        segment: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Args)]
struct ForestArgs {
    #[arg(long, default_value_t = 100)]
    n_trees: usize,
    /// Unlimited when omitted.
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long, default_value_t = 1)]
    min_leaf: usize,
    #[arg(long, default_value_t = 3)]
    features_per_split: usize,
}

fn run(command: Command) -> envelope_core::Result<()> {
    let stdout = std::io::stdout();
    match command {
        Command::Extract {
            manifest,
            out,
            diagnostics,
            method,
            segment_len,
        } => {
            let s = cmd_extract(&ExtractConfig {
                manifest,
                out: out.clone(),
                diagnostics,
                method,
                segment_len,
            })?;
            println!(
                "wrote {} rows to {} ({} of {} segments dropped; see {})",
                s.rows,
                out.display(),
                s.diagnostics.dropped.len(),
                s.diagnostics.total_segments,
                s.diagnostics_path.display()
            );
            if !s.diagnostics.dropped.is_empty() {
                eprintln!("warning: output is partial, degenerate segments were dropped");
            }
        }
        Command::TrainEval {
            features,
            split,
            seed,
            forest,
            model_out,
            report_out,
            confusion_out,
        } => {
            let forest = ForestConfig {
                n_trees: forest.n_trees,
                max_depth: forest.max_depth,
                min_leaf: forest.min_leaf,
                features_per_split: forest.features_per_split,
                seed,
            };
            let s = cmd_train_eval(&TrainEvalConfig {
                features,
                train_fraction: split,
                seed,
                forest,
                model_out,
                report_out,
                confusion_out,
            })?;
            stdout.lock().write_all(s.report_text.as_bytes())?;
        }
        Command::Bench {
            sizes,
            runs,
            fs,
            seed,
            out,
        } => {
            let report = cmd_bench(&BenchConfig {
                sizes,
                runs,
                fs,
                seed,
            })?;
            match out {
                Some(path) => {
                    let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
                    report.write_csv(&mut f)?;
                    f.flush()?;
                }
                None => report.write_csv(stdout.lock())?,
            }
            report.write_summary(std::io::stderr().lock())?;
        }
        Command::Synth {
            per_class,
            seed,
            out_dir,
            fs,
            len,
            snr_db,
            depth,
            random_modulation_phase,
        } => {
            let synth = SynthConfig {
                fs,
                len,
                snr_db,
                depth,
                random_modulation_phase,
                ..Default::default()
            };
            let manifest = cmd_synth(&SynthCmdConfig {
                per_class,
                seed,
                out_dir,
                synth,
            })?;
            println!(
                "wrote {} signals; manifest {}",
                4 * per_class,
                manifest.display()
            );
        }
        Command::PlotData {
            input,
            format,
            fs,
            segment_len,
            segment,
            out_dir,
        } => {
            let paths = cmd_plot_data(&PlotConfig {
                input,
                format,
                fs,
                segment_len,
                segment_index: segment,
                out_dir,
            })?;
            for p in paths {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(2);
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

fn report(e: &Error) {
    let kind = match e.kind() {
        envelope_core::ErrorKind::Config => "configuration",
        envelope_core::ErrorKind::Ingestion => "ingestion",
        envelope_core::ErrorKind::Degenerate => "degenerate input",
    };
    eprintln!("error ({kind}): {e}");
}
