use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use moire_core::blend::BlendConfig;
use moire_core::corpus::{corpus_stats, write_stats_csv};
use moire_core::io;
use moire_core::metrics::{color_distance, HistogramConfig};
use moire_core::pipeline::{self, load_config_with_env, PipelineConfig};

/// Synthetic moiré dataset tooling.
#[derive(Parser)]
#[command(name = "moire", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Crop and filter raw pattern frames into accepted patches.
    FilterPatterns {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Blend patterns over clean images and write images plus a manifest.
    Synthesize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        pattern_dir: Option<PathBuf>,
        #[arg(long)]
        clean_dir: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        reference_dir: Option<PathBuf>,
        /// Plain multiply blending (weight 1 on the multiply branch).
        #[arg(long)]
        multiply_only: bool,
        /// Per-sample gain image applied after blending.
        #[arg(long)]
        tone_matrix: Option<PathBuf>,
    },
    /// Per-pair PSNR/SSIM between same-named files of two directories.
    Evaluate {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Full-frame sharpness and colorfulness of every image in a directory.
    Stats {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize a synthesis manifest.
    Report {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the RGB-uv Hellinger distance between two images.
    ColorDistance {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// JSON configuration; omitted keys take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0: one per core).
    #[arg(long)]
    workers: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<PipelineConfig> {
        let mut cfg = load_config_with_env(self.config.as_deref(), std::env::vars())?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(workers) = self.workers {
            cfg.workers = workers;
        }
        Ok(cfg)
    }
}

/// Outcome of a subcommand that may skip some items.
enum Status {
    Done,
    Partial(usize),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(Status::Done) => ExitCode::SUCCESS,
        Ok(Status::Partial(n)) => {
            log::warn!("{n} item(s) failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn partial(failed: usize) -> Status {
    if failed == 0 {
        Status::Done
    } else {
        Status::Partial(failed)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn run(cli: Cli) -> Result<Status> {
    match cli.command {
        Command::FilterPatterns {
            input,
            output,
            common,
        } => {
            let cfg = common.load()?;
            let summary =
                pipeline::filter_patterns(&input, &output, &cfg.selection, cfg.seed, cfg.workers)?;
            log::info!(
                "accepted {}, rejected {}, failed {}",
                summary.accepted.len(),
                summary.rejected.len(),
                summary.failures.len()
            );
            Ok(partial(summary.failures.len()))
        }
        Command::Synthesize {
            common,
            pattern_dir,
            clean_dir,
            output,
            reference_dir,
            multiply_only,
            tone_matrix,
        } => {
            let mut cfg = common.load()?;
            cfg.pattern_dir = pattern_dir.or(cfg.pattern_dir);
            cfg.clean_dir = clean_dir.or(cfg.clean_dir);
            cfg.output_dir = output.or(cfg.output_dir);
            cfg.reference_dir = reference_dir.or(cfg.reference_dir);
            cfg.tone_matrix = tone_matrix.or(cfg.tone_matrix);
            if multiply_only {
                cfg.blend = BlendConfig::multiply_only();
            }
            let summary = pipeline::synthesize(&cfg)?;
            log::info!(
                "wrote {} records to {}",
                summary.records.len(),
                summary.manifest_path().display()
            );
            Ok(partial(summary.failures.len()))
        }
        Command::Evaluate {
            pred,
            reference,
            out,
        } => {
            let eval = pipeline::evaluate(&pred, &reference)?;
            if eval.rows.is_empty() {
                bail!("no image pairs could be evaluated");
            }
            pipeline::write_evaluation_csv(&eval, create(&out)?)?;
            Ok(partial(eval.problems.len()))
        }
        Command::Stats { input, out } => {
            let stats = corpus_stats(&input)?;
            write_stats_csv(&stats.rows, create(&out)?)?;
            if stats.rows.is_empty() && !stats.failures.is_empty() {
                bail!(
                    "none of the {} file(s) could be scored",
                    stats.failures.len()
                );
            }
            Ok(partial(stats.failures.len()))
        }
        Command::Report { manifest, out } => {
            let report = pipeline::report(&manifest, &out)?;
            log::info!("summarized {} records", report.records);
            Ok(partial(report.malformed.len()))
        }
        Command::ColorDistance { a, b, config } => {
            let hist: HistogramConfig = match config {
                Some(path) => load_config_with_env(Some(&path), std::env::vars())?.histogram,
                None => HistogramConfig::default(),
            };
            let d = color_distance(&io::load_rgb(&a)?, &io::load_rgb(&b)?, &hist)?;
            println!("{d}");
            Ok(Status::Done)
        }
    }
}
