use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use latent_debate::detector::{DetectorConfig, DetectorModel};
use latent_debate::features;
use latent_debate::grid::{build_grid, Topology};
use latent_debate::pipeline::{self, GridOptions};
use latent_debate::record::{read_records, DebateRecord};
use latent_debate::render::{render, RenderFormat};

#[derive(Parser)]
#[command(name = "latent-debate", version, about = "Latent-debate surrogate and hallucination detector")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct GridFlags {
    /// Within-layer link pattern.
    #[arg(long, default_value = "simple")]
    topology: Topology,
    /// Use weight 1 for every token.
    #[arg(long)]
    no_token_weight: bool,
}

impl GridFlags {
    fn options(self) -> GridOptions {
        GridOptions { topology: self.topology, use_weights: !self.no_token_weight }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run every surrogate on a corpus and report consistency with the model.
    Evaluate {
        /// JSON-lines corpus of debate records.
        records: PathBuf,
        #[command(flatten)]
        grid: GridFlags,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write the tables here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw the evaluated grid of a single record.
    Render {
        record: PathBuf,
        #[command(flatten)]
        grid: GridFlags,
        #[arg(long, default_value = "ansi")]
        format: RenderFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract region features for every record as CSV.
    Features {
        records: PathBuf,
        #[command(flatten)]
        grid: GridFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the detector on a feature table and report held-out AUROC.
    Train {
        features: PathBuf,
        /// Detector config JSON; missing keys take defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Model JSON destination.
        #[arg(long)]
        out: PathBuf,
    },
    /// Mean |SHAP| per feature and region for a trained model.
    Explain {
        model: PathBuf,
        features: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_records(path: &Path) -> Result<Vec<DebateRecord>> {
    read_records(path).with_context(|| format!("invalid records in {}", path.display()))
}

fn load_features(path: &Path) -> Result<Vec<features::FeatureVector>> {
    features::parse_table(&read_text(path)?)
        .with_context(|| format!("invalid feature table {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => std::io::stdout().write_all(text.as_bytes()).context("cannot write to stdout"),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Evaluate { records, grid, seed, out } => {
            let records = load_records(&records)?;
            let report = pipeline::evaluate_corpus(&records, grid.options(), seed)?;
            let text = format!("{}\n{}", report.verdicts_csv(), report.consistency_csv());
            emit(out.as_deref(), &text)
        }
        Command::Render { record, grid, format, out } => {
            let mut records = load_records(&record)?;
            if records.len() != 1 {
                bail!("{} holds {} records; render takes exactly one", record.display(), records.len());
            }
            let record = records.remove(0);
            let options = grid.options();
            let built = build_grid(&record, options.topology, options.use_weights)?;
            let strengths = built.evaluate();
            emit(out.as_deref(), &render(format, &record, &built, &strengths))
        }
        Command::Features { records, grid, out } => {
            let records = load_records(&records)?;
            let vectors = pipeline::corpus_features(&records, grid.options())?;
            emit(out.as_deref(), &features::export_table(&vectors)?)
        }
        Command::Train { features, config, seed, out } => {
            let mut config = match config {
                Some(path) => serde_json::from_str::<DetectorConfig>(&read_text(&path)?)
                    .with_context(|| format!("invalid detector config {}", path.display()))?,
                None => DetectorConfig::default(),
            };
            if let Some(seed) = seed {
                config.seed = seed;
            }
            let vectors = load_features(&features)?;
            let outcome = pipeline::train_detector(&vectors, &config)?;
            emit(Some(&out), &outcome.model.to_json())?;
            eprintln!(
                "trained {} trees on {} rows; held-out AUROC {:.4} on {} rows",
                outcome.model.trees.len(),
                outcome.train_size,
                outcome.test_auroc,
                outcome.test_size
            );
            Ok(())
        }
        Command::Explain { model, features, seed, out } => {
            let model = DetectorModel::from_json(&read_text(&model)?)
                .with_context(|| format!("invalid model {}", model.display()))?;
            let vectors = load_features(&features)?;
            let seed = seed.unwrap_or(model.config.seed);
            let report = pipeline::explain(&model, &vectors, seed)?;
            eprintln!("attributions explain the raw margin (log-odds), not the probability");
            emit(out.as_deref(), &report.to_csv())
        }
    }
}

fn main() {
    if let Err(err) = run(Cli::parse()) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
