//! Command-line front end: data synthesis, training of every experiment
//! variant, distance tables, threshold evaluation and sample generation.

pub mod commands;
mod config;
pub mod experiment;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{cmd_distances, cmd_evaluate, cmd_generate, cmd_synth, cmd_train};
pub use config::{DatasetSource, RunConfig, MANIFEST_FILE};
pub use experiment::Variant;

use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "stgan-nd", version, about = "Stochastic-target GAN training and novelty detection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic feature data set to `<out>/dataset.csv`.
    Synth(SynthArgs),
    /// Train one or more variants and write networks, loss history and a manifest.
    Train(TrainArgs),
    /// Per-class baseline / generated / random distance table.
    Distances(DistancesArgs),
    /// Accuracy at tau = 0 and at tuned thresholds, ROC curve and AUC.
    Evaluate(EvaluateArgs),
    /// Samples from a trained generator in original feature units.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// Top-level seed; falls back to STGAN_ND_SEED, then 0.
    #[arg(long, env = "STGAN_ND_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// `classes,samples_per_class,features`.
    #[arg(long, value_parser = parse_shape, default_value = "8,110,16")]
    pub synth_spec: (usize, usize, usize),
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    DualMyo,
    Uc2017,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Feature CSV (`ch0,...,label`) or raw-sample manifest (`path,label`).
    #[arg(long, conflicts_with = "synth_spec")]
    pub dataset: Option<PathBuf>,
    /// Use only these channels of raw samples.
    #[arg(long, value_delimiter = ',')]
    pub channels: Option<Vec<usize>>,
    /// Train on a synthetic data set of this shape instead of a file.
    #[arg(long, value_parser = parse_shape)]
    pub synth_spec: Option<(usize, usize, usize)>,
    /// Seed of the synthetic data set (independent of `--seed`).
    #[arg(long, default_value_t = 0)]
    pub synth_seed: u64,
    /// Original class labels held out as novel.
    #[arg(long, value_delimiter = ',')]
    pub novel_classes: Option<Vec<usize>>,
    #[command(flatten)]
    pub seed: SeedArg,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Replay a previous run; data and training flags are then ignored.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub data: DataArgs,
    /// One or more variants; several variants go to `<out>/<variant>/`.
    #[arg(long, value_delimiter = ',', default_value = "test_2")]
    pub variant: Vec<Variant>,
    #[arg(long, value_enum, default_value = "dual-myo")]
    pub preset: Preset,
    /// GAN epochs (plain classifiers stop early instead).
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Target GCA values recorded for later evaluation.
    #[arg(long, value_delimiter = ',', default_value = "0.95,0.9")]
    pub target_gca: Vec<f64>,
    /// Variants trained in parallel.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DistancesArgs {
    /// Run directory from `train`; without it the data flags are used and
    /// the GAN column is omitted.
    #[arg(long)]
    pub run: Option<PathBuf>,
    #[command(flatten)]
    pub data: DataArgs,
    /// Generated and random samples per class (default: class size).
    #[arg(long)]
    pub n: Option<usize>,
    /// Defaults to the run directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub run: PathBuf,
    /// Overrides the targets stored in the manifest.
    #[arg(long, value_delimiter = ',')]
    pub target_gca: Option<Vec<f64>>,
    /// Defaults to the run directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub run: PathBuf,
    /// Original label of a trained class.
    #[arg(long, conflicts_with = "target", required_unless_present = "target")]
    pub class: Option<usize>,
    /// Raw class-likelihood vector over the trained classes.
    #[arg(long, value_delimiter = ',')]
    pub target: Option<Vec<f64>>,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Noise seed; defaults to the run seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Defaults to the run directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_shape(s: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected classes,samples,features, got {s:?}"));
    }
    let num = |p: &str| p.parse::<usize>().map_err(|e| format!("{p:?}: {e}"));
    Ok((num(parts[0])?, num(parts[1])?, num(parts[2])?))
}

/// Parse arguments, run the command and return the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Train(a) => cmd_train(a),
        Command::Distances(a) => cmd_distances(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Generate(a) => cmd_generate(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Numeric(_) => EXIT_NUMERIC,
                _ => EXIT_VALIDATION,
            }
        }
    }
}
