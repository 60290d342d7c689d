mod commands;
mod config;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Neyman–Pearson classification of tensor data.
#[derive(Parser)]
#[command(name = "tnp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run Monte-Carlo experiments and write detail/aggregate CSVs.
    Simulate(SimulateArgs),
    /// Draw a labeled dataset from a configured model.
    Gen(GenArgs),
    /// Fit a classifier on a dataset file.
    Fit(FitArgs),
    /// Score and label every sample of a dataset file.
    Predict(PredictArgs),
    /// Empirical type I/II error and accuracy of a model on a labeled dataset.
    Evaluate(EvaluateArgs),
    /// Check that an aggregate CSV is recomputable from its detail CSV.
    Verify(VerifyArgs),
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Run configuration (JSON).
    #[arg(required_unless_present = "example", conflicts_with = "example")]
    pub config: Option<PathBuf>,
    /// Built-in study: ex1, ex1-imbalanced, ex2, ex3 or exS1.
    #[arg(long)]
    pub example: Option<String>,
    /// `full` (500 reps) or `desk` (50 reps); overrides reps and test size.
    #[arg(long)]
    pub scale: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Args)]
pub struct GenArgs {
    /// Run configuration (JSON) describing a single experiment.
    pub config: PathBuf,
    /// Training dataset file; the true signal goes to `<output>.truth.json`.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Also write a test set of the configured test size.
    #[arg(long)]
    pub test_output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args)]
pub struct FitArgs {
    /// Training dataset file.
    pub data: PathBuf,
    /// T-LDA, T-LDA-NP, V-LDA, T-NN or T-NN-NP.
    #[arg(long)]
    pub method: String,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Tucker ranks for T-LDA, e.g. `4,6,3`.
    #[arg(long, value_delimiter = ',')]
    pub ranks: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// V-LDA ridge as a multiple of trace(S)/d.
    #[arg(long, default_value_t = 1e-3)]
    pub ridge: f64,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 64)]
    pub hidden: usize,
    #[arg(long, default_value_t = 32)]
    pub batch: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub rate: f64,
    /// Contraction sizes of the network, e.g. `8,8,8`.
    #[arg(long, value_delimiter = ',')]
    pub tcl_ranks: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1)]
    pub tcl_layers: usize,
    /// Model output file.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Args)]
pub struct PredictArgs {
    pub model: PathBuf,
    pub data: PathBuf,
    /// CSV output file.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Args)]
pub struct EvaluateArgs {
    pub model: PathBuf,
    pub data: PathBuf,
}

#[derive(Args)]
pub struct VerifyArgs {
    pub detail: PathBuf,
    pub aggregate: PathBuf,
    /// Level used for the violation rate column.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Gen(a) => commands::gen(&a),
        Command::Fit(a) => commands::fit(&a),
        Command::Predict(a) => commands::predict(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Verify(a) => commands::verify(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
