//! `amdahl`: generate, fit, validate, apply and explore multi-resource
//! Amdahl performance models from the command line.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "amdahl",
    version,
    about = "Multi-resource Amdahl's-law performance models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset from a known ground truth.
    Synth(SynthArgs),
    /// Fit a model to a dataset and write it as JSON.
    Fit(FitArgs),
    /// Five-fold cross-validation of a model spec on a dataset.
    Cv(CvArgs),
    /// Predict scores for configurations with a fitted model.
    Predict(PredictArgs),
    /// Search a configuration grid for the cheapest designs meeting a target.
    Explore(ExploreArgs),
    /// Combine cross-validation reports into one accuracy table.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    /// Independent uniform draws per resource.
    Random,
    /// Every grid point (ignores --n).
    Grid,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Range table JSON; defaults to the built-in four-resource Xeon table.
    #[arg(long)]
    ranges: Option<PathBuf>,
    /// Ground-truth JSON; defaults to the built-in five-fraction fixture.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Number of configurations to draw.
    #[arg(long, default_value_t = 58)]
    n: usize,
    /// Seed for configuration sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative noise level; 0 gives exact scores.
    #[arg(long, default_value_t = 0.02)]
    sigma: f64,
    /// Seed for the noise draws; defaults to --seed.
    #[arg(long)]
    noise_seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Mode::Random)]
    mode: Mode,
    /// Directory receiving dataset.csv, truth.json and ranges.json.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct DataSpecArgs {
    /// Dataset CSV: resource columns followed by `score`.
    #[arg(long)]
    data: PathBuf,
    /// Model spec JSON.
    #[arg(long)]
    spec: PathBuf,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    input: DataSpecArgs,
    /// Where to write the fitted model.
    #[arg(long)]
    out: PathBuf,
    /// Optional JSON file for the fit diagnostics.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
    /// Solve on raw feature columns instead of z-scored ones.
    #[arg(long)]
    no_normalize: bool,
}

#[derive(Debug, Args)]
struct CvArgs {
    #[command(flatten)]
    input: DataSpecArgs,
    /// Seed for the fold shuffle.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Name used in reports; defaults to the dataset file stem.
    #[arg(long)]
    label: Option<String>,
    /// Directory receiving cv_report.json and cv_summary.csv.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Fitted model JSON.
    #[arg(long)]
    model: PathBuf,
    /// One configuration as repeated name=value pairs.
    #[arg(long = "set", value_name = "NAME=VALUE", value_parser = output::parse_pair, conflicts_with = "configs")]
    set: Vec<(String, f64)>,
    /// CSV of configurations with one column per model resource.
    #[arg(long)]
    configs: Option<PathBuf>,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExploreArgs {
    /// Fitted model JSON.
    #[arg(long)]
    model: PathBuf,
    /// Range table JSON covering every model resource.
    #[arg(long)]
    ranges: PathBuf,
    /// Minimum acceptable predicted score.
    #[arg(long)]
    target: f64,
    /// Per-unit cost of a resource, repeated as name=weight.
    #[arg(long = "cost", value_name = "NAME=WEIGHT", value_parser = output::parse_pair)]
    cost: Vec<(String, f64)>,
    /// Fixed cost added to every configuration.
    #[arg(long, default_value_t = 0.0)]
    cost_offset: f64,
    /// Number of cheapest feasible configurations to keep.
    #[arg(long, default_value_t = 100)]
    limit: usize,
    /// Refuse grids with more points than this.
    #[arg(long, default_value_t = amdahl_core::ranges::DEFAULT_GRID_CAP)]
    cap: usize,
    /// Directory receiving explore.csv, explore.json and frontier.csv.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Cross-validation report JSON files.
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Fit(a) => commands::fit(a),
        Command::Cv(a) => commands::cv(a),
        Command::Predict(a) => commands::predict(a),
        Command::Explore(a) => commands::explore(a),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
