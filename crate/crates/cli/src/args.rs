use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "cpcsc", version, about = "Primal-dual convolutional sparse coding and dictionary learning")]
pub struct Cli {
    /// Seed for every randomized step (initial dictionaries, power iteration).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// JSON file of settings; keys are flag names, explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Suppress progress and summary output.
    #[arg(long, global = true)]
    pub quiet: bool,

    /// Print the effective settings as JSON and exit without running.
    #[arg(long, global = true)]
    pub print_config: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sparse-code one image over a dictionary.
    Csc(CscArgs),
    /// Denoise an image by coding its highpass part.
    Denoise(DenoiseArgs),
    /// Learn a dictionary from training images.
    Train(TrainArgs),
    /// Compare two images (PSNR, SSIM).
    Eval(EvalArgs),
    /// Describe a dictionary file.
    DictInfo(DictInfoArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Csc(_) => "csc",
            Command::Denoise(_) => "denoise",
            Command::Train(_) => "train",
            Command::Eval(_) => "eval",
            Command::DictInfo(_) => "dict-info",
        }
    }
}

/// Solver knobs shared by the coding commands.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SolverArgs {
    /// Relative primal-change tolerance for early stopping (0 disables).
    #[arg(long, allow_negative_numbers = true)]
    pub rel_tol: Option<f64>,

    /// Spectral-norm power iteration tolerance.
    #[arg(long, allow_negative_numbers = true)]
    pub norm_tol: Option<f64>,

    #[arg(long)]
    pub norm_max_iters: Option<usize>,

    /// Multiplies the step sizes; above 1 the iteration may diverge.
    #[arg(long, hide = true, allow_negative_numbers = true)]
    pub step_scale: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct CscArgs {
    #[arg(long, value_name = "PGM")]
    pub image: Option<PathBuf>,

    #[arg(long, value_name = "FILE")]
    pub dict: Option<PathBuf>,

    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,

    #[arg(long)]
    pub iters: Option<usize>,

    /// Horizontal TV weight; giving either TV weight selects the TV solver.
    #[arg(long, allow_negative_numbers = true)]
    pub beta1: Option<f64>,

    /// Vertical TV weight.
    #[arg(long, allow_negative_numbers = true)]
    pub beta2: Option<f64>,

    /// CSV trace output.
    #[arg(long, value_name = "CSV")]
    pub trace: Option<PathBuf>,

    /// Binary coefficient-map output.
    #[arg(long, value_name = "FILE")]
    pub out_codes: Option<PathBuf>,

    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct DenoiseArgs {
    #[arg(long, value_name = "PGM")]
    pub image: Option<PathBuf>,

    #[arg(long, value_name = "FILE")]
    pub dict: Option<PathBuf>,

    /// `csc` or `csc_atv`.
    #[arg(long)]
    pub method: Option<String>,

    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,

    #[arg(long, allow_negative_numbers = true)]
    pub beta1: Option<f64>,

    #[arg(long, allow_negative_numbers = true)]
    pub beta2: Option<f64>,

    #[arg(long)]
    pub iters: Option<usize>,

    /// Clean reference; adds PSNR/SSIM columns to the trace.
    #[arg(long = "ref", value_name = "PGM")]
    #[serde(rename = "ref")]
    pub reference: Option<PathBuf>,

    /// Restored image output.
    #[arg(long, value_name = "PGM")]
    pub out: Option<PathBuf>,

    #[arg(long, value_name = "CSV")]
    pub trace: Option<PathBuf>,

    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct TrainArgs {
    /// Directory of PGM files, or a comma-separated list of files.
    #[arg(long, value_name = "DIR|LIST")]
    pub images: Option<String>,

    /// Number of filters.
    #[arg(long)]
    pub m: Option<usize>,

    #[arg(long)]
    pub filter_size: Option<usize>,

    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,

    #[arg(long)]
    pub outer_iters: Option<usize>,

    #[arg(long)]
    pub inner_csc: Option<usize>,

    #[arg(long)]
    pub inner_dict: Option<usize>,

    /// Restart both inner phases every outer iteration instead of resuming them.
    #[arg(long)]
    #[serde(default)]
    pub cold_start: bool,

    #[arg(long, value_name = "FILE")]
    pub out_dict: Option<PathBuf>,

    #[arg(long, value_name = "CSV")]
    pub trace: Option<PathBuf>,

    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct EvalArgs {
    #[arg(long, value_name = "PGM")]
    pub a: Option<PathBuf>,

    #[arg(long, value_name = "PGM")]
    pub b: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct DictInfoArgs {
    #[arg(long, value_name = "FILE")]
    pub dict: Option<PathBuf>,
}
