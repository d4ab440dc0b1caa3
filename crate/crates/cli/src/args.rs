//! Command-line surface. Every struct here is also echoed into output
//! metadata, so fields are filled in with their resolved values before a run.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use compass_core::exact_backend::Recovery;
use compass_core::experiments::Metric;
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "compass", version, about = "Compass codes under coherent Z rotation")]
pub struct Cli {
    /// Worker threads; defaults to the number of available cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// JSON object of flag values, e.g. {"seed": 3, "distances": [3, 5]}.
    /// Flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate or check code files.
    #[command(subcommand)]
    Code(CodeCommand),
    /// Decode one X syndrome into a Z correction.
    Decode(DecodeArgs),
    /// Logical channel of a single code.
    #[command(subcommand)]
    Channel(ChannelCommand),
    /// Evaluate a family over angles and distances.
    Sweep(SweepArgs),
    /// Threshold estimates from a sweep table.
    Threshold(ThresholdArgs),
    /// Threshold estimates of random ensembles across X-cut densities.
    Interpolate(InterpolateArgs),
}

#[derive(Subcommand, Debug)]
pub enum CodeCommand {
    /// Write a coloring to a code file.
    Gen(CodeGenArgs),
    /// Run the structural checks on a code file.
    Validate(CodeValidateArgs),
}

#[derive(Subcommand, Debug)]
pub enum ChannelCommand {
    /// Full enumeration over all Z errors (at most 25 qubits).
    Exact(ChannelExactArgs),
    /// Closed-form channel of a named family.
    Analytic(ChannelAnalyticArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GenFamily {
    Zshor,
    Xshor,
    Rsc,
    Zstacked,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalyticFamily {
    Rep,
    Zshor,
    Xshor,
    Zstacked,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendArg {
    Analytic,
    Exact,
    Ensemble,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Serialize)]
pub struct CodeGenArgs {
    #[arg(long, value_enum)]
    pub family: GenFamily,
    /// Number of rows.
    #[arg(long)]
    pub dx: usize,
    /// Number of columns (odd).
    #[arg(long)]
    pub dz: usize,
    /// Block height (zstacked only).
    #[arg(long)]
    pub h: Option<usize>,
    /// Probability that a cell is X-cut (random only, default 0.5).
    #[arg(long)]
    pub q_shor: Option<f64>,
    /// Coloring seed (random only, default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct CodeValidateArgs {
    pub file: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct DecodeArgs {
    #[arg(long)]
    pub code: PathBuf,
    /// One character per X check, '1' for flagged.
    #[arg(long)]
    pub syndrome: String,
    /// Exhaustive search instead of matching (at most 20 qubits).
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct ChannelExactArgs {
    #[arg(long)]
    pub code: PathBuf,
    /// Rotation angle in units of π.
    #[arg(long, allow_negative_numbers = true)]
    pub theta_over_pi: f64,
    /// minweight or ml.
    #[arg(long, default_value = "minweight")]
    pub recovery: Recovery,
    /// Write the per-syndrome distribution as JSON.
    #[arg(long, value_name = "OUT")]
    pub dump_distribution: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ChannelAnalyticArgs {
    #[arg(long, value_enum)]
    pub family: AnalyticFamily,
    /// Length for rep and zstacked; square size for zshor and xshor.
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub dx: Option<usize>,
    #[arg(long)]
    pub dz: Option<usize>,
    /// Block height (zstacked only).
    #[arg(long)]
    pub h: Option<usize>,
    /// Rotation angle in units of π.
    #[arg(long, allow_negative_numbers = true)]
    pub theta_over_pi: f64,
    #[arg(long, default_value = "minweight")]
    pub recovery: Recovery,
}

#[derive(Args, Debug, Serialize)]
pub struct SweepArgs {
    /// rep, zshor, xshor, zstacked, rsc or random, optionally with @Q (random
    /// density) and +ml (likelihood-based recovery), e.g. random@0.5+ml.
    #[arg(long)]
    pub family: String,
    /// Angles in units of π: A:B:STEP or a comma list.
    #[arg(long)]
    pub thetas: String,
    /// Distances (number of columns), comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub distances: Vec<usize>,
    /// Defaults to ensemble for random, exact for rsc, analytic otherwise.
    #[arg(long, value_enum)]
    pub backend: Option<BackendArg>,
    /// Fixed number of rows (zshor, xshor); square codes when absent.
    #[arg(long)]
    pub dx: Option<usize>,
    /// Block height (zstacked only).
    #[arg(long)]
    pub h: Option<usize>,
    /// X-cut density (random only; same as family@Q).
    #[arg(long)]
    pub q_shor: Option<f64>,
    /// Codes per ensemble point (default 100).
    #[arg(long)]
    pub codes: Option<usize>,
    /// Shots per code and angle; 0 uses exact per-code channels (default 0).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Ensemble seed (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// minweight or ml (same as family+ml).
    #[arg(long)]
    pub recovery: Option<Recovery>,
    #[arg(long)]
    pub out: PathBuf,
    /// Output format; inferred from the file extension when absent.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug, Serialize)]
pub struct ThresholdArgs {
    /// Sweep table, CSV or JSON.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// r1 or diamond.
    #[arg(long, default_value = "r1")]
    pub metric: Metric,
    /// Also write the estimates to this JSON file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct InterpolateArgs {
    /// X-cut densities, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub q_shors: Vec<f64>,
    /// Square code distances, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub d: Vec<usize>,
    /// Angles in units of π: A:B:STEP or a comma list.
    #[arg(long, default_value = "0.02:0.5:0.02")]
    pub thetas: String,
    #[arg(long, default_value_t = 200)]
    pub codes: usize,
    /// Shots per code and angle; 0 uses exact per-code channels.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "minweight")]
    pub recovery: Recovery,
    #[arg(long, default_value = "r1")]
    pub metric: Metric,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}
