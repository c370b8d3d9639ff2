//! `critgraph`: sampling, exploration and verification runs from the shell.

mod commands;
mod overlay;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use critgraph_core::{ModelVariant, WeightSpec};
use serde::{Deserialize, Serialize};

/// Bad invocation: conflicting, missing or out-of-range flags.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

#[derive(Debug, Parser)]
#[command(
    name = "critgraph",
    version,
    about = "Near-critical rank-1 random graphs: sampling, exploration, verification"
)]
struct Cli {
    /// JSON object supplying defaults for the subcommand's flags; flags win.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a weight vector and a graph, write both to disk.
    Gen(GenArgs),
    /// Run the breadth-first walk on a sampled or loaded graph.
    Explore(ExploreArgs),
    /// Replicated sweep over f, p or c with event frequencies.
    Verify(VerifyArgs),
    /// Size-biased sampling studies.
    #[command(subcommand)]
    Sbs(SbsCommand),
    /// Print the closed-form predictions for one f.
    Predict(PredictArgs),
    /// Subcritical, critical and supercritical sweep of p = c / ell.
    Sweep(SweepArgs),
    /// Mean of the unclipped walk against the leading-order drift.
    Drift(DriftArgs),
}

#[derive(Debug, Subcommand)]
enum SbsCommand {
    /// Empirical mean of the l-th size-biased draw.
    MeanCurve(MeanCurveArgs),
    /// Exact check of the concentration and ordering inequalities.
    Conjecture(ConjectureArgs),
    /// Exact check that capped draws are stochastically decreasing.
    Monotone(MonotoneArgs),
}

/// Weight, edge-law and seed flags shared by the graph subcommands.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphFlags {
    /// Number of vertices (ignored for list and file weights).
    #[arg(long)]
    pub n: Option<usize>,
    /// pareto:SCALE,SHAPE | const:C | file:PATH | w1,w2,...
    #[arg(long)]
    pub weights: Option<WeightSpec>,
    /// Critical window parameter: p = (1 + f ell^{-1/3}) / ell.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "p")]
    pub f: Option<f64>,
    /// Edge parameter given directly.
    #[arg(long)]
    pub p: Option<f64>,
    /// poisson | chung-lu | bdml
    #[arg(long)]
    pub model: Option<ModelVariant>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Clip Chung-Lu probabilities above 1 instead of failing.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub graph: GraphFlags,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExploreArgs {
    /// Edge list (u,v,capacity) to explore instead of sampling one.
    #[arg(long)]
    pub graph_file: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub graph: GraphFlags,
    /// Also write (i / n^{2/3}, L_i / n^{1/3}) pairs.
    #[arg(long)]
    pub rescale: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub weights: Option<WeightSpec>,
    #[arg(long)]
    pub model: Option<ModelVariant>,
    /// Comma-separated f values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with_all = ["p_list", "c_list"])]
    #[serde(skip)]
    pub f_list: Option<Vec<f64>>,
    /// Comma-separated p values.
    #[arg(long, value_delimiter = ',', conflicts_with = "c_list")]
    #[serde(skip)]
    pub p_list: Option<Vec<f64>>,
    /// Comma-separated c values, p = c / ell.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip)]
    pub c_list: Option<Vec<f64>>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub eps_prime: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores); results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub surplus_constant: Option<f64>,
    #[arg(long)]
    pub small_factor: Option<f64>,
    #[arg(long)]
    pub excess_constant: Option<f64>,
    #[arg(long)]
    pub spot_check_rate: Option<f64>,
    /// Record per-replication wall-clock time in the rows file.
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    #[serde(skip)]
    pub lenient: bool,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeanCurveArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub weights: Option<WeightSpec>,
    /// Largest draw index (default n / 10).
    #[arg(long)]
    pub l_max: Option<usize>,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConjectureArgs {
    /// Vector length; without --weights or --trials the weights are 1..=n.
    #[arg(long)]
    pub n: Option<usize>,
    /// Explicit weight list.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    #[arg(long)]
    pub m_max: Option<usize>,
    /// Check this many random integer-valued vectors instead (needs --seed).
    #[arg(long)]
    pub trials: Option<usize>,
    /// Largest integer weight for --trials.
    #[arg(long)]
    pub max_weight: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonotoneArgs {
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    /// Cap to test; by default every weight value and each midpoint between them.
    #[arg(long)]
    pub cap: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub weights: Option<WeightSpec>,
    #[arg(long, allow_hyphen_values = true)]
    pub f: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub eps_prime: Option<f64>,
    /// Needed only for random weights.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub weights: Option<WeightSpec>,
    #[arg(long, value_delimiter = ',')]
    pub c_list: Option<Vec<f64>>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriftArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub weights: Option<WeightSpec>,
    #[arg(long)]
    pub model: Option<ModelVariant>,
    #[arg(long, allow_hyphen_values = true)]
    pub f: Option<f64>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Number of grid points for m.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = cli.config.as_deref();
    let result = match cli.command {
        Command::Gen(a) => commands::gen(a, config),
        Command::Explore(a) => commands::explore(a, config),
        Command::Verify(a) => commands::verify(a, config),
        Command::Sbs(SbsCommand::MeanCurve(a)) => commands::mean_curve(a, config),
        Command::Sbs(SbsCommand::Conjecture(a)) => commands::conjecture(a, config),
        Command::Sbs(SbsCommand::Monotone(a)) => commands::monotone(a, config),
        Command::Predict(a) => commands::predict(a, config),
        Command::Sweep(a) => commands::sweep(a, config),
        Command::Drift(a) => commands::drift(a, config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<Usage>().is_some() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
