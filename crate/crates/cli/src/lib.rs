//! Command-line front end: seeding, embedding, ranking and evaluation runs.
//!
//! Every subcommand is a pure function of its input files, flags and
//! `--seed`; rerunning one reproduces its outputs byte for byte.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand};

pub use commands::RANKED_FILE;

/// A flag or config value the run cannot use.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "one", version, about = "Outlier-aware attributed network embedding")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Worker threads for the numeric kernels.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,

    /// Global seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Read further `key = value` flags from a file (command-line flags win).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

/// Where to read a network from: a directory holding `edges.txt`,
/// `attributes.txt` and optionally `labels.txt`, or explicit files.
#[derive(Args, Debug, Clone)]
pub struct NetworkArgs {
    #[arg(long, value_name = "DIR")]
    pub input: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub edges: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub attributes: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub labels: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a labeled stochastic-block-model network.
    Synth(SynthArgs),
    /// Plant structural, attribute and combined outliers into a labeled network.
    Seed(SeedArgs),
    /// Fit embeddings and outlier scores.
    Embed(EmbedArgs),
    /// Rank nodes by their weighted outlier score.
    RankOutliers(RankArgs),
    /// Score an embedding and ranking against a seeded dataset.
    Evaluate(EvaluateArgs),
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 300)]
    pub nodes: usize,
    #[arg(long, default_value_t = 3)]
    pub classes: usize,
    #[arg(long, default_value_t = 0.05)]
    pub p_in: f64,
    #[arg(long, default_value_t = 0.005)]
    pub p_out: f64,
    #[arg(long, default_value_t = 300)]
    pub attrs: usize,
    /// Share of a node's keywords drawn from its own class block.
    #[arg(long, default_value_t = 0.9)]
    pub signal: f64,
    #[arg(long, default_value_t = 10)]
    pub nnz_min: usize,
    #[arg(long, default_value_t = 20)]
    pub nnz_max: usize,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SeedArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    /// Outliers to plant, as a fraction of the node count.
    #[arg(long, default_value_t = 0.05)]
    pub fraction: f64,
    /// Relative half-width of the planted-degree band.
    #[arg(long, default_value_t = 0.10)]
    pub band: f64,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    /// Embedding dimension; defaults to three times the number of classes.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 5)]
    pub iters: usize,
    /// Sum of every outlier-score vector.
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    /// Attribute-loss weight; calibrated from the initial losses if unset.
    #[arg(long, requires = "beta")]
    pub alpha: Option<f64>,
    /// Disagreement-loss weight; calibrated from the initial losses if unset.
    #[arg(long, requires = "alpha")]
    pub beta: Option<f64>,
    /// Lower bound on outlier scores.
    #[arg(long, default_value_t = 1e-8)]
    pub eps_o: f64,
    #[arg(long, default_value_t = one_core::numerics::DEFAULT_NMF_SWEEPS)]
    pub nmf_sweeps: usize,
    /// Stop once the relative loss change falls to this level.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Combination weights `w1,w2,w3` for the final outlier score.
    #[arg(long, value_name = "W1,W2,W3")]
    pub weights: Option<String>,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct RankArgs {
    /// Scores file written by `embed`.
    #[arg(long, value_name = "FILE")]
    pub scores: PathBuf,
    #[arg(long, value_name = "W1,W2,W3")]
    pub weights: Option<String>,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Seeded dataset directory (network files plus `truth.tsv`).
    #[arg(long, value_name = "DIR")]
    pub data: PathBuf,
    /// Directory holding `embedding.tsv` and `scores.tsv`.
    #[arg(long, value_name = "DIR")]
    pub result: PathBuf,
    /// Ground-truth file overriding `<data>/truth.tsv`.
    #[arg(long, value_name = "FILE")]
    pub truth: Option<PathBuf>,
    /// Training percentages as `start:stop:step`.
    #[arg(long, default_value = "10:50:10")]
    pub splits: String,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    /// Ranking prefixes in percent, comma separated.
    #[arg(long, default_value = "5,10,15,20,25")]
    pub l: String,
    /// Leave planted outliers out of classification and clustering.
    #[arg(long)]
    pub exclude_outliers: bool,
    /// Rank by `w1,w2,w3` instead of the combined score in `scores.tsv`.
    #[arg(long, value_name = "W1,W2,W3")]
    pub weights: Option<String>,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

/// Maps an error to the documented exit code: 1 for I/O and parse
/// failures, 2 for invalid configuration or inconsistent inputs, 3 for
/// numeric failures.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    use one_core::Error as E;
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return EXIT_CONFIG;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Io { .. } | E::Parse { .. } | E::Json(_) => EXIT_IO,
                E::Numeric(_) => EXIT_NUMERIC,
                E::Dimension(_) | E::Domain(_) | E::Consistency(_) | E::State(_) | E::Selection(_) => EXIT_CONFIG,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_IO;
        }
    }
    EXIT_IO
}

fn subcommand_names() -> Vec<String> {
    Cli::command().get_subcommands().map(|c| c.get_name().to_string()).collect()
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let names = subcommand_names();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let args = match config::expand(args, &names) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return exit_code(&e);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match commands::dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use anyhow::Context;

    #[test]
    fn exit_codes_follow_the_error_chain() {
        let numeric: anyhow::Result<()> = Err(one_core::Error::Numeric("NaN in G".into()).into());
        assert_eq!(exit_code(&numeric.context("fitting").unwrap_err()), EXIT_NUMERIC);
        let io = one_core::Error::Parse { path: "x".into(), line: 3, msg: "bad".into() };
        assert_eq!(exit_code(&io.into()), EXIT_IO);
        assert_eq!(exit_code(&anyhow::Error::new(ConfigError("k".into()))), EXIT_CONFIG);
        assert_eq!(exit_code(&one_core::Error::Consistency("names".into()).into()), EXIT_CONFIG);
    }
}
