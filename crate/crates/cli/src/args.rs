use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "scm-ici",
    version,
    about = "Association, intervention and individual causal queries over structural causal models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Worker threads for sampling. Output does not depend on this value.
    #[arg(long, env = "SCM_ICI_WORKERS", default_value_t = 1, global = true)]
    pub workers: usize,

    /// Print progress to stderr (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a model.
    Validate(ModelArg),
    /// Draw forward samples, one assignment per line.
    Sample {
        #[command(flatten)]
        model: ModelArg,
        /// Number of samples.
        #[arg(short = 'n', default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate a query.
    #[command(subcommand)]
    Query(QueryCommand),
    /// Individual causal effect of `--do1` against `--do2`.
    Ice(IceArgs),
}

#[derive(Debug, Subcommand)]
pub enum QueryCommand {
    /// P(Y | Z).
    Assoc(AssocArgs),
    /// P(Y | do(X), Z).
    Do(DoArgs),
    /// P(Y | indiv(W), do(X), Z).
    Indiv(IndivArgs),
}

#[derive(Debug, Args)]
pub struct ModelArg {
    /// Model file, or `-` for stdin.
    pub model: PathBuf,
}

#[derive(Debug, Args)]
pub struct Targets {
    /// Target variables, comma separated.
    #[arg(long = "target", required = true, value_delimiter = ',')]
    pub targets: Vec<String>,
}

#[derive(Debug, Args)]
pub struct EvidenceArgs {
    /// Evidence as NAME=VALUE[,NAME=VALUE]*.
    #[arg(long, value_parser = parse_pairs)]
    pub evidence: Vec<Pairs>,
    /// Matching window for continuous evidence.
    #[arg(long, default_value_t = scm_ici::inference::DEFAULT_EVIDENCE_WINDOW)]
    pub evidence_window: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineKind {
    Exact,
    Mc,
    Auto,
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    #[arg(long, value_enum, default_value_t = EngineKind::Auto)]
    pub engine: EngineKind,
    /// Monte Carlo sample count.
    #[arg(short = 'n', default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Include raw samples in empirical results.
    #[arg(long)]
    pub samples: bool,
}

#[derive(Debug, Args)]
pub struct AssocArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[command(flatten)]
    pub targets: Targets,
    #[command(flatten)]
    pub evidence: EvidenceArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Args)]
pub struct DoArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[command(flatten)]
    pub targets: Targets,
    /// Intervention as NAME=VALUE[,NAME=VALUE]*.
    #[arg(long = "do", value_parser = parse_pairs, required = true)]
    pub intervention: Vec<Pairs>,
    #[command(flatten)]
    pub evidence: EvidenceArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodKind {
    Exact,
    Update,
    Rejection,
    Mcmc,
}

#[derive(Debug, Args)]
pub struct AbductionArgs {
    /// Individual facts as NAME=VALUE[,NAME=VALUE]*.
    #[arg(long, value_parser = parse_pairs, required = true)]
    pub facts: Vec<Pairs>,
    #[arg(long, value_enum, default_value_t = MethodKind::Exact)]
    pub method: MethodKind,
    /// Posterior sample count (rejection, mcmc).
    #[arg(short = 'n', default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rejection window for continuous facts; default is 1% of each
    /// variable's prior-predictive standard deviation.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Maximum prior proposals for rejection sampling.
    #[arg(long, default_value_t = scm_ici::abduction::DEFAULT_MAX_PROPOSALS)]
    pub max_proposals: usize,
    /// MCMC kernel bandwidth; defaults like `--epsilon`.
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// MCMC burn-in iterations per chain; default 10% of `-n`.
    #[arg(long)]
    pub burnin: Option<usize>,
    /// Keep every k-th MCMC iteration.
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    /// MCMC random-walk step in prior standard deviations.
    #[arg(long, default_value_t = scm_ici::abduction::DEFAULT_PROPOSAL_SCALE)]
    pub proposal_scale: f64,
    /// Update baseline per noise as NAME=VALUE; unset noises use their
    /// prior mean.
    #[arg(long, value_parser = parse_pairs)]
    pub baseline: Vec<Pairs>,
    /// Update distance weights per noise as NAME=VALUE; default 1.
    #[arg(long, value_parser = parse_pairs)]
    pub weights: Vec<Pairs>,
    /// Include raw samples in empirical results.
    #[arg(long)]
    pub samples: bool,
}

#[derive(Debug, Args)]
pub struct IndivArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[command(flatten)]
    pub targets: Targets,
    /// Intervention as NAME=VALUE[,NAME=VALUE]*.
    #[arg(long = "do", value_parser = parse_pairs)]
    pub intervention: Vec<Pairs>,
    #[command(flatten)]
    pub evidence: EvidenceArgs,
    #[command(flatten)]
    pub abduction: AbductionArgs,
}

#[derive(Debug, Args)]
pub struct IceArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[command(flatten)]
    pub targets: Targets,
    /// First intervention.
    #[arg(long, value_parser = parse_pairs, required = true)]
    pub do1: Vec<Pairs>,
    /// Second intervention.
    #[arg(long, value_parser = parse_pairs, required = true)]
    pub do2: Vec<Pairs>,
    #[command(flatten)]
    pub abduction: AbductionArgs,
}

/// Parsed `NAME=VALUE` list.
pub type Pairs = Vec<(String, f64)>;

/// Parse `NAME=VALUE[,NAME=VALUE]*` with finite decimal values.
pub fn parse_pairs(s: &str) -> Result<Pairs, String> {
    s.split(',')
        .map(|item| {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| format!("expected NAME=VALUE, got `{item}`"))?;
            let name = name.trim();
            if name.is_empty() {
                return Err(format!("missing name in `{item}`"));
            }
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| format!("`{}` is not a number", value.trim()))?;
            if !v.is_finite() {
                return Err(format!("`{}` is not finite", value.trim()));
            }
            Ok((name.to_string(), v))
        })
        .collect()
}
