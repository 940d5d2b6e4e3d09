use std::path::PathBuf;

use bookmaker::confidence::{Hypothesis, SseRule};
use bookmaker::montecarlo::{CellDistribution, MarginDistribution};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "bookmaker",
    version,
    about = "Chance-corrected evaluation of classifiers from contingency tables"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Informedness, markedness and related measures for one table.
    Evaluate(EvaluateArgs),
    /// Chi-squared, G² and Fisher tests for one table.
    Significance(SignificanceArgs),
    /// Confidence intervals for informedness.
    Confidence(ConfidenceArgs),
    /// Compares two systems by their confidence intervals.
    Compare(CompareArgs),
    /// Monte Carlo grid over informedness levels, written as CSV.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Two-column file of (predicted, actual) labels.
    #[arg(long, value_name = "FILE", conflicts_with = "table")]
    pub pairs: Option<PathBuf>,
    /// K×K table of counts, rows predicted and columns real.
    #[arg(long, value_name = "FILE")]
    pub table: Option<PathBuf>,
    /// Label order, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub labels: Option<Vec<String>>,
    /// Add one observation to empty rows and columns instead of failing.
    #[arg(long)]
    pub repair_margins: bool,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Show rates as percentages with two decimals in text output.
    #[arg(long)]
    pub percent: bool,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["pairs", "table"])))]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Report information measures in bits instead of nats.
    #[arg(long)]
    pub bits: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    All,
    Kb,
    Km,
    Kbm,
    X,
    Conv,
    Full,
    Fisher,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["pairs", "table"])))]
pub struct SignificanceArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, value_enum, default_value_t = Family::All)]
    pub family: Family,
    /// Continuity correction for the 2×2 positive-class chi-squared tests.
    #[arg(long)]
    pub yates: bool,
    /// Williams correction for G² statistics.
    #[arg(long)]
    pub williams: bool,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Samples for the Monte Carlo Fisher test on tables larger than 2×2.
    #[arg(long, default_value_t = 100_000)]
    pub fisher_samples: u64,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    All,
    Null,
    Empirical,
    Full,
}

impl VariantArg {
    pub fn hypotheses(self) -> Vec<Hypothesis> {
        match self {
            VariantArg::All => vec![Hypothesis::Null, Hypothesis::Empirical, Hypothesis::Full],
            VariantArg::Null => vec![Hypothesis::Null],
            VariantArg::Empirical => vec![Hypothesis::Empirical],
            VariantArg::Full => vec![Hypothesis::Full],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    ConstantOne,
    OneMinusAbsB,
    WeightedArithmetic,
    Geometric,
    Harmonic,
}

impl From<RuleArg> for SseRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::ConstantOne => SseRule::ConstantOne,
            RuleArg::OneMinusAbsB => SseRule::OneMinusAbsB,
            RuleArg::WeightedArithmetic => SseRule::WeightedArithmetic,
            RuleArg::Geometric => SseRule::Geometric,
            RuleArg::Harmonic => SseRule::Harmonic,
        }
    }
}

#[derive(Debug, Args)]
pub struct MultiplierArgs {
    /// Normal multiplier X.
    #[arg(long, conflicts_with = "alpha")]
    pub x: Option<f64>,
    /// Significance level used to derive X.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Derive X from a one-tailed level.
    #[arg(long, requires = "alpha")]
    pub one_tailed: bool,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["pairs", "table", "b"])))]
pub struct ConfidenceArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Observed informedness, used instead of a table.
    #[arg(long, allow_hyphen_values = true, requires = "n", conflicts_with_all = ["pairs", "table"])]
    pub b: Option<f64>,
    #[arg(long)]
    pub n: Option<u64>,
    /// Evenness factor for --b.
    #[arg(long, default_value_t = 1.0, requires = "b")]
    pub e: f64,
    #[command(flatten)]
    pub multiplier: MultiplierArgs,
    #[arg(long, value_enum, default_value_t = VariantArg::All)]
    pub variant: VariantArg,
    /// Override the standard error profile of every variant.
    #[arg(long, value_enum)]
    pub rule: Option<RuleArg>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("a_source").required(true).args(["a_table", "a"])))]
#[command(group(ArgGroup::new("b_source").required(true).args(["b_table", "b"])))]
pub struct CompareArgs {
    #[arg(long, value_name = "FILE")]
    pub a_table: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub b_table: Option<PathBuf>,
    /// System A as B,N,E.
    #[arg(long, value_name = "B,N,E", allow_hyphen_values = true)]
    pub a: Option<String>,
    /// System B as B,N,E.
    #[arg(long, value_name = "B,N,E", allow_hyphen_values = true)]
    pub b: Option<String>,
    #[arg(long)]
    pub repair_margins: bool,
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(flatten)]
    pub multiplier: MultiplierArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CellDistArg {
    AbsoluteShiftedNormal,
    Binomial,
    Uniform,
}

impl From<CellDistArg> for CellDistribution {
    fn from(d: CellDistArg) -> Self {
        match d {
            CellDistArg::AbsoluteShiftedNormal => CellDistribution::AbsoluteShiftedNormal,
            CellDistArg::Binomial => CellDistribution::BinomialCopula,
            CellDistArg::Uniform => CellDistribution::Uniform,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MarginDistArg {
    Binomial,
    Uniform,
}

impl From<MarginDistArg> for MarginDistribution {
    fn from(d: MarginDistArg) -> Self {
        match d {
            MarginDistArg::Binomial => MarginDistribution::Binomial,
            MarginDistArg::Uniform => MarginDistribution::Uniform,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    #[arg(long, default_value_t = 128)]
    pub n: u64,
    #[arg(long, default_value_t = 11)]
    pub steps: usize,
    /// Runs per step.
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Distribution of the chance cells.
    #[arg(long, value_enum, default_value_t = CellDistArg::AbsoluteShiftedNormal)]
    pub dist: CellDistArg,
    /// Distribution of the chance margins.
    #[arg(long, value_enum, default_value_t = MarginDistArg::Binomial)]
    pub margin_dist: MarginDistArg,
    #[arg(long, default_value_t = 1.96)]
    pub x: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Samples for the Monte Carlo Fisher test; 0 skips it.
    #[arg(long, default_value_t = 2000)]
    pub fisher_samples: u64,
    /// Keep real-valued cells before the final constraint step.
    #[arg(long)]
    pub no_integer: bool,
    /// Directory for runs.csv and summary.csv.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}
