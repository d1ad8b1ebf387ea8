use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "innerfn", version, about = "Meromorphic inner functions with a prescribed real spectrum")]
pub struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a separated sequence from a family.
    Generate(GenerateArgs),
    /// Classify the gap regime of a sequence.
    Classify(ClassifyArgs),
    /// Build an inner-function model from a sequence.
    Build(BuildArgs),
    /// Evaluate Θ and |Θ'| on a real grid (CSV).
    Eval(EvalArgs),
    /// Supremum of |Θ'| over a real window.
    Sup(SupArgs),
    /// Zeros of Θ in the upper half-plane.
    Zeros(ZerosArgs),
    /// Cluster-then-gap sweep over N (CSV).
    Counterexample(CounterexampleArgs),
    /// Regularity functional of a sequence.
    Regularity(RegularityArgs),
    /// Discrepancy report of a measure.
    Discrepancy(DiscrepancyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FamilyName {
    Arithmetic,
    Power,
    Geometric,
    DoubleExponential,
    LogGap,
    ClusterGap,
    RegularPunctured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Unit,
    Gap,
    Custom,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub family: FamilyName,
    /// Index window `lo:hi` (values for regular-punctured).
    #[arg(long, allow_hyphen_values = true)]
    pub window: String,
    /// Exponent of the power family.
    #[arg(long)]
    pub k: Option<f64>,
    /// Ratio of the geometric family.
    #[arg(long)]
    pub r: Option<f64>,
    /// First point of the log-gap family.
    #[arg(long, default_value_t = 10.0)]
    pub a1: f64,
    /// Gap multiplier of the log-gap family.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t1: f64,
    /// Cluster size of the cluster-gap family.
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Cluster spacing of the cluster-gap family.
    #[arg(long = "D")]
    pub d: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Sequence JSON, or CSV with one value per line.
    #[arg(long)]
    pub sequence: PathBuf,
    #[arg(long)]
    pub min_points: Option<usize>,
    /// Smallest cluster size that counts as the counterexample pattern.
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Cluster spacing scale (median gap when absent).
    #[arg(long = "D")]
    pub d: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TolArgs {
    /// Relative tolerance for transform tails (default from MIF_REL_TOLERANCE or 1e-9).
    #[arg(long)]
    pub rel_tolerance: Option<f64>,
    #[arg(long)]
    pub exclusion_radius: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub sequence: PathBuf,
    #[arg(long, value_enum, default_value = "gap")]
    pub strategy: Strategy,
    /// Weights for the custom strategy (one per line).
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    pub exp_factor: f64,
    /// Build through the Krein shift instead of explicit weights.
    #[arg(long)]
    pub krein: bool,
    /// Index window for --krein (default: the whole sequence).
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    /// Krein constant.
    #[arg(long = "c", default_value_t = 0.0, allow_hyphen_values = true)]
    pub krein_c: f64,
    #[command(flatten)]
    pub tol: TolArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Closed grid `lo:hi:step`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    #[command(flatten)]
    pub tol: TolArgs,
}

#[derive(Debug, Args)]
pub struct SupArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Real window `lo:hi`.
    #[arg(long, allow_hyphen_values = true)]
    pub window: String,
    /// Omit the sampled profile from the report.
    #[arg(long)]
    pub no_profile: bool,
}

#[derive(Debug, Args)]
pub struct ZerosArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Rectangle `x0:x1:y0:y1` for the contour method (all zeros when absent).
    #[arg(long, allow_hyphen_values = true)]
    pub region: Option<String>,
}

#[derive(Debug, Args)]
pub struct CounterexampleArgs {
    /// Comma-separated cluster sizes.
    #[arg(long = "N", value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long = "D", default_value_t = 1.0)]
    pub d: f64,
    #[arg(long, value_enum, default_value = "unit")]
    pub strategy: Strategy,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t1: f64,
}

#[derive(Debug, Args)]
pub struct RegularityArgs {
    /// Sequence JSON or CSV; omit together with --punctured.
    #[arg(long, required_unless_present = "punctured")]
    pub sequence: Option<PathBuf>,
    /// Use the run-encoded ℕ∖A set instead of a point file.
    #[arg(long, conflicts_with = "sequence")]
    pub punctured: bool,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    /// Real window `lo:hi`.
    #[arg(long, allow_hyphen_values = true)]
    pub window: String,
}

#[derive(Debug, Args)]
pub struct DiscrepancyArgs {
    /// Model JSON or measure JSON.
    #[arg(long)]
    pub measure: PathBuf,
}
