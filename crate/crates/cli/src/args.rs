use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "asymclone", version, about = "Optimal asymmetric quantum cloning: fidelities, trade-offs, economy")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Optimal fidelity and per-clone fidelities of one task.
    Solve(SolveArgs),
    /// Per-clone fidelities over a grid of weights.
    Sweep(SweepArgs),
    /// Whether the optimal cloner runs without an ancilla.
    Economy(EconomyArgs),
    /// Run a named invariant suite on seeded random samples.
    Verify(VerifyArgs),
    /// Γ of a φ-independent qubit input distribution.
    Gamma(DistArgs),
    /// Check normalization and phase covariance of a distribution.
    ValidateDist(DistArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaskKind {
    Universal,
    StateDependent,
    Equatorial,
    ManyToN,
    Chsh,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodArg {
    /// Dense when `R` fits, blocked otherwise (subspace for sweeps).
    Auto,
    Dense,
    Blocked,
    Subspace,
    ClosedForm,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistFormat {
    Text,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    /// Singlet monogamy slack of Haar-random states is nonnegative.
    Monogamy,
    /// Optimal universal cloners saturate singlet monogamy.
    Frontier,
    /// Dense, blocked and subspace routes agree.
    Methods,
    /// CHSH eigenvalue formula against dense diagonalization.
    Chsh,
    /// Optimal (N−1) → N cloners saturate the fidelity trade-off.
    Tradeoff,
}

#[derive(Args, Debug, Clone, Default)]
pub struct TaskArgs {
    #[arg(long, value_enum, required_unless_present = "task_file")]
    pub task: Option<TaskKind>,
    /// Qudit dimension (universal).
    #[arg(long)]
    pub d: Option<usize>,
    /// Number of clones.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of input copies (many-to-n).
    #[arg(long)]
    pub m: Option<usize>,
    /// Concentration parameter Γ ∈ [0, 1/4] (state-dependent).
    #[arg(long, conflicts_with = "dist")]
    pub gamma: Option<f64>,
    /// `preset:NAME` or a JSON distribution file, to derive Γ.
    #[arg(long)]
    pub dist: Option<String>,
    /// Comma-separated clone weights; renormalized when within 1e-9 of unit sum.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha: Option<Vec<f64>>,
    /// JSON task block, as emitted under "task".
    #[arg(long, conflicts_with_all = ["task", "d", "n", "m", "gamma", "dist", "alpha"])]
    pub task_file: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(long = "out", value_enum, default_value = "json")]
    pub format: Format,
    /// Decimal places for computed values.
    #[arg(long, default_value_t = 12)]
    pub precision: usize,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub task: TaskArgs,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub task: TaskArgs,
    /// Grid size: evenly spaced α₁ for two clones, Dirichlet samples
    /// (plus vertices and centroid) for more.
    #[arg(long, default_value_t = 11)]
    pub grid: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct EconomyArgs {
    #[command(flatten)]
    pub task: TaskArgs,
    /// Seed of the top-eigenspace search.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 12)]
    pub precision: usize,
}

#[derive(Args, Debug)]
pub struct DistArgs {
    #[arg(long)]
    pub dist: String,
    #[arg(long = "out", value_enum, default_value = "text")]
    pub format: DistFormat,
    #[arg(long, default_value_t = 12)]
    pub precision: usize,
}
