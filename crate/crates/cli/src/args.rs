//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "precision-atlas", version, about = "Outcome-count bounds and estimation metrics for collective quantum measurements")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Seed for sampling commands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Lift the default register-size guardrails.
    #[arg(long, global = true)]
    pub allow_large: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maximum number of distinct outcomes of a collective measurement.
    Bound(BoundArgs),
    /// Distinct-eigenvalue count of J² + εJz and whether it saturates the bound.
    Spectrum(SpectrumArgs),
    /// Commutant certificates for every joint (j, m) eigenspace.
    Irreducibility(IrreducibilityArgs),
    /// Precision, RMSE and mutual information of one estimation model.
    ModelMetrics(ModelMetricsArgs),
    /// Run the canonical Fourier protocol at a given phase.
    Protocol(ProtocolArgs),
    /// Closed forms against numerics for the SQL, QPEA and Q-Metrology strategies.
    Table2(Table2Args),
    /// Likelihood curves P_r(φ) for the single-shot, repeated and QPEA models.
    Fig1(Fig1Args),
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Number of particles.
    #[arg(long)]
    pub n: usize,
    /// Identical particles (symmetric subspace only).
    #[arg(long)]
    pub identical: bool,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Number of qubits.
    #[arg(long)]
    pub n: usize,
    /// Coefficient of Jz; defaults to 1/n.
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Args)]
pub struct IrreducibilityArgs {
    /// Number of qubits.
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelName {
    SingleShot,
    Binomial,
    Qpea,
    Deterministic,
    QmetrologyBatch,
}

#[derive(Debug, Args)]
pub struct ModelMetricsArgs {
    #[arg(long, value_enum)]
    pub model: ModelName,
    /// Repetitions (binomial), qubits (qpea), outcomes (deterministic) or ν (qmetrology-batch).
    #[arg(long)]
    pub size: Option<u64>,
    /// Parameter value for the RMSE; defaults to π − π/M for angular models and 0 otherwise.
    #[arg(long)]
    pub at: Option<f64>,
    /// Gauss–Legendre nodes per panel.
    #[arg(long, default_value_t = 64)]
    pub nodes: usize,
}

#[derive(Debug, Args)]
pub struct ProtocolArgs {
    /// Build on diag(0, 1, …, M−1).
    #[arg(long, conflicts_with = "spin_n", required_unless_present = "spin_n")]
    pub m: Option<usize>,
    /// Build on J² + Jz/n for this many qubits.
    #[arg(long)]
    pub spin_n: Option<usize>,
    /// True phase in [0, 2π).
    #[arg(long)]
    pub phi: f64,
    /// Draw this many seeded samples.
    #[arg(long)]
    pub shots: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaseArg {
    Natural,
    Decimal,
}

#[derive(Debug, Args)]
pub struct Table2Args {
    #[arg(long, default_value_t = 8)]
    pub qpea_qubits: u32,
    #[arg(long, default_value_t = 1024)]
    pub sql_n: u64,
    #[arg(long, default_value_t = 100)]
    pub nu: u64,
    /// Q-Metrology register size, a power of ten.
    #[arg(long, default_value_t = 10)]
    pub qm_n: u64,
    #[arg(long, default_value_t = 64)]
    pub nodes: usize,
    /// Logarithm base in the Q-Metrology outcome count N^{log(2ν+1)}.
    #[arg(long, value_enum, default_value_t = BaseArg::Natural)]
    pub log_base: BaseArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Panel {
    A,
    B,
    C,
}

#[derive(Debug, Args)]
pub struct Fig1Args {
    #[arg(long, value_enum)]
    pub panel: Panel,
    /// Repetitions for panel b.
    #[arg(long, default_value_t = 8)]
    pub n: u64,
    /// Qubits for panel c.
    #[arg(long, default_value_t = 3)]
    pub qubits: u32,
    /// Sample points over [0, 2π).
    #[arg(long, default_value_t = 201)]
    pub points: usize,
}
