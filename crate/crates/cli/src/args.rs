use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "s2s2", version, about = "Numerical verification of hypersurfaces in S²×S²")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the residual suite on random points of a family.
    #[command(allow_negative_numbers = true)]
    Verify(VerifyArgs),
    /// Tabulate curvature invariants over the family parameter.
    #[command(allow_negative_numbers = true)]
    Sweep(SweepArgs),
    /// Follow the parallel hypersurfaces of a family.
    #[command(allow_negative_numbers = true)]
    Flow(FlowArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    /// S¹(r)×S², parameter --r in (0,1]
    S1rxs2,
    /// ⟨p,q⟩ = t, parameter --t in (−1,1)
    Mt,
    /// ⟨p,a⟩ + ⟨q,b⟩ = 0
    Mab,
    /// ⟨p,a⟩² + ⟨q,b⟩² = 1
    Mhat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    #[arg(value_enum)]
    pub family: FamilyName,
    /// Level t of M_t.
    #[arg(long)]
    pub t: Option<f64>,
    /// Circle radius r of S¹(r)×S².
    #[arg(long)]
    pub r: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Include wall-clock runtime in the report.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Number of random chart points.
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Multiplies every tolerance.
    #[arg(long, default_value_t = 1.0)]
    pub tol_scale: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(value_enum)]
    pub family: FamilyName,
    /// First parameter value (default: -0.9 for mt, 0.1 for s1rxs2).
    #[arg(long)]
    pub from: Option<f64>,
    /// Last parameter value (default: 0.9 for mt, 1.0 for s1rxs2).
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, default_value_t = 0.4)]
    pub s_max: f64,
    /// Number of offsets in [0, s_max].
    #[arg(long, default_value_t = 5)]
    pub s_steps: usize,
    /// Points per offset used for the spatial statistics.
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}
