//! Command-line interface definition.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "trapctl",
    version,
    about = "Design, simulate, and verify scale-invariant trap-control protocols"
)]
pub struct Cli {
    /// Reference trap frequency ω₀ (sets all units).
    #[arg(long, global = true, default_value_t = 1.0)]
    pub omega0: f64,

    /// Relative integrator tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,

    /// Seed for Monte Carlo verification.
    #[arg(long, global = true, default_value_t = 7_654_321)]
    pub seed: u64,

    /// Output root; files with relative paths land here.
    #[arg(long, global = true, env = "TRAPCTL_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,

    /// Load the exact parameters of a reference figure (fig1..fig9).
    #[arg(long, global = true, value_name = "FIGURE")]
    pub paper_defaults: Option<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Construct a protocol from a named family and write its file.
    Design(DesignArgs),
    /// Integrate a protocol and write the trajectory CSV.
    Simulate(SimulateArgs),
    /// Emit a comparison table (exact vs approximate vs finite-pulse).
    Table(TableArgs),
    /// Emit Wigner-function grids at protocol snapshots.
    Wigner(WignerArgs),
    /// Verify a protocol against its predicted final state and oracles.
    Verify(VerifyArgs),
    /// Sweep one design parameter and verify each point.
    Sweep(SweepArgs),
}

/// Family parameters; which ones are required depends on the family.
#[derive(Debug, Args, Clone, Default)]
pub struct FamilyParams {
    /// Target scaling factor b_F (> 1).
    #[arg(long = "b-f", value_name = "B_F")]
    pub b_f: Option<f64>,

    /// Final trap frequency ω_F.
    #[arg(long = "omega-f", value_name = "OMEGA_F")]
    pub omega_f: Option<f64>,

    /// Inverted-trap frequency ω_I (trap at ω² = −ω_I²).
    #[arg(long = "omega-i", value_name = "OMEGA_I")]
    pub omega_i: Option<f64>,

    /// Pulse frequency ω_k for finite-pulse families.
    #[arg(long = "omega-k", value_name = "OMEGA_K")]
    pub omega_k: Option<f64>,

    /// Drive duration t_k for the kick-assisted shortcut.
    #[arg(long = "t-k", value_name = "T_K")]
    pub t_k: Option<f64>,

    /// Ramp duration t_F for the constant-μ family.
    #[arg(long = "t-f", value_name = "T_F")]
    pub t_f: Option<f64>,

    /// Polynomial order n ≥ 1 for the kick-assisted shortcut.
    #[arg(long, value_name = "N")]
    pub n: Option<u32>,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    /// Protocol family (dkc-free, dkc-free-longtime, dkc-inverted,
    /// bangbang-positive, constant-mu, delta-sta, finite-dkc-free,
    /// finite-dkc-inverted).
    #[arg(long)]
    pub family: Option<String>,

    #[command(flatten)]
    pub params: FamilyParams,

    /// Output protocol file (default `<family>.protocol`).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Protocol file written by `design` (or use --paper-defaults).
    #[arg(long)]
    pub protocol: Option<PathBuf>,

    /// Minimum number of trajectory samples.
    #[arg(long, default_value_t = 1000)]
    pub resolution: usize,

    /// Extra evolution in the final trap, in final-trap periods.
    #[arg(long, default_value_t = 2.0)]
    pub hold_periods: f64,

    /// Output CSV (default `<family>.trajectory.csv`).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Which comparison to tabulate (fig2, fig5, fig8, fig9); can also
    /// come from --paper-defaults.
    #[arg(long)]
    pub figure: Option<String>,

    /// Sweep start (overrides the preset).
    #[arg(long)]
    pub from: Option<f64>,

    /// Sweep end (overrides the preset).
    #[arg(long)]
    pub to: Option<f64>,

    /// Number of swept points (overrides the preset).
    #[arg(long)]
    pub points: Option<usize>,

    /// Output CSV (default `<figure>.table.csv`).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WignerArgs {
    /// Protocol file (or use --paper-defaults fig1/fig7).
    #[arg(long)]
    pub protocol: Option<PathBuf>,

    /// Initial inverse temperature β₀ (defaults to 1/ω₀).
    #[arg(long)]
    pub beta0: Option<f64>,

    /// Comma-separated snapshot times; a time on a kick gets both
    /// pre-kick and post-kick grids. Default: initial, pre-kick,
    /// post-kick.
    #[arg(long)]
    pub times: Option<String>,

    /// Half-width of the r axis in units of r₀ = √(1/(2ω₀)); default
    /// covers 4.5 standard deviations of the widest snapshot.
    #[arg(long)]
    pub r_max: Option<f64>,

    /// Half-width of the p axis in units of p₀ = √(ω₀/2).
    #[arg(long)]
    pub p_max: Option<f64>,

    /// Grid points per axis.
    #[arg(long, default_value_t = 201)]
    pub resolution: usize,

    /// Output file prefix (default `<family>.wigner`).
    #[arg(long)]
    pub out_prefix: Option<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Protocol file (or use --paper-defaults).
    #[arg(long)]
    pub protocol: Option<PathBuf>,

    /// Threshold on |b(t_F) − b_F|.
    #[arg(long, default_value_t = 1e-6)]
    pub b_tol: f64,

    /// Threshold on |ḃ(t_F)|.
    #[arg(long, default_value_t = 1e-6)]
    pub bdot_tol: f64,

    /// Threshold on per-segment Ermakov-invariant drift.
    #[arg(long, default_value_t = 1e-9)]
    pub drift_tol: f64,

    /// Also run the Monte Carlo ensemble oracle.
    #[arg(long)]
    pub ensemble: bool,

    /// Ensemble size when --ensemble is set.
    #[arg(long, default_value_t = 20_000)]
    pub samples: usize,

    /// Initial inverse temperature for the ensemble (default 1/ω₀).
    #[arg(long)]
    pub beta0: Option<f64>,

    /// Output report file (default `<family>.report.txt`).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Protocol family to sweep.
    #[arg(long)]
    pub family: String,

    /// Which parameter to sweep (b-f, omega-f, omega-i, omega-k, t-k,
    /// t-f, n).
    #[arg(long)]
    pub param: String,

    #[arg(long)]
    pub from: f64,

    #[arg(long)]
    pub to: f64,

    #[arg(long, default_value_t = 20)]
    pub points: usize,

    /// Base values for the non-swept parameters.
    #[command(flatten)]
    pub params: FamilyParams,

    /// Output CSV (default `<family>.sweep.csv`).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}
