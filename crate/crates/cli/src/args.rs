use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "steercert", version, about = "Certified randomness from steering inequality violations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the functional, measurements and assemblage for a Schmidt state.
    Construct(ConstructArgs),
    /// Evaluate Σ tr F σ for a functional and an assemblage.
    Value(ValueArgs),
    /// Classical bound of a functional by deterministic-strategy enumeration.
    LhsBound(StateArgs),
    /// Certify min-entropy at one observed value.
    Certify(CertifyArgs),
    /// Certify over a grid of observed values and write CSV (and SVG).
    Sweep(SweepArgs),
    /// Run the built-in cross-check battery.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstraintArg {
    Eq,
    Geq,
}

/// The state and functional a command works on.
#[derive(Debug, Clone, Args)]
pub struct StateArgs {
    /// Local dimension.
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// "maximal" or comma-separated Schmidt coefficients.
    #[arg(long, default_value = "maximal")]
    pub schmidt: String,
    /// Load the functional from JSON instead of constructing it.
    #[arg(long)]
    pub functional: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long = "tol-gap", default_value_t = 1e-7)]
    pub tol_gap: f64,
    #[arg(long = "tol-feas", default_value_t = 1e-7)]
    pub tol_feas: f64,
    #[arg(long, value_enum, default_value_t = ConstraintArg::Eq)]
    pub constraint: ConstraintArg,
    /// Accepted for reproducibility; the solver itself is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValueArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Assemblage JSON; defaults to the one prepared by the Schmidt state.
    #[arg(long)]
    pub assemblage: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[arg(long)]
    pub beta: f64,
    #[arg(long = "xstar", default_value_t = 1)]
    pub x_star: usize,
    /// Also write the certificate JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[command(flatten)]
    pub solve: SolveArgs,
    /// Defaults to the classical bound.
    #[arg(long = "beta-min")]
    pub beta_min: Option<f64>,
    /// Defaults to 10⁻⁶ below the maximal value.
    #[arg(long = "beta-max")]
    pub beta_max: Option<f64>,
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    #[arg(long = "xstar", default_value_t = 1)]
    pub x_star: usize,
    /// Worker threads; defaults to the logical core count.
    #[arg(long, env = "STEERCERT_THREADS")]
    pub threads: Option<usize>,
    /// CSV path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[command(flatten)]
    pub solve: SolveArgs,
    /// Distance below the maximal value used for the analytic comparison.
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    /// Allowed |p_guess_dual − max_a q_a| in the analytic comparison.
    #[arg(long = "tol-analytic", default_value_t = 5e-4)]
    pub tol_analytic: f64,
    /// Random cases per property check.
    #[arg(long, default_value_t = 25)]
    pub cases: usize,
}
