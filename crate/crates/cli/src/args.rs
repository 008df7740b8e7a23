use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// SOC estimation with residual-bias compensation over a single particle model.
///
/// Log verbosity is read from `RBC_DEKF_LOG` (`error`, `warn`, `info`, `debug`, `trace`).
#[derive(Debug, Parser)]
#[command(name = "rbc-dekf", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the truth model over a cycle and write a synthetic dataset.
    Simulate(RunArgs),
    /// Run one filter over a cycle and write its trace.
    Estimate(RunArgs),
    /// Run both filters over a cycle and write the trace and comparison report.
    Compare(CompareArgs),
    /// Write a synthetic current profile.
    Gen(RunArgs),
    /// Check configuration and input files without running anything.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FilterChoice {
    Ekf,
    RbcDekf,
    Both,
}

impl FilterChoice {
    pub fn name(self) -> &'static str {
        match self {
            FilterChoice::Ekf => "ekf",
            FilterChoice::RbcDekf => "rbc-dekf",
            FilterChoice::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Cell parameter TOML, or `builtin:lfp` / `builtin:lfp-flat`.
    #[arg(long, default_value = "builtin:lfp")]
    pub cell: String,

    /// Filter tuning TOML; defaults to the built-in tuning.
    #[arg(long)]
    pub filter_config: Option<PathBuf>,

    /// Cycle CSV, or `synthetic[:key=value,...]`.
    #[arg(long, default_value = "synthetic")]
    pub input: String,

    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Filter for `estimate`; `both` writes both column sets.
    #[arg(long, value_enum)]
    pub filter: Option<FilterChoice>,

    /// Resample a cycle file onto this uniform spacing, s.
    #[arg(long)]
    pub resample: Option<f64>,

    /// True initial SOC: overrides a synthetic input's `soc0`, or starts
    /// Coulomb counting for a cycle file without `soc_ref`.
    #[arg(long)]
    pub soc0: Option<f64>,

    /// Initial SOC of the filters. Defaults to the truth offset by the
    /// benchmark error for synthetic input, and to the reference otherwise.
    #[arg(long)]
    pub initial_soc: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub run: RunArgs,

    /// Exclude this leading fraction of samples from the headline metrics.
    #[arg(long)]
    pub exclude_convergence: Option<f64>,

    /// Run the two filters one after the other.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub cell: Option<String>,

    #[arg(long)]
    pub filter_config: Option<PathBuf>,

    #[arg(long)]
    pub input: Option<String>,

    #[arg(long)]
    pub resample: Option<f64>,
}
