//! Command-line configuration.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Debug, Clone, Parser)]
#[command(
    name = "dualrisk",
    version,
    about = "Evaluate and compare multivariate risks against a reference measure"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Evaluate one prospect under a weight scheme.
    Eval {
        data: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Rank several prospects by their evaluation, best first.
    Rank {
        #[arg(required = true, num_args = 1..)]
        data: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Test whether X dominates Y.
    Dominance {
        x: PathBuf,
        y: PathBuf,
        #[arg(long, value_enum, default_value_t = Order::Fosd)]
        order: Order,
        /// Decision method for the concave order.
        #[arg(long, value_enum, default_value_t = Method::DoublyStochastic)]
        method: Method,
        /// Sampled reference measures for the rho battery.
        #[arg(long, default_value_t = dualrisk::evaluate::RHO_BATTERY_CLOUDS)]
        clouds: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Test whether aligned prospects (rows are joint states) are mu-comonotonic.
    Comonotone {
        #[arg(required = true, num_args = 2..)]
        data: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// mu-quantile of a prospect, and optionally its classical quantiles.
    Quantile {
        data: PathBuf,
        /// Levels in (0, 1) for the univariate quantile, comma separated.
        #[arg(long)]
        at: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Local utility of a distribution, evaluated at points.
    LocalUtility {
        data: PathBuf,
        /// CSV of evaluation points; defaults to the distribution's atoms.
        #[arg(long)]
        points: Option<PathBuf>,
        /// Point where the utility is set to zero, comma separated; defaults to the smallest atom.
        #[arg(long)]
        anchor: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Generalized Gini evaluation and ranking of allocations.
    Inequality {
        #[arg(required = true, num_args = 1..)]
        data: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeKind {
    RiskAverse,
    General,
    Univariate,
    StatePrice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Order {
    Fosd,
    Concave,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    DoublyStochastic,
    RhoBattery,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Reference measure: a CSV path or "uniform-grid D K".
    #[arg(long)]
    pub mu: Option<String>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeKind>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Comma separated, one entry per dimension; zero when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub u0: Option<String>,
    /// CSV of weights, one row per row of the --mu file (general scheme).
    #[arg(long)]
    pub phi: Option<PathBuf>,
    /// One-column CSV of f' on the midpoint grid (univariate scheme).
    #[arg(long)]
    pub f_prime: Option<PathBuf>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Report destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Eval { .. } => "eval",
            Command::Rank { .. } => "rank",
            Command::Dominance { .. } => "dominance",
            Command::Comonotone { .. } => "comonotone",
            Command::Quantile { .. } => "quantile",
            Command::LocalUtility { .. } => "local-utility",
            Command::Inequality { .. } => "inequality",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Eval { common, .. }
            | Command::Rank { common, .. }
            | Command::Dominance { common, .. }
            | Command::Comonotone { common, .. }
            | Command::Quantile { common, .. }
            | Command::LocalUtility { common, .. }
            | Command::Inequality { common, .. } => common,
        }
    }
}

/// Parses "a,b,c" into floats.
pub fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, crate::CliError> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(crate::CliError::Usage(format!(
                    "{what}: `{s}` is not a finite number"
                ))),
            }
        })
        .collect()
}
