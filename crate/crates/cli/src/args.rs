use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "tailquant",
    version,
    about = "Extreme-tail quantile approximations checked against a quadrature reference"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Approximate and reference quantile at one probability level
    Quantile {
        #[command(flatten)]
        dist: DistArgs,
        /// Probability level in (0, 1)
        #[arg(long)]
        u: f64,
        /// Approximation method
        #[arg(long, default_value = "full")]
        method: String,
        /// Allow tail masses below 1e-15
        #[arg(long)]
        extended: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Several approximations side by side with the reference quantile
    Compare {
        #[command(flatten)]
        dist: DistArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Comma-separated methods: leading, full, expansion1..4, voutier
        #[arg(long, value_delimiter = ',', default_value = "leading,full")]
        methods: Vec<String>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Relative error of one method against its predicted order
    ErrorCurve {
        #[command(flatten)]
        dist: DistArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Approximation method
        #[arg(long, default_value = "full")]
        method: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Residual of each expansion partial sum in units of the next term
    Ladder {
        #[command(flatten)]
        dist: DistArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Gaussian-copula lower-tail dependence report
    Taildep {
        /// Correlation in (-1, 1)
        #[arg(long, allow_negative_numbers = true)]
        rho: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistName {
    Normal,
    SkewNormal,
    Gamma,
    VarianceGamma,
    SkewSlash,
}

#[derive(Debug, Clone, Args)]
pub struct DistArgs {
    /// Distribution family
    #[arg(long, value_enum)]
    pub dist: DistName,
    /// Tail to study
    #[arg(long, value_enum, default_value = "lower")]
    pub side: SideArg,
    /// Skewness (skew-normal) or Beta shape (skew-slash)
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Gamma shape
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Gamma rate
    #[arg(long)]
    pub beta: Option<f64>,
    /// Drift (variance-gamma, skew-slash)
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Variance-gamma mixing variance
    #[arg(long)]
    pub nu: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Geometric grid of tail masses, start:end:points
    #[arg(long, conflicts_with = "u_list")]
    pub grid: Option<String>,
    /// Explicit comma-separated tail masses
    #[arg(long, value_delimiter = ',')]
    pub u_list: Option<Vec<f64>>,
    /// Allow tail masses below 1e-15 (default grid then runs to 1e-100)
    #[arg(long)]
    pub extended: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Output CSV path (stdout when absent)
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    /// Absolute tolerance of the reference integrals
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// Relative tolerance of the reference integrals
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Relative residual accepted by the quantile root finder
    #[arg(long)]
    pub root_tol: Option<f64>,
    /// Root-finder iteration cap
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Start root brackets from scratch instead of the approximant
    #[arg(long)]
    pub no_seed: bool,
}
