use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lens_torsion::{ParamSource, ShapeParams, Tolerances};

/// Geometric torsion invariants of lens spaces.
#[derive(Parser, Debug)]
#[command(name = "lens-torsion", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute the invariant table of one lens space
    Compute(ComputeArgs),
    /// Sweep all lens spaces up to p-max and compare with the closed forms
    Verify(VerifyArgs),
    /// Print every structural residual of one lens space
    Selfcheck(SelfcheckArgs),
    /// Print the closed-form table
    Oracle(OracleArgs),
}

#[derive(Args, Debug, Clone)]
pub struct LensArgs {
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub q: usize,
}

/// Either a seed or all four shape parameters; seed 0 when neither is given.
#[derive(Args, Debug, Clone)]
pub struct GeometryArgs {
    #[arg(long, conflicts_with_all = ["alpha", "rho", "sigma", "s"])]
    pub seed: Option<u64>,
    #[arg(long, allow_negative_numbers = true, requires_all = ["rho", "sigma", "s"])]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true, requires_all = ["alpha", "sigma", "s"])]
    pub rho: Option<f64>,
    #[arg(long, allow_negative_numbers = true, requires_all = ["alpha", "rho", "s"])]
    pub sigma: Option<f64>,
    #[arg(long, allow_negative_numbers = true, requires_all = ["alpha", "rho", "sigma"])]
    pub s: Option<f64>,
}

impl GeometryArgs {
    pub fn source(&self) -> ParamSource {
        match (self.alpha, self.rho, self.sigma, self.s) {
            (Some(alpha), Some(rho), Some(sigma), Some(s)) => {
                ParamSource::Explicit(ShapeParams { alpha, rho, sigma, s })
            }
            _ => ParamSource::Seed(self.seed.unwrap_or(0)),
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct TolArgs {
    /// Tolerance applied to every structural residual (defaults differ per check)
    #[arg(long)]
    pub residual_tol: Option<f64>,
}

impl TolArgs {
    pub fn tolerances(&self) -> Tolerances {
        self.residual_tol.map_or_else(Tolerances::default, Tolerances::uniform_residual)
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub lens: LensArgs,
    /// Representation indices (default: all of 1..=p/2)
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    /// Blocks to report (default: all)
    #[arg(long, value_delimiter = ',')]
    pub j: Option<Vec<usize>>,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub tol: TolArgs,
    #[arg(long, default_value_t = 1e-6)]
    pub compare_tol: f64,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Write here instead of standard output
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 10)]
    pub p_max: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct SelfcheckArgs {
    #[command(flatten)]
    pub lens: LensArgs,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub tol: TolArgs,
}

#[derive(Args, Debug, Clone)]
pub struct OracleArgs {
    #[command(flatten)]
    pub lens: LensArgs,
}
