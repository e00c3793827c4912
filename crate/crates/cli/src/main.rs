mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fgw_core::operators::FamilyKind;

/// Radial convolution operators on free groups: exact algebra, Lorentz norms
/// and norm-bound certificates.
#[derive(Debug, Parser)]
#[command(name = "fgw", version)]
pub struct Cli {
    /// Worker threads; overrides FGW_THREADS.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Number of generators.
    #[arg(long, global = true, default_value_t = 2)]
    pub k: u32,
    /// Seed for every randomized family.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Largest number of words any single enumeration may touch.
    #[arg(long, global = true)]
    pub cap: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact product of two radial functions.
    Convolve(ConvolveArgs),
    /// Lorentz and weak norms of a radial function.
    Norms(NormsArgs),
    /// Set-search estimate of an operator norm.
    Search(SearchArgs),
    /// Run a verifier and report pass/fail per checked instance.
    Verify(VerifyArgs),
    /// Exploratory table for the Lorentz-space conjecture.
    Conjecture(ConjectureArgs),
}

#[derive(Debug, Args)]
pub struct ConvolveArgs {
    /// Product of the sphere indicators chi_n * chi_m.
    #[arg(long, requires = "m", conflicts_with_all = ["f", "g"])]
    pub n: Option<usize>,
    #[arg(long, requires = "n")]
    pub m: Option<usize>,
    /// Compare against brute-force enumeration of the spheres.
    #[arg(long, requires = "n")]
    pub oracle: bool,
    /// Radial literal, comma-separated rationals "f0,f1,...".
    #[arg(long, requires = "g")]
    pub f: Option<String>,
    #[arg(long, requires = "f")]
    pub g: Option<String>,
}

#[derive(Debug, Args)]
pub struct NormsArgs {
    #[arg(long)]
    pub radial: String,
    #[arg(long)]
    pub p: f64,
    /// Second Lorentz index; "inf" for the weak norm.
    #[arg(long, default_value = "1", value_parser = parse_index)]
    pub s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Estimator {
    /// Sup of pairings over indicator pairs, (2,1) to (2,inf).
    Restricted,
    /// Sup of ||f * chi_E||_2 / |E|^(1/2).
    Weak,
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: Option<FamilyKind>,
    #[arg(long)]
    pub radius: Option<usize>,
    /// Most sets a family may produce (greedy: most growth steps).
    #[arg(long)]
    pub budget: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub radial: String,
    #[arg(long, value_enum, default_value_t = Estimator::Restricted)]
    pub estimator: Estimator,
    #[command(flatten)]
    pub family: FamilyArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Oracle,
    Majorization,
    Lemma1,
    R22,
    Pk,
    Qn,
    Thm1,
    Thm3,
    Thm4,
    Thm5,
    All,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub target: Target,
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Largest sphere index (oracle, majorization, r22, qn, thm5).
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Largest operator index (lemma1, pk).
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Single radial function instead of the built-in suite (thm1, thm4).
    #[arg(long)]
    pub radial: Option<String>,
    /// Exponents for thm4; each in (1, 2).
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<f64>,
    #[arg(long, value_parser = parse_index)]
    pub s: Option<f64>,
    #[arg(long, value_parser = parse_index)]
    pub t: Option<f64>,
    /// Random functions sampled by thm3.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Reduced parameters for `all`.
    #[arg(long)]
    pub quick: bool,
}

#[derive(Debug, Args)]
pub struct ConjectureArgs {
    /// Radial literals; the built-in suite when absent.
    #[arg(long)]
    pub radial: Vec<String>,
    #[arg(long = "s-grid", value_delimiter = ',', default_values_t = [1.0, 1.5, 2.0])]
    pub s_grid: Vec<f64>,
    #[command(flatten)]
    pub family: FamilyArgs,
}

fn parse_index(s: &str) -> Result<f64, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|e| format!("{s:?}: {e}")),
    }
}

fn parse_family(s: &str) -> Result<FamilyKind, String> {
    s.parse().map_err(|e: fgw_core::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    ExitCode::from(commands::run(&cli))
}
