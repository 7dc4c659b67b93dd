use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use steadyprice_core::Scheme;

#[derive(Debug, Parser)]
#[command(
    name = "steadyprice",
    version,
    about = "Fair pricing that keeps customer profit steady"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Price a scenario table and report profit statistics.
    Price(PriceArgs),
    /// Estimate an empirical demand pmf from a usage history.
    Estimate(EstimateArgs),
    /// Compare a scheme against its brute-force oracle on a small table.
    Verify(VerifyArgs),
    /// Replay the customer's capital under a scheme by Monte Carlo.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct PricingArgs {
    /// Pricing scheme.
    #[arg(long, value_parser = parse_scheme)]
    pub scheme: Scheme,
    /// Scenario file (CSV with header `r_1,…,r_m,f,q,v`, or JSON).
    #[arg(long)]
    pub input: PathBuf,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Let the water level go negative when revenue cannot cover the starting price.
    #[arg(long)]
    pub allow_negative_level: bool,
    /// Solve the water level by bisection instead of the exact breakpoint scan.
    #[arg(long)]
    pub bisection: bool,
}

#[derive(Debug, Args)]
pub struct PriceArgs {
    #[command(flatten)]
    pub pricing: PricingArgs,
    /// Extra absolute moment orders to report (2 is always included).
    #[arg(long, value_delimiter = ',')]
    pub rho: Vec<f64>,
    /// Also export per-row prices as CSV.
    #[arg(long)]
    pub prices_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// History file (CSV with header `r_1,…,r_m`).
    #[arg(long)]
    pub input: PathBuf,
    /// Write the pmf skeleton here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub pricing: PricingArgs,
    /// Moment orders checked against the grid oracle.
    #[arg(long, value_delimiter = ',', default_value = "1.5,2,3")]
    pub rho: Vec<f64>,
    /// Price step of the water-level grid oracle.
    #[arg(long, default_value_t = 0.01)]
    pub grid_step: f64,
    /// Random revenue misreports tried by the incentive check.
    #[arg(long, default_value_t = 100)]
    pub misreports: usize,
    /// Seed for the misreports.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub pricing: PricingArgs,
    /// Draws per episode.
    #[arg(long)]
    pub draws: u64,
    #[arg(long)]
    pub seed: u64,
    /// Starting capital of every episode.
    #[arg(long)]
    pub budget: f64,
    /// Independent episodes.
    #[arg(long, default_value_t = 10_000)]
    pub episodes: u64,
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse()
        .map_err(|e: steadyprice_core::PricingError| e.to_string())
}
