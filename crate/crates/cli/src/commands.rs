use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use steadyprice_core::oracle::{
    brute_force_linear, brute_force_steady, check_incentive, simulate_profits, SimulationConfig,
};
use steadyprice_core::scenario::io::{parse_history_csv, parse_scenario, write_skeleton_csv};
use steadyprice_core::waterfill::LevelMethod;
use steadyprice_core::{
    estimate_pmf, expected_starting_price, price_table, profit_stats, LevelOptions, PriceFunction,
    PricingError, ScenarioTable, Scheme,
};
use thiserror::Error;

use crate::args::{Cli, Command, EstimateArgs, PriceArgs, PricingArgs, SimulateArgs, VerifyArgs};
use crate::report::{Check, CommandName, ErrorReport, RunReport, Verification, SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Pricing(#[from] PricingError),
    #[error("verification failed: {}", failed.join(", "))]
    VerificationFailed { failed: Vec<String> },
}

impl CliError {
    fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit status: 1 failed verification, 3 I/O, 4 bad input,
    /// 5 pricing failure, 6 oracle limits. Usage errors exit 2 through clap.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerificationFailed { .. } => 1,
            CliError::Io { .. } => 3,
            CliError::Pricing(e) => match e {
                PricingError::InfeasibleFairness { .. }
                | PricingError::FairnessUnreachable { .. }
                | PricingError::NonConvergence { .. } => 5,
                PricingError::TooLarge { .. } => 6,
                _ => 4,
            },
        }
    }

    pub fn to_report(&self) -> ErrorReport {
        let (error, path, line, column) = match self {
            CliError::Io { path, source } => {
                let kind = if source.kind() == io::ErrorKind::NotFound {
                    "FileNotFound"
                } else {
                    "IoError"
                };
                (kind, Some(path.display().to_string()), None, None)
            }
            CliError::Pricing(PricingError::Parse { line, column, .. }) => {
                ("ParseError", None, Some(*line), Some(*column))
            }
            CliError::Pricing(e) => (e.kind(), None, None, None),
            CliError::VerificationFailed { .. } => ("VerificationFailed", None, None, None),
        };
        ErrorReport {
            error: error.to_string(),
            message: self.to_string(),
            path,
            line,
            column,
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Price(args) => cmd_price(&args),
        Command::Estimate(args) => cmd_estimate(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Simulate(args) => cmd_simulate(&args),
    }
}

pub fn cmd_price(args: &PriceArgs) -> Result<(), CliError> {
    let priced = Priced::load(&args.pricing, &args.rho)?;
    if let Some(path) = &args.prices_csv {
        write_atomic(path, &prices_csv(&priced.table, &priced.prices))?;
    }
    let report = priced.into_report(CommandName::Price);
    emit(args.pricing.output.as_deref(), &report.to_json())
}

pub fn cmd_estimate(args: &EstimateArgs) -> Result<(), CliError> {
    let text = read_text(&args.input)?.1;
    let skeleton = estimate_pmf(&parse_history_csv(&text)?)?;
    emit(args.output.as_deref(), &write_skeleton_csv(&skeleton))
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<(), CliError> {
    let priced = Priced::load(&args.pricing, &args.rho)?;
    let verification = verify(&priced, args)?;
    let failed: Vec<String> = verification
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.clone())
        .collect();
    let mut report = priced.into_report(CommandName::Verify);
    report.verification = Some(verification);
    emit(args.pricing.output.as_deref(), &report.to_json())?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::VerificationFailed { failed })
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let priced = Priced::load(&args.pricing, &[])?;
    let config = SimulationConfig {
        draws: args.draws,
        episodes: args.episodes,
        seed: args.seed,
        budget: args.budget,
    };
    let simulation = simulate_profits(&priced.table, &priced.prices, &config)?;
    let mut report = priced.into_report(CommandName::Simulate);
    report.simulation = Some(simulation);
    emit(args.pricing.output.as_deref(), &report.to_json())
}

struct Priced {
    scheme: Scheme,
    digest: String,
    table: ScenarioTable,
    function: PriceFunction,
    prices: Vec<f64>,
    report: steadyprice_core::PricingReport,
    warnings: Vec<String>,
}

impl Priced {
    fn load(args: &PricingArgs, rho: &[f64]) -> Result<Self, CliError> {
        let (digest, text) = read_text(&args.input)?;
        let table = parse_scenario(&text)?;
        let level = LevelOptions {
            allow_negative_level: args.allow_negative_level,
            method: if args.bisection {
                LevelMethod::Bisection
            } else {
                LevelMethod::Exact
            },
        };
        let function = price_table(&table, args.scheme, &level)?;
        let prices = function.row_prices(&table);
        let report = profit_stats(&table, &prices, rho)?;

        let mut warnings = Vec::new();
        if args.scheme != Scheme::Waterlevel {
            if args.allow_negative_level {
                warnings.push(format!(
                    "--allow-negative-level has no effect on the {} scheme",
                    args.scheme
                ));
            }
            if args.bisection {
                warnings.push(format!(
                    "--bisection has no effect on the {} scheme",
                    args.scheme
                ));
            }
        }
        if let PriceFunction::Tabulated(t) = &function {
            if t.negative_level {
                warnings.push(format!(
                    "negative water level {}: revenue cannot cover the starting price, so prices exceed revenue on some rows and profit is negative there",
                    t.level
                ));
            }
        }
        Ok(Priced {
            scheme: args.scheme,
            digest,
            table,
            function,
            prices,
            report,
            warnings,
        })
    }

    fn into_report(self, command: CommandName) -> RunReport {
        RunReport {
            schema_version: SCHEMA_VERSION,
            command,
            scheme: self.scheme,
            input_digest: self.digest,
            rows: self.table.len(),
            dim: self.table.dim(),
            price_function: self.function,
            prices: self.prices,
            report: self.report,
            warnings: self.warnings,
            verification: None,
            simulation: None,
        }
    }
}

const MOMENT_SLACK: f64 = 1e-9;
const INCENTIVE_SLACK: f64 = 1e-9;
const LINEAR_VARIANCE_SLACK: f64 = 1e-6;

fn verify(priced: &Priced, args: &VerifyArgs) -> Result<Verification, CliError> {
    let table = &priced.table;
    let prices = &priced.prices;
    let q = expected_starting_price(table);
    let fairness = (weighted(table, prices) - q).abs();
    let min_price = prices.iter().copied().fold(f64::INFINITY, f64::min);
    let mut checks = Vec::new();

    let (oracle, grid_step) = match &priced.function {
        PriceFunction::Tabulated(t) => {
            if t.negative_level {
                return Err(PricingError::InvalidArgument(
                    "the grid oracle needs fair non-negative prices; this table requires a negative water level".into(),
                )
                .into());
            }
            let scale = table.revenues().iter().fold(1.0f64, |m, v| m.max(v.abs()));
            checks.push(Check::new("fairness", fairness, 1e-9 * q.max(1.0), 1));
            checks.push(Check::new(
                "non_negative_prices",
                (-min_price).max(0.0),
                0.0,
                table.len(),
            ));
            checks.push(Check::new(
                "non_negative_profit",
                (-priced.report.min_profit).max(0.0),
                1e-12 * scale,
                table.len(),
            ));
            let structure = table
                .revenues()
                .iter()
                .zip(prices)
                .map(|(v, p)| (p - (v - t.level).max(0.0)).abs())
                .fold(0.0, f64::max);
            checks.push(Check::new(
                "level_structure",
                structure,
                1e-12 * scale,
                table.len(),
            ));

            let grid = brute_force_steady(table, args.grid_step, &args.rho)?;
            let samples = grid.candidates as usize;
            for best in &grid.per_rho {
                let ours = priced
                    .report
                    .moment(best.rho)
                    .expect("report carries every verified moment");
                checks.push(Check::new(
                    format!("moment_rho_{}_vs_grid", best.rho),
                    ours - best.moment,
                    MOMENT_SLACK * best.moment.max(1.0),
                    samples,
                ));
            }
            checks.push(Check::new(
                "max_min_profit_vs_grid",
                grid.max_min_profit - priced.report.min_profit,
                MOMENT_SLACK,
                samples,
            ));
            ("grid", Some(args.grid_step))
        }
        PriceFunction::Linear(lin) => {
            checks.push(Check::new("fairness", fairness, 1e-7 * q.max(1.0), 1));
            let min_coefficient = lin
                .coefficients
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            checks.push(Check::new(
                "non_negative_coefficients",
                (-min_coefficient).max(0.0),
                0.0,
                lin.coefficients.len(),
            ));
            let oracle = brute_force_linear(table)?;
            checks.push(Check::new(
                "variance_vs_oracle",
                lin.achieved_variance - oracle.variance,
                LINEAR_VARIANCE_SLACK,
                oracle.feasible_sets,
            ));
            ("active-set", None)
        }
        PriceFunction::Flat { .. } => {
            checks.push(Check::new("fairness", fairness, 1e-9 * q.max(1.0), 1));
            checks.push(Check::new(
                "non_negative_prices",
                (-min_price).max(0.0),
                0.0,
                table.len(),
            ));
            ("none", None)
        }
    };

    if priced.scheme != Scheme::Flat && args.misreports > 0 {
        checks.push(incentive_check(
            table,
            priced.scheme,
            args.misreports,
            args.seed,
        )?);
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(Verification {
        oracle: oracle.to_string(),
        grid_step,
        seed: args.seed,
        checks,
        passed,
    })
}

/// Worst `truthful − misreported` variance over random revenue misreports.
/// Misreports the water-level scheme cannot price are skipped.
fn incentive_check(
    table: &ScenarioTable,
    scheme: Scheme,
    misreports: usize,
    seed: u64,
) -> Result<Check, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = table.revenues().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut worst = f64::NEG_INFINITY;
    let mut samples = 0;
    for _ in 0..misreports {
        let misreport: Vec<f64> = table
            .revenues()
            .iter()
            .map(|v| v + spread * rng.gen_range(-1.0..=1.0))
            .collect();
        match check_incentive(table, &misreport, scheme) {
            Ok(c) => {
                worst = worst.max(c.truthful_moment - c.misreport_moment);
                samples += 1;
            }
            Err(PricingError::InfeasibleFairness { .. }) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let measured = if samples == 0 { 0.0 } else { worst };
    Ok(Check::new("incentive", measured, INCENTIVE_SLACK, samples))
}

fn weighted(table: &ScenarioTable, x: &[f64]) -> f64 {
    table.masses().iter().zip(x).map(|(f, x)| f * x).sum()
}

fn read_text(path: &Path) -> Result<(String, String), CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let digest = format!("sha256:{}", hex::encode(Sha256::digest(&bytes)));
    let text = String::from_utf8(bytes)
        .map_err(|e| CliError::io(path, io::Error::new(io::ErrorKind::InvalidData, e)))?;
    Ok((digest, text))
}

fn prices_csv(table: &ScenarioTable, prices: &[f64]) -> String {
    let mut out = String::new();
    for i in 1..=table.dim() {
        out.push_str(&format!("r_{i},"));
    }
    out.push_str("f,q,v,p\n");
    for (row, p) in table.rows().zip(prices) {
        for r in row.demand {
            out.push_str(&format!("{r},"));
        }
        out.push_str(&format!(
            "{},{},{},{p}\n",
            row.mass, row.starting_price, row.revenue
        ));
    }
    out
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(path) => write_atomic(path, text),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

/// Writes through a temporary file in the target directory, so a failed run
/// never leaves a partial file behind.
fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut file = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    file.write_all(text.as_bytes())
        .and_then(|()| file.as_file().sync_all())
        .map_err(|e| CliError::io(path, e))?;
    file.persist(path)
        .map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}
