use serde::{Deserialize, Serialize};
use steadyprice_core::oracle::SimulationReport;
use steadyprice_core::{PriceFunction, PricingReport, Scheme};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandName {
    Price,
    Verify,
    Simulate,
}

/// Everything one `price`, `verify` or `simulate` run produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: CommandName,
    pub scheme: Scheme,
    /// `sha256:<hex>` of the scenario file bytes.
    pub input_digest: String,
    pub rows: usize,
    pub dim: usize,
    pub price_function: PriceFunction,
    /// Price charged on each row, in table order.
    pub prices: Vec<f64>,
    pub report: PricingReport,
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationReport>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    /// `grid`, `active-set`, or `none` for the flat baseline.
    pub oracle: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// One property: it holds when `measured ≤ bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    /// Cases the measurement is the worst of.
    pub samples: usize,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, bound: f64, samples: usize) -> Self {
        Check {
            name: name.into(),
            measured,
            bound,
            samples,
            passed: measured <= bound,
        }
    }
}

/// Machine-readable failure printed on standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<u64>,
}
