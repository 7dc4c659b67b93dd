use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};
use crate::linear_pricing::{linear_pricing, LinearPriceFunction};
use crate::scenario::{expected_starting_price, ScenarioTable};
use crate::waterfill::{waterlevel_pricing_with, LevelOptions, TabulatedPriceFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Waterlevel,
    Linear,
    /// Pay-as-you-go baseline: the expected starting price on every draw.
    Flat,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Waterlevel => "waterlevel",
            Scheme::Linear => "linear",
            Scheme::Flat => "flat",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = PricingError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "waterlevel" => Ok(Scheme::Waterlevel),
            "linear" => Ok(Scheme::Linear),
            "flat" => Ok(Scheme::Flat),
            other => Err(PricingError::InvalidArgument(format!(
                "unknown scheme `{other}` (expected waterlevel, linear or flat)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PriceFunction {
    Tabulated(TabulatedPriceFunction),
    Linear(LinearPriceFunction),
    Flat { price: f64 },
}

impl PriceFunction {
    /// The price charged on each table row.
    pub fn row_prices(&self, table: &ScenarioTable) -> Vec<f64> {
        match self {
            PriceFunction::Tabulated(t) => t.prices.clone(),
            PriceFunction::Linear(l) => l.row_prices(table),
            PriceFunction::Flat { price } => vec![*price; table.len()],
        }
    }
}

/// Runs `scheme` on `table`. `level` only affects the water-level scheme.
pub fn price_table(
    table: &ScenarioTable,
    scheme: Scheme,
    level: &LevelOptions,
) -> Result<PriceFunction> {
    Ok(match scheme {
        Scheme::Waterlevel => PriceFunction::Tabulated(waterlevel_pricing_with(table, level)?),
        Scheme::Linear => PriceFunction::Linear(linear_pricing(table)?),
        Scheme::Flat => PriceFunction::Flat {
            price: expected_starting_price(table),
        },
    })
}
