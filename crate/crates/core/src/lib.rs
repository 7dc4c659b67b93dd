//! Performance-based pricing that keeps the provider's expected revenue fixed
//! while minimizing the customer's profit risk.
//!
//! Two schemes are provided:
//!
//! * [`waterfill`]: tabulated prices `max(v − L, 0)` that make the customer's
//!   profit as equal as possible across scenarios and never negative.
//! * [`linear_pricing`]: linear prices with non-negative coefficients that
//!   minimize profit variance, solved through [`nnls`].
//!
//! [`oracle`] holds brute-force and simulation checks for both.

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod linear_pricing;
pub mod nnls;
pub mod oracle;
pub mod scenario;
pub mod scheme;
pub mod waterfill;

pub use error::{PricingError, Result};
pub use linear_pricing::{linear_pricing, LinearPriceFunction};
pub use nnls::{kkt_residual, nnls_solve, LsProblem, NnlsSolution};
pub use scenario::{
    estimate_pmf, expected_starting_price, is_fair, is_nonnegative, profit_stats, validate_table,
    DemandVector, PmfSkeleton, PricingReport, RawRow, ScenarioTable,
};
pub use scheme::{price_table, PriceFunction, Scheme};
pub use waterfill::{waterlevel_pricing, LevelOptions, TabulatedPriceFunction};
