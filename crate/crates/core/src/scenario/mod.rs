//! The discrete demand model.
//!
//! A [`ScenarioTable`] holds `N` scenarios, each a demand vector with its
//! probability mass, the provider's starting price and the customer's reported
//! revenue. Everything downstream (both pricing schemes and the oracles) reads
//! the model through this type, so the table is validated once at construction
//! and is immutable afterwards.

pub mod io;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};

/// Masses whose total is within this relative distance of 1 are renormalized.
pub const PMF_RENORMALIZE_TOLERANCE: f64 = 1e-6;

// Below this the mass total is already 1 up to rounding and is left untouched,
// which keeps validation idempotent.
const PMF_EXACT_TOLERANCE: f64 = 1e-12;

/// Quantities of the `m` resource types rented in one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DemandVector(Vec<f64>);

impl DemandVector {
    pub fn new(coordinates: Vec<f64>) -> Result<Self> {
        if coordinates.is_empty() {
            return Err(PricingError::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        for (index, &value) in coordinates.iter().enumerate() {
            if !value.is_finite() {
                return Err(PricingError::NonFinite {
                    row: 0,
                    field: "demand",
                });
            }
            if value < 0.0 {
                return Err(PricingError::NegativeDemand {
                    row: 0,
                    index,
                    value,
                });
            }
        }
        Ok(DemandVector(coordinates))
    }

    pub fn coordinates(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// The demand with the constant coordinate `r_0 = 1` prepended.
    pub fn homogeneous(&self) -> Vec<f64> {
        homogeneous(&self.0)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

pub(crate) fn homogeneous(coordinates: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(coordinates.len() + 1);
    out.push(1.0);
    out.extend_from_slice(coordinates);
    out
}

/// Bit-level key for a demand vector; `-0.0` and `0.0` collapse.
fn demand_key(coordinates: &[f64]) -> Vec<u64> {
    coordinates
        .iter()
        .map(|&x| if x == 0.0 { 0u64 } else { x.to_bits() })
        .collect()
}

/// One unvalidated scenario record as read from a file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRow {
    pub demand: Vec<f64>,
    pub mass: f64,
    pub starting_price: f64,
    pub revenue: f64,
}

impl RawRow {
    pub fn new(demand: Vec<f64>, mass: f64, starting_price: f64, revenue: f64) -> Self {
        RawRow {
            demand,
            mass,
            starting_price,
            revenue,
        }
    }
}

/// Borrowed view of one validated scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioRow<'a> {
    pub demand: &'a [f64],
    pub mass: f64,
    pub starting_price: f64,
    pub revenue: f64,
}

/// A validated discrete demand model.
///
/// Invariants: at least one row, every mass strictly positive with total 1
/// (within `1e-9`), pairwise distinct demand vectors of a common dimension,
/// non-negative starting prices and finite revenues.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTable {
    dim: usize,
    demands: Vec<f64>,
    masses: Vec<f64>,
    starting_prices: Vec<f64>,
    revenues: Vec<f64>,
}

impl ScenarioTable {
    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// Number of resource types `m`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn demand(&self, row: usize) -> &[f64] {
        &self.demands[row * self.dim..(row + 1) * self.dim]
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn starting_prices(&self) -> &[f64] {
        &self.starting_prices
    }

    pub fn revenues(&self) -> &[f64] {
        &self.revenues
    }

    pub fn row(&self, row: usize) -> ScenarioRow<'_> {
        ScenarioRow {
            demand: self.demand(row),
            mass: self.masses[row],
            starting_price: self.starting_prices[row],
            revenue: self.revenues[row],
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = ScenarioRow<'_>> + '_ {
        (0..self.len()).map(move |k| self.row(k))
    }

    pub fn to_raw_rows(&self) -> Vec<RawRow> {
        self.rows()
            .map(|r| RawRow::new(r.demand.to_vec(), r.mass, r.starting_price, r.revenue))
            .collect()
    }

    /// The same model with a different (possibly misreported) revenue column.
    pub fn with_revenues(&self, revenues: &[f64]) -> Result<ScenarioTable> {
        check_len(self.len(), revenues.len())?;
        if let Some(row) = revenues.iter().position(|v| !v.is_finite()) {
            return Err(PricingError::NonFinite {
                row,
                field: "revenue",
            });
        }
        Ok(ScenarioTable {
            revenues: revenues.to_vec(),
            ..self.clone()
        })
    }

    /// The same model with a different starting price column.
    pub fn with_starting_prices(&self, starting_prices: &[f64]) -> Result<ScenarioTable> {
        check_len(self.len(), starting_prices.len())?;
        for (row, &q) in starting_prices.iter().enumerate() {
            if !q.is_finite() {
                return Err(PricingError::NonFinite {
                    row,
                    field: "starting price",
                });
            }
            if q < 0.0 {
                return Err(PricingError::NegativeStartingPrice { row, price: q });
            }
        }
        Ok(ScenarioTable {
            starting_prices: starting_prices.to_vec(),
            ..self.clone()
        })
    }

    /// `max_k v_k`.
    pub fn max_revenue(&self) -> f64 {
        self.revenues
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `Σ (v_k − q_k) f_k`, the mean profit under any fair price function.
    pub fn fair_mean_profit(&self) -> f64 {
        self.rows()
            .map(|r| (r.revenue - r.starting_price) * r.mass)
            .sum()
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(PricingError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Validates raw records into a [`ScenarioTable`].
///
/// Zero-mass rows are dropped, duplicate demand vectors with identical
/// starting price and revenue are merged by adding their masses, and a mass
/// total within `1e-6` of one is renormalized. Row order follows first
/// occurrence.
pub fn validate_table(raw_rows: Vec<RawRow>) -> Result<ScenarioTable> {
    let first = raw_rows.first().ok_or(PricingError::EmptyTable)?;
    let dim = first.demand.len();
    if dim == 0 {
        return Err(PricingError::DimensionMismatch {
            expected: 1,
            found: 0,
        });
    }

    let mut total = 0.0;
    for (row, r) in raw_rows.iter().enumerate() {
        if r.demand.len() != dim {
            return Err(PricingError::DimensionMismatch {
                expected: dim,
                found: r.demand.len(),
            });
        }
        for (index, &x) in r.demand.iter().enumerate() {
            if !x.is_finite() {
                return Err(PricingError::NonFinite {
                    row,
                    field: "demand",
                });
            }
            if x < 0.0 {
                return Err(PricingError::NegativeDemand {
                    row,
                    index,
                    value: x,
                });
            }
        }
        if !r.mass.is_finite() {
            return Err(PricingError::NonFinite { row, field: "mass" });
        }
        if r.mass < 0.0 {
            return Err(PricingError::NegativeMass { row, mass: r.mass });
        }
        if !r.starting_price.is_finite() {
            return Err(PricingError::NonFinite {
                row,
                field: "starting price",
            });
        }
        if r.starting_price < 0.0 {
            return Err(PricingError::NegativeStartingPrice {
                row,
                price: r.starting_price,
            });
        }
        if !r.revenue.is_finite() {
            return Err(PricingError::NonFinite {
                row,
                field: "revenue",
            });
        }
        total += r.mass;
    }
    if (total - 1.0).abs() > PMF_RENORMALIZE_TOLERANCE {
        return Err(PricingError::NonNormalizedPmf { sum: total });
    }

    let mut table = ScenarioTable {
        dim,
        demands: Vec::with_capacity(raw_rows.len() * dim),
        masses: Vec::with_capacity(raw_rows.len()),
        starting_prices: Vec::with_capacity(raw_rows.len()),
        revenues: Vec::with_capacity(raw_rows.len()),
    };
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::with_capacity(raw_rows.len());
    for (row, r) in raw_rows.into_iter().enumerate() {
        if r.mass == 0.0 {
            continue;
        }
        match seen.get(&demand_key(&r.demand)) {
            Some(&k) => {
                if table.starting_prices[k] != r.starting_price || table.revenues[k] != r.revenue {
                    return Err(PricingError::InconsistentDuplicate { row });
                }
                table.masses[k] += r.mass;
            }
            None => {
                seen.insert(demand_key(&r.demand), table.masses.len());
                table.demands.extend_from_slice(&r.demand);
                table.masses.push(r.mass);
                table.starting_prices.push(r.starting_price);
                table.revenues.push(r.revenue);
            }
        }
    }
    if table.masses.is_empty() {
        return Err(PricingError::EmptyTable);
    }

    let kept: f64 = table.masses.iter().sum();
    if (kept - 1.0).abs() > PMF_EXACT_TOLERANCE {
        for f in &mut table.masses {
            *f /= kept;
        }
    }
    Ok(table)
}

/// `Σ q_k f_k`.
pub fn expected_starting_price(table: &ScenarioTable) -> f64 {
    weighted_sum(table.masses(), table.starting_prices())
}

pub(crate) fn weighted_sum(masses: &[f64], values: &[f64]) -> f64 {
    masses.iter().zip(values).map(|(f, x)| f * x).sum()
}

/// One entry of [`PricingReport::rho_moments`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoMoment {
    pub rho: f64,
    pub moment: f64,
}

/// Profit statistics of a price function on a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingReport {
    pub expected_price: f64,
    pub expected_profit_mu: f64,
    pub per_row_profit: Vec<f64>,
    pub per_row_deviation_h: Vec<f64>,
    pub variance: f64,
    /// Absolute moments `Σ |h_k|^ρ f_k`, ascending in `ρ`; always contains `ρ = 2`.
    pub rho_moments: Vec<RhoMoment>,
    pub min_profit: f64,
}

impl PricingReport {
    pub fn moment(&self, rho: f64) -> Option<f64> {
        self.rho_moments
            .iter()
            .find(|m| m.rho == rho)
            .map(|m| m.moment)
    }
}

/// Absolute ρ-th moment `Σ |h_k|^ρ f_k` of the deviations.
pub fn rho_moment(masses: &[f64], deviations: &[f64], rho: f64) -> f64 {
    if rho == 2.0 {
        masses.iter().zip(deviations).map(|(f, h)| f * h * h).sum()
    } else {
        masses
            .iter()
            .zip(deviations)
            .map(|(f, h)| f * h.abs().powf(rho))
            .sum()
    }
}

pub(crate) fn normalize_rho_set(rho_set: &[f64]) -> Result<Vec<f64>> {
    let mut rhos = Vec::with_capacity(rho_set.len() + 1);
    for &rho in rho_set {
        if !(rho.is_finite() && rho > 1.0) {
            return Err(PricingError::InvalidArgument(format!(
                "moment order must be a finite number > 1, got {rho}"
            )));
        }
        rhos.push(rho);
    }
    rhos.push(2.0);
    rhos.sort_by(f64::total_cmp);
    rhos.dedup();
    Ok(rhos)
}

/// Profit statistics for the per-row `prices` on `table`.
///
/// The mean `μ` is computed from the given prices; for a fair price function
/// it coincides with [`ScenarioTable::fair_mean_profit`].
pub fn profit_stats(
    table: &ScenarioTable,
    prices: &[f64],
    rho_set: &[f64],
) -> Result<PricingReport> {
    check_len(table.len(), prices.len())?;
    if let Some(row) = prices.iter().position(|p| !p.is_finite()) {
        return Err(PricingError::NonFinite {
            row,
            field: "price",
        });
    }
    let rhos = normalize_rho_set(rho_set)?;

    let masses = table.masses();
    let per_row_profit: Vec<f64> = table
        .revenues()
        .iter()
        .zip(prices)
        .map(|(v, p)| v - p)
        .collect();
    let mu = weighted_sum(masses, &per_row_profit);
    let per_row_deviation_h: Vec<f64> = per_row_profit.iter().map(|x| x - mu).collect();
    let rho_moments: Vec<RhoMoment> = rhos
        .iter()
        .map(|&rho| RhoMoment {
            rho,
            moment: rho_moment(masses, &per_row_deviation_h, rho),
        })
        .collect();
    let variance = rho_moments
        .iter()
        .find(|m| m.rho == 2.0)
        .map(|m| m.moment)
        .unwrap_or_default();
    let min_profit = per_row_profit.iter().copied().fold(f64::INFINITY, f64::min);

    Ok(PricingReport {
        expected_price: weighted_sum(masses, prices),
        expected_profit_mu: mu,
        per_row_profit,
        per_row_deviation_h,
        variance,
        rho_moments,
        min_profit,
    })
}

/// Whether `Σ p f` matches `Σ q f` within `tolerance · max(1, Σ q f)`.
pub fn is_fair(table: &ScenarioTable, prices: &[f64], tolerance: f64) -> bool {
    if prices.len() != table.len() {
        return false;
    }
    let expected = expected_starting_price(table);
    (weighted_sum(table.masses(), prices) - expected).abs() <= tolerance * expected.max(1.0)
}

/// Strict sign check, no tolerance.
pub fn is_nonnegative(prices: &[f64]) -> bool {
    prices.iter().all(|&p| p >= 0.0)
}

/// One distinct demand with its empirical frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmfEntry {
    pub demand: DemandVector,
    pub mass: f64,
}

/// An estimated demand distribution without prices or revenues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmfSkeleton {
    pub dim: usize,
    pub entries: Vec<PmfEntry>,
}

impl PmfSkeleton {
    /// Attaches starting prices and revenues (aligned with `entries`).
    pub fn into_table(self, starting_prices: &[f64], revenues: &[f64]) -> Result<ScenarioTable> {
        check_len(self.entries.len(), starting_prices.len())?;
        check_len(self.entries.len(), revenues.len())?;
        let rows = self
            .entries
            .into_iter()
            .zip(starting_prices.iter().zip(revenues))
            .map(|(e, (&q, &v))| RawRow::new(e.demand.into_inner(), e.mass, q, v))
            .collect();
        validate_table(rows)
    }
}

/// Empirical distribution of an observed usage history.
///
/// Each distinct demand gets mass `count / total`; entries are ordered by first
/// appearance.
pub fn estimate_pmf(history: &[DemandVector]) -> Result<PmfSkeleton> {
    let first = history.first().ok_or(PricingError::EmptyHistory)?;
    let dim = first.dim();
    let mut counts: Vec<(usize, u64)> = Vec::new();
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    for (i, draw) in history.iter().enumerate() {
        if draw.dim() != dim {
            return Err(PricingError::DimensionMismatch {
                expected: dim,
                found: draw.dim(),
            });
        }
        let key = demand_key(draw.coordinates());
        match index.get(&key) {
            Some(&slot) => counts[slot].1 += 1,
            None => {
                index.insert(key, counts.len());
                counts.push((i, 1));
            }
        }
    }
    let total = history.len() as f64;
    let entries = counts
        .into_iter()
        .map(|(i, c)| PmfEntry {
            demand: history[i].clone(),
            mass: c as f64 / total,
        })
        .collect();
    Ok(PmfSkeleton { dim, entries })
}
