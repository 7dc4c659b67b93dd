//! Steady-profit pricing by water filling.
//!
//! Prices have the form `p_k = max(v_k − L, 0)`: the customer keeps exactly `L`
//! wherever a price is charged and keeps all of `v_k ≤ L` elsewhere. The level
//! `L` is chosen so the expected price equals the expected starting price.
//!
//! `G(L) = Σ max(v_k − L, 0) f_k` is continuous, piecewise linear and
//! non-increasing with breakpoints at the distinct revenues, so the level is
//! found by locating the bracketing linear piece and inverting it. Large tables
//! first narrow the search to one bucket between sampled revenues, so only a
//! small fraction of the rows is ever sorted.

use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};
use crate::scenario::{expected_starting_price, ScenarioTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LevelMethod {
    /// Locate the bracketing linear piece and solve it in closed form.
    #[default]
    Exact,
    /// Bisection on `L` down to an absolute expectation error of `1e-12`.
    Bisection,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LevelOptions {
    /// Permit `L < 0`. Prices stay non-negative but the customer can lose money.
    pub allow_negative_level: bool,
    pub method: LevelMethod,
}

/// Output of [`waterlevel_pricing`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedPriceFunction {
    /// `max(v_k − level, 0)`, aligned with the table rows.
    pub prices: Vec<f64>,
    pub level: f64,
    /// Set when the level is below zero, so profits may be negative.
    pub negative_level: bool,
}

/// `max(v_k − level, 0)` for every row.
pub fn threshold_revenue(table: &ScenarioTable, level: f64) -> Vec<f64> {
    table
        .revenues()
        .iter()
        .map(|&v| (v - level).max(0.0))
        .collect()
}

/// `G(level)` and the mass strictly above the level.
fn clamped_expectation(table: &ScenarioTable, level: f64) -> (f64, f64) {
    let mut value = 0.0;
    let mut mass_above = 0.0;
    for (&v, &f) in table.revenues().iter().zip(table.masses()) {
        if v > level {
            value += (v - level) * f;
            mass_above += f;
        }
    }
    (value, mass_above)
}

pub fn solve_level(table: &ScenarioTable) -> Result<f64> {
    solve_level_with(table, &LevelOptions::default())
}

/// Finds the water level `L` with `Σ max(v − L, 0) f = Σ q f`.
///
/// Without `allow_negative_level`, `L ∈ [0, max v]` and the table must satisfy
/// `Σ q f ≤ Σ max(v, 0) f`. When the starting price is identically zero the
/// smallest valid level, `max v`, is returned.
pub fn solve_level_with(table: &ScenarioTable, options: &LevelOptions) -> Result<f64> {
    let target = expected_starting_price(table);
    let max_v = table.max_revenue();
    let floor = if options.allow_negative_level {
        f64::NEG_INFINITY
    } else {
        0.0
    };

    if target == 0.0 {
        return Ok(max_v.max(floor));
    }
    if !options.allow_negative_level {
        let attainable = clamped_expectation(table, 0.0).0;
        if target > attainable * (1.0 + 1e-12) {
            return Err(PricingError::InfeasibleFairness {
                expected_price: target,
                attainable,
            });
        }
    }

    match options.method {
        LevelMethod::Exact => Ok(solve_exact(table, target, floor)),
        LevelMethod::Bisection => Ok(solve_bisection(table, target, floor)),
    }
}

/// Tables up to this size are solved by sorting every row.
const SORT_ROWS: usize = 4096;
/// Sample splitters used to bracket the level on larger tables.
const BUCKETS: usize = 256;

fn solve_exact(table: &ScenarioTable, target: f64, floor: f64) -> f64 {
    let v = table.revenues();
    let f = table.masses();
    let level = if v.len() <= SORT_ROWS {
        let points = v.iter().copied().zip(f.iter().copied()).collect();
        scan_sorted(points, 0.0, 0.0, floor, f64::INFINITY, target)
    } else {
        solve_bucketed(v, f, target, floor)
    };
    polish(table, target, level, floor)
}

/// Bins every row between sampled splitters in one pass, finds the bucket
/// whose revenue range holds the level, and solves that bucket exactly.
fn solve_bucketed(v: &[f64], f: &[f64], target: f64, floor: f64) -> f64 {
    let stride = v.len() / BUCKETS;
    let mut splitters: Vec<f64> = (0..BUCKETS).map(|k| v[k * stride + stride / 2]).collect();
    splitters.sort_unstable_by(f64::total_cmp);
    splitters.dedup();
    let b = splitters.len();

    // Bucket j holds splitters[j-1] ≤ v < splitters[j].
    let bucket_of = |x: f64| splitters.partition_point(|s| *s <= x);
    let mut mass = vec![0.0; b + 1];
    let mut weighted = vec![0.0; b + 1];
    for (&x, &m) in v.iter().zip(f) {
        let j = bucket_of(x);
        mass[j] += m;
        weighted[j] += x * m;
    }

    // Largest splitter s_i with Σ_{v > s_i} (v − s_i) f ≥ target bounds the
    // level from below; the level then lies in bucket i + 1.
    let (mut above_mass, mut above_weighted) = (0.0, 0.0);
    let mut bracket = 0;
    for i in (0..b).rev() {
        let (m, w) = (above_mass + mass[i + 1], above_weighted + weighted[i + 1]);
        if w - splitters[i] * m >= target {
            bracket = i + 1;
            break;
        }
        above_mass = m;
        above_weighted = w;
    }
    let lower = if bracket == 0 {
        floor
    } else {
        splitters[bracket - 1].max(floor)
    };
    let upper = splitters.get(bracket).copied().unwrap_or(f64::INFINITY);

    let points = v
        .iter()
        .copied()
        .zip(f.iter().copied())
        .filter(|&(x, _)| bucket_of(x) == bracket)
        .collect();
    scan_sorted(points, above_mass, above_weighted, lower, upper, target)
}

/// Exact level below `ceiling` given the rows above it (`mass`, `weighted`).
///
/// On the segment between consecutive revenues the clamped expectation is
/// `weighted − L·mass` over the rows at or above the segment, so the level is
/// found by walking the revenues downward and inverting on the first segment
/// that reaches `target`.
fn scan_sorted(
    mut points: Vec<(f64, f64)>,
    mut mass: f64,
    mut weighted: f64,
    floor: f64,
    ceiling: f64,
    target: f64,
) -> f64 {
    points.sort_unstable_by(|a, b| b.0.total_cmp(&a.0));
    let mut upper = ceiling;
    let mut i = 0;
    loop {
        let next = points.get(i).map_or(f64::NEG_INFINITY, |p| p.0).max(floor);
        if mass > 0.0 && weighted - next * mass >= target {
            return ((weighted - target) / mass).clamp(next, upper);
        }
        if i == points.len() || next == floor {
            return floor;
        }
        upper = points[i].0;
        while i < points.len() && points[i].0 == upper {
            mass += points[i].1;
            weighted += points[i].0 * points[i].1;
            i += 1;
        }
    }
}

// Newton steps on the exact piecewise-linear map to remove accumulated
// summation error from the running sums.
fn polish(table: &ScenarioTable, target: f64, mut level: f64, floor: f64) -> f64 {
    let (mut value, mut mass_above) = clamped_expectation(table, level);
    for _ in 0..2 {
        let error = value - target;
        if error == 0.0 || mass_above == 0.0 {
            break;
        }
        let candidate = (level + error / mass_above).max(floor);
        let (v2, m2) = clamped_expectation(table, candidate);
        if (v2 - target).abs() >= error.abs() {
            break;
        }
        level = candidate;
        value = v2;
        mass_above = m2;
    }
    level
}

fn solve_bisection(table: &ScenarioTable, target: f64, floor: f64) -> f64 {
    let max_v = table.max_revenue();
    let mut lo = if floor.is_finite() {
        floor
    } else {
        let mean_v: f64 = crate::scenario::weighted_sum(table.masses(), table.revenues());
        let min_v = table
            .revenues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        min_v.min(mean_v - target) - 1.0
    };
    let mut hi = max_v.max(lo);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        let (value, _) = clamped_expectation(table, mid);
        if (value - target).abs() <= 1e-12 || mid <= lo || mid >= hi {
            return mid;
        }
        if value > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn waterlevel_pricing(table: &ScenarioTable) -> Result<TabulatedPriceFunction> {
    waterlevel_pricing_with(table, &LevelOptions::default())
}

/// The steady-profit price function `p = max(v − L, 0)`.
pub fn waterlevel_pricing_with(
    table: &ScenarioTable,
    options: &LevelOptions,
) -> Result<TabulatedPriceFunction> {
    let level = solve_level_with(table, options)?;
    Ok(TabulatedPriceFunction {
        prices: threshold_revenue(table, level),
        level,
        negative_level: level < 0.0,
    })
}
