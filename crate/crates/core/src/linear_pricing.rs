//! Fair linear price functions with non-negative coefficients.
//!
//! Prices are `p(r) = a_0 + Σ a_i r_i` with every `a_i ≥ 0`, so paying more
//! never buys less. The coefficients minimize the profit variance among fair
//! such functions. The variance objective is written as a least-squares
//! problem over `√f`-weighted rows, and fairness is imposed by appending one
//! row weighted by a large factor `M`; the non-negative least squares solver
//! then does all the work.

use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};
use crate::nnls::{min_norm_least_squares, nnls_solve, LsProblem};
use crate::scenario::{check_len, expected_starting_price, homogeneous, ScenarioTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearPriceFunction {
    /// `m + 1` non-negative coefficients; index 0 is the intercept.
    pub coefficients: Vec<f64>,
    pub achieved_variance: f64,
    pub fairness_residual: f64,
    pub big_m_used: f64,
}

impl LinearPriceFunction {
    pub fn evaluate(&self, demand: &[f64]) -> f64 {
        self.coefficients[0]
            + self.coefficients[1..]
                .iter()
                .zip(demand)
                .map(|(a, r)| a * r)
                .sum::<f64>()
    }

    pub fn row_prices(&self, table: &ScenarioTable) -> Vec<f64> {
        (0..table.len())
            .map(|k| self.evaluate(table.demand(k)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearOptions {
    /// Relative KKT tolerance handed to the NNLS solver.
    pub nnls_tolerance: f64,
    pub nnls_max_iterations: Option<usize>,
    /// Target `|ȳ − aᵀx̄| ≤ fairness_tolerance · max(1, Σ q f)`.
    pub fairness_tolerance: f64,
    pub big_m_cap: f64,
    /// Re-solve the fairness equality exactly on the support found by the
    /// big-M fit, keeping the result when it stays non-negative.
    pub polish: bool,
}

impl Default for LinearOptions {
    fn default() -> Self {
        LinearOptions {
            nnls_tolerance: 1e-12,
            nnls_max_iterations: None,
            fairness_tolerance: 1e-9,
            big_m_cap: 1e15,
            polish: true,
        }
    }
}

/// Probability-weighted means of the homogeneous demand (`x̄`) and of `v − μ` (`ȳ`).
pub fn weighted_means(table: &ScenarioTable, mu: f64) -> (Vec<f64>, f64) {
    let mut x_bar = vec![0.0; table.dim() + 1];
    let mut y_bar = 0.0;
    for row in table.rows() {
        x_bar[0] += row.mass;
        for (acc, r) in x_bar[1..].iter_mut().zip(row.demand) {
            *acc += r * row.mass;
        }
        y_bar += (row.revenue - mu) * row.mass;
    }
    (x_bar, y_bar)
}

/// Regression rows `r_k·√f_k → (v_k − μ)·√f_k`, followed by the fairness row
/// `M·x̄ → M·ȳ`.
pub fn build_ls_problem(table: &ScenarioTable, mu: f64, big_m: f64) -> Result<LsProblem> {
    if !(big_m > 0.0 && big_m.is_finite()) {
        return Err(PricingError::InvalidArgument(format!(
            "big M must be positive and finite, got {big_m}"
        )));
    }
    let n = table.len();
    let cols = table.dim() + 1;
    let mut design = Vec::with_capacity((n + 1) * cols);
    let mut target = Vec::with_capacity(n + 1);
    for row in table.rows() {
        let w = row.mass.sqrt();
        design.extend(homogeneous(row.demand).into_iter().map(|x| x * w));
        target.push((row.revenue - mu) * w);
    }
    let (x_bar, y_bar) = weighted_means(table, mu);
    design.extend(x_bar.iter().map(|x| x * big_m));
    target.push(y_bar * big_m);
    LsProblem::new(n + 1, cols, design, target)
}

pub fn linear_pricing(table: &ScenarioTable) -> Result<LinearPriceFunction> {
    linear_pricing_with(table, &LinearOptions::default())
}

/// Minimum-variance fair linear price with non-negative coefficients, using
/// `μ = Σ (v − q) f`.
pub fn linear_pricing_with(
    table: &ScenarioTable,
    options: &LinearOptions,
) -> Result<LinearPriceFunction> {
    fit_with_mean(table, table.fair_mean_profit(), options)
}

/// The big-M fit for an arbitrary profit mean `mu`.
///
/// Starting from `M₀ = 10³·(1 + |ȳ|/(1 + ‖x̄‖))`, `M` doubles until the
/// fairness residual `|ȳ − aᵀx̄|` is within tolerance. Two consecutive
/// doublings that each shrink the residual by less than 10% (or exceeding the
/// cap) mean no non-negative coefficients can satisfy the fairness equality.
pub fn fit_with_mean(
    table: &ScenarioTable,
    mu: f64,
    options: &LinearOptions,
) -> Result<LinearPriceFunction> {
    let (x_bar, y_bar) = weighted_means(table, mu);
    let x_norm = x_bar.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tolerance = options.fairness_tolerance * expected_starting_price(table).max(1.0);

    let scales = column_scales(table);

    let mut big_m = 1e3 * (1.0 + y_bar.abs() / (1.0 + x_norm));
    let mut previous: Option<f64> = None;
    let mut stagnant = 0;
    loop {
        let problem = build_ls_problem(table, mu, big_m)?.with_column_scales(&scales)?;
        let solution = nnls_solve(
            &problem,
            options.nnls_tolerance,
            options.nnls_max_iterations,
        )?;
        let a: Vec<f64> = solution
            .coefficients
            .iter()
            .zip(&scales)
            .map(|(b, s)| b / s)
            .collect();
        let residual = (y_bar - dot(&a, &x_bar)).abs();
        if residual <= tolerance {
            let mut fit = LinearPriceFunction {
                achieved_variance: centered_variance(table, &a, mu),
                coefficients: a,
                fairness_residual: residual,
                big_m_used: big_m,
            };
            if options.polish {
                if let Some(b) = polish_on_support(table, mu, &fit.coefficients, &scales) {
                    let variance = centered_variance(table, &b, mu);
                    let fair = (y_bar - dot(&b, &x_bar)).abs();
                    let slack = 1e-9 * fit.achieved_variance.max(1.0);
                    if fair <= residual && variance <= fit.achieved_variance + slack {
                        fit.coefficients = b;
                        fit.achieved_variance = variance;
                        fit.fairness_residual = fair;
                    }
                }
            }
            return Ok(fit);
        }
        if let Some(prev) = previous {
            stagnant = if residual > 0.9 * prev {
                stagnant + 1
            } else {
                0
            };
        }
        if stagnant >= 2 || big_m * 2.0 > options.big_m_cap {
            return Err(PricingError::FairnessUnreachable { residual, big_m });
        }
        previous = Some(residual);
        big_m *= 2.0;
    }
}

/// Exactly fair least squares restricted to the support of `a`.
///
/// One support coordinate (the one with the largest scaled weight in `x̄`) is
/// eliminated through the fairness equality and the rest solved without
/// constraints. Returns `None` when the result leaves the non-negative orthant.
fn polish_on_support(
    table: &ScenarioTable,
    mu: f64,
    a: &[f64],
    scales: &[f64],
) -> Option<Vec<f64>> {
    let (x_bar, y_bar) = weighted_means(table, mu);
    let support: Vec<usize> = (0..a.len()).filter(|&i| a[i] > 0.0).collect();
    let w: Vec<f64> = x_bar.iter().zip(scales).map(|(x, s)| x / s).collect();
    let &pivot = support
        .iter()
        .max_by(|&&i, &&j| w[i].abs().total_cmp(&w[j].abs()))?;
    if w[pivot] == 0.0 {
        return None;
    }
    let free: Vec<usize> = support.iter().copied().filter(|&i| i != pivot).collect();

    let n = table.len();
    let k = free.len();
    let mut design = vec![0.0; n * k];
    let mut target = vec![0.0; n];
    for (row_index, row) in table.rows().enumerate() {
        let sqrt_f = row.mass.sqrt();
        let x = homogeneous(row.demand);
        let c = |i: usize| x[i] * sqrt_f / scales[i];
        let c_pivot = c(pivot);
        for (col, &i) in free.iter().enumerate() {
            design[col * n + row_index] = c(i) - c_pivot * w[i] / w[pivot];
        }
        target[row_index] = (row.revenue - mu) * sqrt_f - c_pivot * y_bar / w[pivot];
    }
    let solved = if k == 0 {
        Vec::new()
    } else {
        min_norm_least_squares(&mut design, &mut target, n, k)
    };

    let mut b = vec![0.0; a.len()];
    let mut rest = 0.0;
    for (&i, &value) in free.iter().zip(&solved) {
        b[i] = value;
        rest += w[i] * value;
    }
    b[pivot] = (y_bar - rest) / w[pivot];
    if b.iter().any(|&x| x.is_nan() || x < 0.0) {
        return None;
    }
    Some(b.iter().zip(scales).map(|(b, s)| b / s).collect())
}

/// Weighted RMS of each homogeneous demand coordinate (1 for all-zero columns),
/// so that the regression columns enter the solver on a common scale.
fn column_scales(table: &ScenarioTable) -> Vec<f64> {
    let mut sums = vec![0.0; table.dim() + 1];
    for row in table.rows() {
        sums[0] += row.mass;
        for (acc, r) in sums[1..].iter_mut().zip(row.demand) {
            *acc += r * r * row.mass;
        }
    }
    sums.into_iter()
        .map(|s| if s > 0.0 { s.sqrt() } else { 1.0 })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `Σ (v_k − aᵀr_k − μ)² f_k`.
fn centered_variance(table: &ScenarioTable, a: &[f64], mu: f64) -> f64 {
    let lin = LinearPriceFunction {
        coefficients: a.to_vec(),
        achieved_variance: 0.0,
        fairness_residual: 0.0,
        big_m_used: 0.0,
    };
    table
        .rows()
        .map(|row| {
            let h = row.revenue - lin.evaluate(row.demand) - mu;
            h * h * row.mass
        })
        .sum()
}

/// `|Σ p(r_k) f_k − Σ q_k f_k|`.
pub fn fairness_residual(table: &ScenarioTable, lin: &LinearPriceFunction) -> Result<f64> {
    check_len(table.dim() + 1, lin.coefficients.len())?;
    let expected_price: f64 = table
        .rows()
        .map(|row| lin.evaluate(row.demand) * row.mass)
        .sum();
    Ok((expected_price - expected_starting_price(table)).abs())
}
