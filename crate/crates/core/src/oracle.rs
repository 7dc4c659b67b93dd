//! Independent checks for the pricing schemes.
//!
//! The brute-force oracles share no code with the algorithms they check: the
//! steady-profit oracle enumerates a price grid, and the linear oracle
//! enumerates active sets and solves each equality-constrained least-squares
//! problem by elimination. The simulator replays the customer's running
//! capital under a price function.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PricingError, Result};
use crate::scenario::{
    check_len, expected_starting_price, normalize_rho_set, profit_stats, ScenarioTable,
};
use crate::scheme::{price_table, Scheme};
use crate::waterfill::LevelOptions;

pub const MAX_ORACLE_ROWS: usize = 6;
pub const MAX_ORACLE_RESOURCES: usize = 2;
/// Upper bound on the size of the steady-pricing grid before pruning.
pub const MAX_GRID_POINTS: usize = 10_000_000_000;

fn check_rows(table: &ScenarioTable) -> Result<()> {
    if table.len() > MAX_ORACLE_ROWS {
        return Err(PricingError::TooLarge {
            what: "rows",
            actual: table.len(),
            limit: MAX_ORACLE_ROWS,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridBest {
    pub rho: f64,
    pub prices: Vec<f64>,
    pub moment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyOracleResult {
    /// Best candidate per moment order, ascending in `ρ`.
    pub per_rho: Vec<GridBest>,
    /// Largest minimum profit over all candidates.
    pub max_min_profit: f64,
    pub max_min_prices: Vec<f64>,
    pub candidates: u64,
}

impl SteadyOracleResult {
    pub fn best(&self, rho: f64) -> Option<&GridBest> {
        self.per_rho.iter().find(|b| b.rho == rho)
    }
}

struct GridSearch<'a> {
    rhos: &'a [f64],
    mu: f64,
    target: f64,
    slack: f64,
    free: usize,
    free_mass: f64,
    free_revenue: f64,
    // Per enumerated coordinate, per grid index.
    order: Vec<usize>,
    price: Vec<Vec<f64>>,
    spend: Vec<Vec<f64>>,
    profit: Vec<Vec<f64>>,
    cost: Vec<Vec<Vec<f64>>>,
    // Search state.
    path: Vec<usize>,
    acc_cost: Vec<Vec<f64>>,
    best: Vec<(f64, Vec<f64>)>,
    best_min: (f64, Vec<f64>),
    candidates: u64,
}

impl GridSearch<'_> {
    fn descend(&mut self, depth: usize, spend: f64, min_profit: f64) {
        if depth == self.order.len() {
            self.leaf(spend, min_profit);
            return;
        }
        for i in 0..self.price[depth].len() {
            let s = spend + self.spend[depth][i];
            if s > self.target + self.slack {
                break;
            }
            self.path[depth] = i;
            for r in 0..self.rhos.len() {
                self.acc_cost[depth + 1][r] = self.acc_cost[depth][r] + self.cost[depth][r][i];
            }
            let m = min_profit.min(self.profit[depth][i]);
            self.descend(depth + 1, s, m);
        }
    }

    fn leaf(&mut self, spend: f64, min_profit: f64) {
        let mut p_free = (self.target - spend) / self.free_mass;
        if p_free < 0.0 {
            if p_free < -self.slack / self.free_mass {
                return;
            }
            p_free = 0.0;
        }
        self.candidates += 1;
        let depth = self.order.len();
        let h = self.free_revenue - p_free - self.mu;
        for (r, &rho) in self.rhos.iter().enumerate() {
            let tail = if rho == 2.0 { h * h } else { h.abs().powf(rho) };
            let total = self.acc_cost[depth][r] + self.free_mass * tail;
            if total < self.best[r].0 {
                self.best[r].0 = total;
                self.best[r].1 = self.current_prices(p_free);
            }
        }
        let m = min_profit.min(self.free_revenue - p_free);
        if m > self.best_min.0 {
            self.best_min = (m, self.current_prices(p_free));
        }
    }

    fn current_prices(&self, p_free: f64) -> Vec<f64> {
        let mut prices = vec![0.0; self.order.len() + 1];
        for (d, &k) in self.order.iter().enumerate() {
            prices[k] = self.price[d][self.path[d]];
        }
        prices[self.free] = p_free;
        prices
    }
}

/// Grid search over fair non-negative tabulated prices.
///
/// All rows but the heaviest take prices `i·grid_step` in `[0, max(v, q)]`;
/// the heaviest row's price is then solved from the fairness equality, so every
/// candidate is exactly fair. Returns the candidate with the smallest absolute
/// `ρ`-moment of profit deviation for each requested `ρ` (plus `ρ = 2`), and
/// the candidate with the largest minimum profit.
pub fn brute_force_steady(
    table: &ScenarioTable,
    grid_step: f64,
    rho_set: &[f64],
) -> Result<SteadyOracleResult> {
    check_rows(table)?;
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(PricingError::InvalidArgument(format!(
            "grid step must be positive, got {grid_step}"
        )));
    }
    let rhos = normalize_rho_set(rho_set)?;
    let n = table.len();
    let f = table.masses();
    let v = table.revenues();
    let q = table.starting_prices();
    let target = expected_starting_price(table);
    let mu = table.fair_mean_profit();

    let bound = v.iter().chain(q).copied().fold(0.0f64, f64::max);
    let steps = (bound / grid_step + 1e-9).floor() as usize;

    let mut free = 0;
    for k in 1..n {
        if f[k] > f[free] {
            free = k;
        }
    }
    let order: Vec<usize> = (0..n).filter(|&k| k != free).collect();
    let points = order.iter().fold(1.0f64, |acc, &k| {
        let cap = bound.min(target / f[k] + grid_step);
        acc * ((cap / grid_step).floor() + 1.0)
    });
    if points > MAX_GRID_POINTS as f64 {
        return Err(PricingError::TooLarge {
            what: "grid points",
            actual: points.min(usize::MAX as f64) as usize,
            limit: MAX_GRID_POINTS,
        });
    }

    let mut search = GridSearch {
        rhos: &rhos,
        mu,
        target,
        slack: 1e-12 * target.max(1.0),
        free,
        free_mass: f[free],
        free_revenue: v[free],
        price: Vec::new(),
        spend: Vec::new(),
        profit: Vec::new(),
        cost: Vec::new(),
        path: vec![0; order.len()],
        acc_cost: vec![vec![0.0; rhos.len()]; order.len() + 1],
        best: vec![(f64::INFINITY, Vec::new()); rhos.len()],
        best_min: (f64::NEG_INFINITY, Vec::new()),
        candidates: 0,
        order,
    };
    for &k in &search.order {
        let prices: Vec<f64> = (0..=steps).map(|i| i as f64 * grid_step).collect();
        search.spend.push(prices.iter().map(|p| p * f[k]).collect());
        search
            .profit
            .push(prices.iter().map(|p| v[k] - p).collect());
        search.cost.push(
            rhos.iter()
                .map(|&rho| {
                    prices
                        .iter()
                        .map(|p| {
                            let h = v[k] - p - mu;
                            f[k] * if rho == 2.0 { h * h } else { h.abs().powf(rho) }
                        })
                        .collect()
                })
                .collect(),
        );
        search.price.push(prices);
    }
    search.descend(0, 0.0, f64::INFINITY);

    let per_rho = rhos
        .iter()
        .zip(search.best)
        .map(|(&rho, (moment, prices))| GridBest {
            rho,
            prices,
            moment,
        })
        .collect();
    Ok(SteadyOracleResult {
        per_rho,
        max_min_profit: search.best_min.0,
        max_min_prices: search.best_min.1,
        candidates: search.candidates,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearOracleResult {
    pub coefficients: Vec<f64>,
    pub variance: f64,
    /// Number of active sets that produced a feasible point.
    pub feasible_sets: usize,
}

/// Exact minimum-variance fair linear price with non-negative coefficients by
/// enumerating which coefficients are held at zero.
///
/// For each of the `2^(m+1)` zero patterns the remaining coefficients solve the
/// equality-constrained weighted least-squares problem through its KKT system
/// `[A x̄; x̄ᵀ 0][a; λ] = [b; Σ q f]`.
pub fn brute_force_linear(table: &ScenarioTable) -> Result<LinearOracleResult> {
    check_rows(table)?;
    if table.dim() > MAX_ORACLE_RESOURCES {
        return Err(PricingError::TooLarge {
            what: "resources",
            actual: table.dim(),
            limit: MAX_ORACLE_RESOURCES,
        });
    }
    let d = table.dim() + 1;
    let mu = table.fair_mean_profit();
    let target = expected_starting_price(table);

    let hom = |k: usize| -> Vec<f64> {
        std::iter::once(1.0)
            .chain(table.demand(k).iter().copied())
            .collect()
    };
    let mut gram = vec![vec![0.0; d]; d];
    let mut moment = vec![0.0; d];
    let mut mean = vec![0.0; d];
    for k in 0..table.len() {
        let r = hom(k);
        let f = table.masses()[k];
        let c = table.revenues()[k] - mu;
        for i in 0..d {
            for j in 0..d {
                gram[i][j] += f * r[i] * r[j];
            }
            moment[i] += f * c * r[i];
            mean[i] += f * r[i];
        }
    }
    let variance_of = |a: &[f64]| -> f64 {
        (0..table.len())
            .map(|k| {
                let p: f64 = hom(k).iter().zip(a).map(|(x, y)| x * y).sum();
                let h = table.revenues()[k] - p - mu;
                table.masses()[k] * h * h
            })
            .sum()
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut feasible_sets = 0;
    for mask in 0u32..(1 << d) {
        let free: Vec<usize> = (0..d).filter(|i| mask & (1 << i) != 0).collect();
        let a = if free.is_empty() {
            if target.abs() > 1e-12 * target.max(1.0) {
                continue;
            }
            vec![0.0; d]
        } else {
            let size = free.len() + 1;
            let mut system = vec![vec![0.0; size]; size];
            let mut rhs = vec![0.0; size];
            for (p, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    system[p][s] = gram[i][j];
                }
                system[p][size - 1] = mean[i];
                system[size - 1][p] = mean[i];
                rhs[p] = moment[i];
            }
            rhs[size - 1] = target;
            let Some(sol) = solve_dense(&system, &rhs) else {
                continue;
            };
            let mut a = vec![0.0; d];
            let mut feasible = true;
            for (p, &i) in free.iter().enumerate() {
                if sol[p] < -1e-12 {
                    feasible = false;
                }
                a[i] = sol[p].max(0.0);
            }
            if !feasible {
                continue;
            }
            a
        };
        feasible_sets += 1;
        let var = variance_of(&a);
        if best.as_ref().is_none_or(|(b, _)| var < *b) {
            best = Some((var, a));
        }
    }
    let (variance, coefficients) = best.ok_or(PricingError::FairnessUnreachable {
        residual: target,
        big_m: 0.0,
    })?;
    Ok(LinearOracleResult {
        coefficients,
        variance,
        feasible_sets,
    })
}

/// Gaussian elimination with complete pivoting. Singular directions are set to
/// zero; returns `None` when the system is inconsistent.
fn solve_dense(matrix: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    let mut m: Vec<Vec<f64>> = matrix.to_vec();
    let mut b = rhs.to_vec();
    let mut cols: Vec<usize> = (0..n).collect();
    let scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |s, x| s.max(x.abs()))
        .max(1e-300);
    let mut rank = 0;
    for s in 0..n {
        let (mut pr, mut pc, mut best) = (s, s, 0.0);
        for (i, row) in m.iter().enumerate().skip(s) {
            for (j, &x) in row.iter().enumerate().skip(s) {
                if x.abs() > best {
                    best = x.abs();
                    pr = i;
                    pc = j;
                }
            }
        }
        if best <= 1e-12 * scale {
            break;
        }
        m.swap(s, pr);
        b.swap(s, pr);
        for row in m.iter_mut() {
            row.swap(s, pc);
        }
        cols.swap(s, pc);
        for i in s + 1..n {
            let factor = m[i][s] / m[s][s];
            if factor != 0.0 {
                for j in s..n {
                    m[i][j] -= factor * m[s][j];
                }
                b[i] -= factor * b[s];
            }
        }
        rank += 1;
    }
    let mut y = vec![0.0; n];
    for i in (0..rank).rev() {
        let mut acc = b[i];
        for j in i + 1..rank {
            acc -= m[i][j] * y[j];
        }
        y[i] = acc / m[i][i];
    }
    let mut x = vec![0.0; n];
    for (pos, &c) in cols.iter().enumerate() {
        x[c] = y[pos];
    }
    let rhs_scale = rhs.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);
    for i in 0..n {
        let lhs: f64 = matrix[i].iter().zip(&x).map(|(a, b)| a * b).sum();
        if (lhs - rhs[i]).abs() > 1e-8 * (scale + rhs_scale) {
            return None;
        }
    }
    Some(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncentiveCheck {
    pub truthful_moment: f64,
    pub misreport_moment: f64,
}

/// Profit variance under the truthful price and under the price computed from
/// a misreported revenue column, both measured against the true revenues.
///
/// For the linear scheme this is meaningful only when the starting price is
/// itself non-negative and linear in the demand.
pub fn check_incentive(
    table: &ScenarioTable,
    misreport: &[f64],
    scheme: Scheme,
) -> Result<IncentiveCheck> {
    check_len(table.len(), misreport.len())?;
    let level = LevelOptions::default();
    let reported = table.with_revenues(misreport)?;
    let truthful_prices = price_table(table, scheme, &level)?.row_prices(table);
    let misreport_prices = price_table(&reported, scheme, &level)?.row_prices(table);
    Ok(IncentiveCheck {
        truthful_moment: profit_stats(table, &truthful_prices, &[])?.variance,
        misreport_moment: profit_stats(table, &misreport_prices, &[])?.variance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// Draws per episode.
    pub draws: u64,
    /// Independent episodes, each restarting from `budget`.
    pub episodes: u64,
    pub seed: u64,
    pub budget: f64,
}

impl SimulationConfig {
    fn validate(&self) -> Result<()> {
        if self.draws == 0 || self.episodes == 0 {
            return Err(PricingError::InvalidArgument(
                "draws and episodes must be at least 1".into(),
            ));
        }
        if !(self.budget >= 0.0 && self.budget.is_finite()) {
            return Err(PricingError::InvalidArgument(format!(
                "budget must be finite and non-negative, got {}",
                self.budget
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub draws: u64,
    pub episodes: u64,
    pub seed: u64,
    pub budget: f64,
    pub analytic_mean_profit: f64,
    pub mean_profit: f64,
    pub profit_variance: f64,
    pub min_profit: f64,
    /// Fraction of episodes whose capital dropped strictly below zero.
    pub ruin_probability: f64,
    pub provider_revenue_mean: f64,
    pub provider_revenue_variance: f64,
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / total as f64;
        self.m2 +=
            other.m2 + delta * delta * (self.count as f64 * other.count as f64) / total as f64;
        self.count = total;
    }

    fn variance(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.m2 / self.count as f64
        }
    }
}

struct Episode {
    profit: Moments,
    revenue: Moments,
    min_profit: f64,
    ruined: bool,
}

/// Monte Carlo replay of the customer's capital under per-row `prices`.
///
/// Episode `e` draws from its own ChaCha stream `(seed, e)`, so the result does
/// not depend on how episodes are scheduled across threads.
pub fn simulate_profits(
    table: &ScenarioTable,
    prices: &[f64],
    config: &SimulationConfig,
) -> Result<SimulationReport> {
    check_len(table.len(), prices.len())?;
    config.validate()?;
    let sampler = WeightedIndex::new(table.masses())
        .map_err(|e| PricingError::InvalidArgument(e.to_string()))?;
    let profits: Vec<f64> = table
        .revenues()
        .iter()
        .zip(prices)
        .map(|(v, p)| v - p)
        .collect();

    let episodes: Vec<Episode> = (0..config.episodes)
        .into_par_iter()
        .map(|e| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(e);
            let mut ep = Episode {
                profit: Moments::default(),
                revenue: Moments::default(),
                min_profit: f64::INFINITY,
                ruined: false,
            };
            let mut capital = config.budget;
            for _ in 0..config.draws {
                let k = sampler.sample(&mut rng);
                let x = profits[k];
                ep.profit.push(x);
                ep.revenue.push(prices[k]);
                ep.min_profit = ep.min_profit.min(x);
                capital += x;
                if capital < 0.0 {
                    ep.ruined = true;
                }
            }
            ep
        })
        .collect();

    let mut profit = Moments::default();
    let mut revenue = Moments::default();
    let mut min_profit = f64::INFINITY;
    let mut ruined = 0u64;
    for ep in &episodes {
        profit.merge(&ep.profit);
        revenue.merge(&ep.revenue);
        min_profit = min_profit.min(ep.min_profit);
        ruined += ep.ruined as u64;
    }

    Ok(SimulationReport {
        draws: config.draws,
        episodes: config.episodes,
        seed: config.seed,
        budget: config.budget,
        analytic_mean_profit: crate::scenario::weighted_sum(table.masses(), &profits),
        mean_profit: profit.mean,
        profit_variance: profit.variance(),
        min_profit,
        ruin_probability: ruined as f64 / config.episodes as f64,
        provider_revenue_mean: revenue.mean,
        provider_revenue_variance: revenue.variance(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{validate_table, RawRow};

    fn table(rows: &[(f64, f64, f64)]) -> ScenarioTable {
        validate_table(
            rows.iter()
                .enumerate()
                .map(|(k, &(f, q, v))| RawRow::new(vec![k as f64], f, q, v))
                .collect(),
        )
        .unwrap()
    }

    fn coin_toss() -> ScenarioTable {
        validate_table(vec![
            RawRow::new(vec![1.0], 0.5, 1.0, 3.0),
            RawRow::new(vec![0.0], 0.5, 1.0, 0.0),
        ])
        .unwrap()
    }

    #[test]
    fn steady_grid_coin_toss() {
        let r = brute_force_steady(&coin_toss(), 0.01, &[]).unwrap();
        let best = r.best(2.0).unwrap();
        assert!((best.prices[0] - 2.0).abs() < 1e-9, "{:?}", best.prices);
        assert!(best.prices[1].abs() < 1e-9);
        assert!((r.max_min_profit - 0.0).abs() < 1e-9);
    }

    #[test]
    fn steady_grid_single_row_is_starting_price() {
        let t = validate_table(vec![RawRow::new(vec![1.0], 1.0, 2.5, 7.0)]).unwrap();
        let r = brute_force_steady(&t, 0.01, &[1.5]).unwrap();
        assert_eq!(r.best(2.0).unwrap().prices, vec![2.5]);
        assert_eq!(r.candidates, 1);
    }

    #[test]
    fn steady_grid_three_level() {
        let t = table(&[(0.25, 2.0, 10.0), (0.25, 2.0, 4.0), (0.5, 2.0, 1.0)]);
        let r = brute_force_steady(&t, 0.01, &[1.5, 3.0]).unwrap();
        for b in &r.per_rho {
            for (got, want) in b.prices.iter().zip([7.0, 1.0, 0.0]) {
                assert!((got - want).abs() < 0.04, "rho {}: {:?}", b.rho, b.prices);
            }
        }
    }

    #[test]
    fn steady_grid_rejects_large_tables() {
        let rows: Vec<_> = (0..7).map(|_| (1.0 / 7.0, 1.0, 2.0)).collect();
        assert!(matches!(
            brute_force_steady(&table(&rows), 0.01, &[]).unwrap_err(),
            PricingError::TooLarge { .. }
        ));
    }

    #[test]
    fn steady_grid_rejects_fine_grids() {
        let rows: Vec<_> = (0..6).map(|_| (1.0 / 6.0, 100.0, 200.0)).collect();
        assert!(matches!(
            brute_force_steady(&table(&rows), 0.01, &[]).unwrap_err(),
            PricingError::TooLarge {
                what: "grid points",
                ..
            }
        ));
    }

    #[test]
    fn linear_oracle_coin_toss() {
        let r = brute_force_linear(&coin_toss()).unwrap();
        assert!(r.coefficients[0].abs() < 1e-12);
        assert!((r.coefficients[1] - 2.0).abs() < 1e-12);
        assert!((r.variance - 0.25).abs() < 1e-12);
    }

    #[test]
    fn linear_oracle_exact_fit() {
        let t = validate_table(
            [1.0, 2.0, 3.0]
                .iter()
                .map(|&r| RawRow::new(vec![r], 1.0 / 3.0, 4.0, 2.0 * r + 1.0))
                .collect(),
        )
        .unwrap();
        let r = brute_force_linear(&t).unwrap();
        assert!(r.coefficients[0].abs() < 1e-9);
        assert!((r.coefficients[1] - 2.0).abs() < 1e-9);
        assert!(r.variance < 1e-18);
    }

    #[test]
    fn linear_oracle_interior_matches_equality_constrained_fit() {
        // v − μ = 1 + r and the fair unconstrained fit (1, 1) is already non-negative.
        let t = validate_table(vec![
            RawRow::new(vec![0.0], 0.5, 2.0, 3.5),
            RawRow::new(vec![2.0], 0.5, 2.0, 5.5),
        ])
        .unwrap();
        let r = brute_force_linear(&t).unwrap();
        assert!(
            (r.coefficients[0] - 1.0).abs() < 1e-12,
            "{:?}",
            r.coefficients
        );
        assert!((r.coefficients[1] - 1.0).abs() < 1e-12);
        assert!(r.variance < 1e-20);
    }

    #[test]
    fn incentive_identity_and_swap() {
        let t = coin_toss();
        let same = check_incentive(&t, t.revenues(), Scheme::Waterlevel).unwrap();
        assert_eq!(same.truthful_moment, same.misreport_moment);
        let swapped = check_incentive(&t, &[0.0, 3.0], Scheme::Waterlevel).unwrap();
        assert_eq!(swapped.truthful_moment, 0.25);
        assert_eq!(swapped.misreport_moment, 6.25);
    }

    #[test]
    fn simulation_coin_toss() {
        let t = coin_toss();
        let cfg = SimulationConfig {
            draws: 50,
            episodes: 2000,
            seed: 7,
            budget: 0.0,
        };
        let steady = simulate_profits(&t, &[2.0, 0.0], &cfg).unwrap();
        assert_eq!(steady.ruin_probability, 0.0);
        assert_eq!(steady.min_profit, 0.0);

        // Flat pricing gives +2 / −1 per toss; from budget 1 two opening tails
        // already push the capital below zero.
        let short = SimulationConfig {
            draws: 2,
            budget: 1.0,
            ..cfg
        };
        let flat = simulate_profits(&t, &[1.0, 1.0], &short).unwrap();
        assert!(flat.ruin_probability >= 0.2, "{}", flat.ruin_probability);
        assert_eq!(simulate_profits(&t, &[1.0, 1.0], &short).unwrap(), flat);

        // From budget 2 the capital only reaches zero after two tails.
        let two = SimulationConfig {
            draws: 2,
            budget: 2.0,
            ..cfg
        };
        assert_eq!(
            simulate_profits(&t, &[1.0, 1.0], &two)
                .unwrap()
                .ruin_probability,
            0.0
        );
    }

    #[test]
    fn simulation_degenerate_table() {
        let t = validate_table(vec![RawRow::new(vec![1.0], 1.0, 1.25, 4.5)]).unwrap();
        let cfg = SimulationConfig {
            draws: 1000,
            episodes: 10,
            seed: 1,
            budget: 0.0,
        };
        let r = simulate_profits(&t, &[1.25], &cfg).unwrap();
        assert_eq!(r.mean_profit, 3.25);
        assert_eq!(r.profit_variance, 0.0);
    }

    #[test]
    fn simulation_rejects_bad_config() {
        let cfg = SimulationConfig {
            draws: 0,
            episodes: 1,
            seed: 0,
            budget: 0.0,
        };
        assert!(simulate_profits(&coin_toss(), &[1.0, 1.0], &cfg).is_err());
    }
}
