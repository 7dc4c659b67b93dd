#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steadyprice_core::{validate_table, RawRow, ScenarioTable};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random feasible table with `n` distinct rows in dimension `m`.
///
/// Revenues lie in `[0, v_max)` and starting prices in `[0, q_max)`; the
/// starting prices are scaled down when the revenues cannot cover them.
pub fn random_table(
    rng: &mut impl Rng,
    n: usize,
    m: usize,
    v_max: f64,
    q_max: f64,
) -> ScenarioTable {
    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..2.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut rows: Vec<RawRow> = weights
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let mut demand: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..4.0)).collect();
            demand[0] += k as f64 * 4.0;
            RawRow::new(
                demand,
                w / total,
                rng.gen_range(0.0..q_max),
                rng.gen_range(0.0..v_max),
            )
        })
        .collect();
    let cover: f64 = rows.iter().map(|r| r.revenue * r.mass).sum();
    let owed: f64 = rows.iter().map(|r| r.starting_price * r.mass).sum();
    if owed > cover {
        let scale = 0.9 * cover / owed;
        for r in &mut rows {
            r.starting_price *= scale;
        }
    }
    validate_table(rows).expect("generated table is valid")
}

/// Starting prices that are a non-negative linear function of demand.
pub fn linear_starting_prices(rng: &mut impl Rng, table: &ScenarioTable, scale: f64) -> Vec<f64> {
    let a: Vec<f64> = (0..=table.dim())
        .map(|_| rng.gen_range(0.0..scale))
        .collect();
    (0..table.len())
        .map(|k| {
            a[0] + table
                .demand(k)
                .iter()
                .zip(&a[1..])
                .map(|(r, c)| r * c)
                .sum::<f64>()
        })
        .collect()
}

pub fn weighted(table: &ScenarioTable, x: &[f64]) -> f64 {
    table.masses().iter().zip(x).map(|(f, x)| f * x).sum()
}

pub fn coin_toss() -> ScenarioTable {
    validate_table(vec![
        RawRow::new(vec![1.0], 0.5, 1.0, 3.0),
        RawRow::new(vec![0.0], 0.5, 1.0, 0.0),
    ])
    .unwrap()
}
