//! Random scenario tables for the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steadyprice_core::{validate_table, RawRow, ScenarioTable};

/// `n` rows over `m` resources with distinct demands, revenue in `[0, 100)` and
/// a starting price that keeps the water-level problem feasible.
pub fn random_table(n: usize, m: usize, seed: u64) -> ScenarioTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    let total: f64 = weights.iter().sum();
    let rows = weights
        .into_iter()
        .enumerate()
        .map(|(k, w)| {
            let mut demand: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..10.0)).collect();
            demand[0] = k as f64;
            RawRow::new(
                demand,
                w / total,
                rng.gen_range(0.0..20.0),
                rng.gen_range(0.0..100.0),
            )
        })
        .collect();
    validate_table(rows).expect("generated table is valid")
}
