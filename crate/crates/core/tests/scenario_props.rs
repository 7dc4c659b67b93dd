mod common;

use proptest::prelude::*;
use steadyprice_core::scenario::io::{parse_scenario, write_scenario_csv};
use steadyprice_core::{estimate_pmf, profit_stats, validate_table, DemandVector, RawRow};

fn raw_rows() -> impl Strategy<Value = Vec<RawRow>> {
    (1usize..4)
        .prop_flat_map(|m| {
            prop::collection::vec(
                (
                    prop::collection::vec(0u8..3, m),
                    0.01f64..1.0,
                    0.0f64..5.0,
                    -5.0f64..10.0,
                ),
                1..12,
            )
        })
        .prop_map(|rows| {
            let total: f64 = rows.iter().map(|r| r.1).sum();
            let mut seen = std::collections::HashMap::new();
            rows.into_iter()
                .map(|(d, w, q, v)| {
                    let demand: Vec<f64> = d.iter().map(|&x| x as f64).collect();
                    // duplicated demand vectors must repeat their prices
                    let key = d.clone();
                    let (q, v) = *seen.entry(key).or_insert((q, v));
                    RawRow::new(demand, w / total, q, v)
                })
                .collect()
        })
}

proptest! {
    #[test]
    fn variance_matches_weighted_squares(rows in raw_rows(), shift in -3.0f64..3.0) {
        let table = validate_table(rows).unwrap();
        let prices: Vec<f64> = table.starting_prices().iter().map(|q| (q + shift).max(0.0)).collect();
        let report = profit_stats(&table, &prices, &[1.5, 3.0]).unwrap();
        prop_assert!(report.variance >= 0.0);
        let direct: f64 = report.per_row_deviation_h.iter().zip(table.masses()).map(|(h, f)| h * h * f).sum();
        prop_assert!((report.variance - direct).abs() <= 1e-9 * direct.max(1e-300) + 1e-15);
        let mu: f64 = table.revenues().iter().zip(&prices).zip(table.masses()).map(|((v, p), f)| (v - p) * f).sum();
        prop_assert!((report.expected_profit_mu - mu).abs() <= 1e-9 * mu.abs().max(1.0));
        prop_assert_eq!(report.moment(2.0), Some(report.variance));
    }

    #[test]
    fn fair_prices_preserve_mean_profit(rows in raw_rows()) {
        let table = validate_table(rows).unwrap();
        let report = profit_stats(&table, table.starting_prices(), &[]).unwrap();
        let expected = table.fair_mean_profit();
        prop_assert!((report.expected_profit_mu - expected).abs() <= 1e-9 * expected.abs().max(1.0));
    }

    #[test]
    fn validation_is_idempotent(rows in raw_rows()) {
        let once = validate_table(rows).unwrap();
        let twice = validate_table(once.to_raw_rows()).unwrap();
        prop_assert_eq!(&once, &twice);
        let total: f64 = once.masses().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn csv_round_trip(rows in raw_rows()) {
        let table = validate_table(rows).unwrap();
        let back = parse_scenario(&write_scenario_csv(&table)).unwrap();
        prop_assert_eq!(table, back);
    }

    #[test]
    fn empirical_masses_are_frequencies(history in prop::collection::vec(prop::collection::vec(0u8..3, 2), 1..40)) {
        let demands: Vec<DemandVector> = history
            .iter()
            .map(|d| DemandVector::new(d.iter().map(|&x| x as f64).collect()).unwrap())
            .collect();
        let skeleton = estimate_pmf(&demands).unwrap();
        let total: f64 = skeleton.entries.iter().map(|e| e.mass).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        for entry in &skeleton.entries {
            let count = demands.iter().filter(|d| *d == &entry.demand).count();
            prop_assert!((entry.mass - count as f64 / demands.len() as f64).abs() <= 1e-15);
        }
    }
}
