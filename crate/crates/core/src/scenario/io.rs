//! Scenario and history file formats.
//!
//! Scenario CSV: header `r_1,…,r_m,f,q,v`, one scenario per line.
//! Scenario JSON: `{ "m": int, "rows": [ { "r": [..], "f": .., "q": .., "v": .. } ] }`.
//! History CSV: header `r_1,…,r_m`, one observed demand per line.
//!
//! Parse errors carry a 1-based line and column; for CSV the column is the
//! field index.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{validate_table, DemandVector, PmfSkeleton, RawRow, ScenarioTable};
use crate::error::{PricingError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub m: usize,
    pub rows: Vec<ScenarioFileRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFileRow {
    pub r: Vec<f64>,
    pub f: f64,
    pub q: f64,
    pub v: f64,
}

fn parse_error(line: u64, column: u64, message: impl Into<String>) -> PricingError {
    PricingError::Parse {
        line,
        column,
        message: message.into(),
    }
}

struct CsvRecord {
    line: u64,
    fields: Vec<String>,
}

fn csv_records(text: &str) -> Result<Vec<CsvRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_error(line, 1, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.iter().all(str::is_empty) {
            continue;
        }
        out.push(CsvRecord {
            line,
            fields: record.iter().map(str::to_owned).collect(),
        });
    }
    Ok(out)
}

/// Checks `r_1,…,r_m` followed by `trailing`; returns `m`.
fn check_header(header: &CsvRecord, trailing: &[&str]) -> Result<usize> {
    let resources = header.fields.len().saturating_sub(trailing.len());
    let expected = header_names(resources.max(1), trailing);
    if resources == 0 || header.fields.len() != expected.len() {
        return Err(parse_error(
            header.line,
            1,
            format!("expected header `{}`", expected.join(",")),
        ));
    }
    for (i, (got, want)) in header.fields.iter().zip(&expected).enumerate() {
        if got != want {
            return Err(parse_error(
                header.line,
                i as u64 + 1,
                format!("expected column `{want}`, found `{got}`"),
            ));
        }
    }
    Ok(resources)
}

fn header_names(resources: usize, trailing: &[&str]) -> Vec<String> {
    (1..=resources)
        .map(|i| format!("r_{i}"))
        .chain(trailing.iter().map(|s| s.to_string()))
        .collect()
}

fn parse_fields(record: &CsvRecord, width: usize) -> Result<Vec<f64>> {
    if record.fields.len() != width {
        return Err(parse_error(
            record.line,
            (record.fields.len().min(width) + 1) as u64,
            format!("expected {width} fields, found {}", record.fields.len()),
        ));
    }
    record
        .fields
        .iter()
        .enumerate()
        .map(|(i, s)| {
            s.parse::<f64>().map_err(|_| {
                parse_error(record.line, i as u64 + 1, format!("`{s}` is not a number"))
            })
        })
        .collect()
}

/// Reads scenario CSV into unvalidated rows.
pub fn parse_scenario_csv(text: &str) -> Result<Vec<RawRow>> {
    let records = csv_records(text)?;
    let (header, body) = records
        .split_first()
        .ok_or_else(|| parse_error(1, 1, "empty scenario file"))?;
    let m = check_header(header, &["f", "q", "v"])?;
    if body.is_empty() {
        return Err(parse_error(header.line + 1, 1, "scenario file has no rows"));
    }
    body.iter()
        .map(|rec| {
            let mut x = parse_fields(rec, m + 3)?;
            let v = x.pop().unwrap_or_default();
            let q = x.pop().unwrap_or_default();
            let f = x.pop().unwrap_or_default();
            Ok(RawRow::new(x, f, q, v))
        })
        .collect()
}

/// Reads scenario JSON into unvalidated rows.
pub fn parse_scenario_json(text: &str) -> Result<Vec<RawRow>> {
    let file: ScenarioFile = serde_json::from_str(text)
        .map_err(|e| parse_error(e.line() as u64, e.column() as u64, e.to_string()))?;
    file.rows
        .into_iter()
        .map(|row| {
            if row.r.len() != file.m {
                return Err(PricingError::DimensionMismatch {
                    expected: file.m,
                    found: row.r.len(),
                });
            }
            Ok(RawRow::new(row.r, row.f, row.q, row.v))
        })
        .collect()
}

/// Parses a scenario file (JSON if it starts with `{`, CSV otherwise) and validates it.
pub fn parse_scenario(text: &str) -> Result<ScenarioTable> {
    let rows = if text.trim_start().starts_with('{') {
        parse_scenario_json(text)?
    } else {
        parse_scenario_csv(text)?
    };
    validate_table(rows)
}

pub fn parse_history_csv(text: &str) -> Result<Vec<DemandVector>> {
    let records = csv_records(text)?;
    let (header, body) = records
        .split_first()
        .ok_or_else(|| parse_error(1, 1, "empty history file"))?;
    let m = check_header(header, &[])?;
    body.iter()
        .map(|rec| {
            let coords = parse_fields(rec, m)?;
            DemandVector::new(coords).map_err(|e| match e {
                PricingError::NegativeDemand { index, value, .. } => parse_error(
                    rec.line,
                    index as u64 + 1,
                    format!("negative demand {value}"),
                ),
                _ => parse_error(rec.line, 1, e.to_string()),
            })
        })
        .collect()
}

fn push_row(out: &mut String, values: impl IntoIterator<Item = f64>) {
    let mut first = true;
    for x in values {
        if !first {
            out.push(',');
        }
        first = false;
        let _ = write!(out, "{x}");
    }
    out.push('\n');
}

/// Writes a table as scenario CSV. `{}` formatting of `f64` round-trips exactly.
pub fn write_scenario_csv(table: &ScenarioTable) -> String {
    let mut out = header_names(table.dim(), &["f", "q", "v"]).join(",");
    out.push('\n');
    for row in table.rows() {
        push_row(
            &mut out,
            row.demand
                .iter()
                .copied()
                .chain([row.mass, row.starting_price, row.revenue]),
        );
    }
    out
}

/// Writes an estimated pmf as CSV with header `r_1,…,r_m,f`.
pub fn write_skeleton_csv(skeleton: &PmfSkeleton) -> String {
    let mut out = header_names(skeleton.dim, &["f"]).join(",");
    out.push('\n');
    for e in &skeleton.entries {
        push_row(
            &mut out,
            e.demand.coordinates().iter().copied().chain([e.mass]),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const COIN: &str = "r_1,f,q,v\n1,0.5,1,3\n0,0.5,1,0\n";

    #[test]
    fn parses_coin_toss_csv() {
        let t = parse_scenario(COIN).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.revenues(), &[3.0, 0.0]);
        assert_eq!(t.starting_prices(), &[1.0, 1.0]);
    }

    #[test]
    fn parses_json() {
        let json = r#"{ "m": 1, "rows": [ { "r": [1], "f": 0.5, "q": 1, "v": 3 },
                                         { "r": [0], "f": 0.5, "q": 1, "v": 0 } ] }"#;
        assert_eq!(parse_scenario(json).unwrap(), parse_scenario(COIN).unwrap());
    }

    #[test]
    fn json_dimension_mismatch() {
        let json = r#"{ "m": 2, "rows": [ { "r": [1], "f": 1, "q": 1, "v": 3 } ] }"#;
        assert!(matches!(
            parse_scenario(json).unwrap_err(),
            PricingError::DimensionMismatch {
                expected: 2,
                found: 1
            }
        ));
    }

    #[test]
    fn empty_csv_is_a_parse_error() {
        assert!(matches!(
            parse_scenario("").unwrap_err(),
            PricingError::Parse { line: 1, .. }
        ));
        assert!(matches!(
            parse_scenario("r_1,f,q,v\n").unwrap_err(),
            PricingError::Parse { .. }
        ));
    }

    #[test]
    fn reports_line_and_column() {
        let err = parse_scenario("r_1,f,q,v\n1,0.5,1,3\n0,0.5,x,0\n").unwrap_err();
        match err {
            PricingError::Parse { line, column, .. } => assert_eq!((line, column), (3, 3)),
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_scenario("r_1,g,q,v\n1,1,1,3\n").unwrap_err();
        match err {
            PricingError::Parse { line, column, .. } => assert_eq!((line, column), (1, 2)),
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_scenario("{ \"m\": 1,\n  \"rows\": [ oops ] }").unwrap_err();
        assert!(matches!(err, PricingError::Parse { line: 2, .. }));
    }

    #[test]
    fn csv_round_trip() {
        let t = parse_scenario("r_1,r_2,f,q,v\n0.1,2,0.3,1.25,-4\n3,0,0.7,0,1e-3\n").unwrap();
        assert_eq!(parse_scenario(&write_scenario_csv(&t)).unwrap(), t);
    }

    #[test]
    fn history_and_skeleton() {
        let h = parse_history_csv("r_1,r_2\n1,0\n1,0\n0,1\n1,0\n").unwrap();
        let s = super::super::estimate_pmf(&h).unwrap();
        assert_eq!(write_skeleton_csv(&s), "r_1,r_2,f\n1,0,0.75\n0,1,0.25\n");
        assert!(matches!(
            parse_history_csv("r_1\n-1\n").unwrap_err(),
            PricingError::Parse {
                line: 2,
                column: 1,
                ..
            }
        ));
    }
}
