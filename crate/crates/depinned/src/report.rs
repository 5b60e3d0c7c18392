//! Result records and deterministic text output.
//!
//! JSON records use stable field names; CSV values are printed with 17
//! significant digits so reruns are byte-identical.

use crate::equilibrium::PartitionTable;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;

/// 17-significant-digit decimal form (round-trippable for f64).
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// One spectral analysis record.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapRecord {
    pub label: String,
    pub l: usize,
    pub lambda: f64,
    pub gap: f64,
    pub t_rel: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_mix: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi_gamma: Option<f64>,
    pub checks: BTreeMap<String, bool>,
}

/// Log–log regression summary with its acceptance band.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegressionSummary {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub band: (f64, f64),
    pub pass: bool,
    pub points: usize,
}

impl RegressionSummary {
    pub fn from_fit(fit: &crate::mc::stats::LinearFit, band: (f64, f64)) -> Self {
        Self {
            slope: fit.slope,
            intercept: fit.intercept,
            r2: fit.r2,
            band,
            pass: fit.slope >= band.0 && fit.slope <= band.1,
            points: fit.n,
        }
    }
}

/// Write a CSV file with a fixed header; numeric cells should already be
/// formatted (see [`fmt_g17`]).
pub fn write_csv(
    path: &std::path::Path,
    header: &[&str],
    rows: &[Vec<String>],
) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{}", header.join(","))?;
    for row in rows {
        writeln!(f, "{}", row.join(","))?;
    }
    Ok(())
}

/// Partition-table export: `(j, w_free, w_wall, w_wall_capped)`.
pub fn partition_csv_rows(
    table: &PartitionTable<f64>,
    cap: Option<usize>,
) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let header = vec!["j", "w_free", "w_wall", "w_wall_capped"];
    let mut rows = Vec::new();
    for m in 1..=table.max_len / 2 {
        let j = 2 * m;
        let capped = match cap {
            Some(c) if table.has_zero_counts() => fmt_g17(table.z_wall_capped(j, c)),
            _ => String::new(),
        };
        rows.push(vec![
            j.to_string(),
            fmt_g17(table.z_free(j)),
            fmt_g17(table.z_wall(j)),
            capped,
        ]);
    }
    (header, rows)
}

/// Trajectory CSV rows: `(t, observable columns...)`.
pub fn trajectory_csv_rows(samples: &[(f64, Vec<f64>)]) -> Vec<Vec<String>> {
    samples
        .iter()
        .map(|(t, vals)| {
            let mut row = vec![fmt_g17(*t)];
            row.extend(vals.iter().map(|&v| fmt_g17(v)));
            row
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_roundtrip() {
        for &x in &[1.0, -0.3333333333333333, 1e-300, 6.02e23] {
            let s = fmt_g17(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x);
        }
    }
}
