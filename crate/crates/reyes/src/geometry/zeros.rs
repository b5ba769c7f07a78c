//! Multiplicative replacement of zeros in nonnegative composition tables.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// How the replacement value δⱼ for zeros in part j is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaPolicy {
    /// δⱼ = delta × (smallest positive value observed in column j).
    FractionOfMin,
    /// δⱼ = delta for every part.
    Fixed,
}

/// Replace zeros multiplicatively: each zero in row i, part j becomes δⱼ and
/// the positive entries of the row are scaled down so the row sum is
/// preserved. Rows without zeros are returned unchanged.
pub fn replace_zeros(
    rows: &[Vec<f64>],
    policy: DeltaPolicy,
    delta: f64,
) -> Result<Vec<Vec<f64>>> {
    if rows.is_empty() {
        return Ok(Vec::new());
    }
    let d = rows[0].len();
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "replacement delta must be positive, got {delta}"
        )));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != d {
            return Err(Error::RaggedRow {
                row: i.to_string(),
                expected: d,
                found: row.len(),
            });
        }
        if row.iter().all(|&v| v <= 0.0) {
            return Err(Error::AllZeroRow { row: i.to_string() });
        }
        if let Some(&v) = row.iter().find(|&&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::NegativeValue {
                row: i.to_string(),
                value: v,
            });
        }
    }

    let deltas: Vec<f64> = match policy {
        DeltaPolicy::Fixed => vec![delta; d],
        DeltaPolicy::FractionOfMin => (0..d)
            .map(|j| {
                let min_pos = rows
                    .iter()
                    .map(|row| row[j])
                    .filter(|&v| v > 0.0)
                    .fold(f64::INFINITY, f64::min);
                if min_pos.is_finite() {
                    delta * min_pos
                } else {
                    // column is entirely zero: fall back to the smallest
                    // positive value anywhere in the table
                    let global = rows
                        .iter()
                        .flat_map(|row| row.iter().copied())
                        .filter(|&v| v > 0.0)
                        .fold(f64::INFINITY, f64::min);
                    delta * global
                }
            })
            .collect(),
    };

    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        if row.iter().all(|&v| v > 0.0) {
            out.push(row.clone());
            continue;
        }
        let total: f64 = row.iter().sum();
        let replaced_mass: f64 = row
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == 0.0)
            .map(|(j, _)| deltas[j])
            .sum();
        if replaced_mass >= total {
            return Err(Error::InvalidParameter(format!(
                "replacement mass {replaced_mass} exceeds the row total {total}; lower delta"
            )));
        }
        let scale = (total - replaced_mass) / total;
        let new_row: Vec<f64> = row
            .iter()
            .enumerate()
            .map(|(j, &v)| if v == 0.0 { deltas[j] } else { v * scale })
            .collect();
        out.push(new_row);
    }
    Ok(out)
}
