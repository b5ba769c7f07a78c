//! Tidy CSV series for plotting, with sidecar column schemas.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulation::ReplicationRecord;

use super::report::ReyesReport;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ColumnSchema {
    name: String,
    description: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SeriesSchema {
    columns: Vec<ColumnSchema>,
}

fn write_schema(csv_path: &Path, columns: &[(&str, &str)]) -> Result<()> {
    let schema = SeriesSchema {
        columns: columns
            .iter()
            .map(|(name, description)| ColumnSchema {
                name: name.to_string(),
                description: description.to_string(),
            })
            .collect(),
    };
    let schema_path = csv_path.with_extension("schema.json");
    std::fs::write(&schema_path, serde_json::to_string_pretty(&schema)?)?;
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

/// One row per report, in input order: day index, statistic, and the
/// positive-tail probability. Empty input produces a header-only file.
pub fn plot_report_series(reports: &[ReyesReport], out: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(out)?;
    writer.write_record(["day", "i_a", "p_hat"])?;
    for (day, report) in reports.iter().enumerate() {
        writer.write_record(&[
            (day + 1).to_string(),
            format!("{}", report.statistic.value),
            format!("{}", report.p_values.p_pos),
        ])?;
    }
    writer.flush()?;
    write_schema(
        out,
        &[
            ("day", "1-based report index in input order"),
            ("i_a", "observed compositional autocorrelation statistic"),
            ("p_hat", "Monte Carlo tail probability P(I_a >= observed)"),
        ],
    )
}

/// One row per replication with the plot-facing columns.
pub fn plot_scenario_series(records: &[ReplicationRecord], out: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(out)?;
    writer.write_record([
        "replication",
        "i_a",
        "i_m",
        "p_a",
        "p_m",
        "time_a_ns",
        "time_m_ns",
    ])?;
    for r in records {
        writer.write_record(&[
            r.replication.to_string(),
            format!("{}", r.i_a),
            fmt_opt(r.i_m),
            fmt_opt(r.p_a),
            fmt_opt(r.p_m),
            r.time_a_ns.to_string(),
            r.time_m_ns.to_string(),
        ])?;
    }
    writer.flush()?;
    write_schema(
        out,
        &[
            ("replication", "0-based replication index"),
            ("i_a", "compositional autocorrelation statistic"),
            ("i_m", "componentwise Moran average (empty when not computed)"),
            ("p_a", "Monte Carlo tail probability for i_a"),
            ("p_m", "Monte Carlo tail probability for i_m"),
            ("time_a_ns", "wall time of the i_a pipeline in nanoseconds"),
            ("time_m_ns", "wall time of the i_m pipeline in nanoseconds"),
        ],
    )
}

/// Write replication records: the same columns as the plot series plus the
/// bound, used as the simulate command's per-replication output.
pub fn write_records_csv(records: &[ReplicationRecord], out: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(out)?;
    writer.write_record([
        "replication",
        "i_a",
        "upper_bound",
        "i_m",
        "p_a",
        "p_m",
        "time_a_ns",
        "time_m_ns",
    ])?;
    for r in records {
        writer.write_record(&[
            r.replication.to_string(),
            format!("{}", r.i_a),
            format!("{}", r.upper_bound),
            fmt_opt(r.i_m),
            fmt_opt(r.p_a),
            fmt_opt(r.p_m),
            r.time_a_ns.to_string(),
            r.time_m_ns.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Read back a records file written by [`write_records_csv`].
pub fn read_records_csv(path: &Path) -> Result<Vec<ReplicationRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let parse_f64 = |idx: usize| -> Result<f64> {
            record
                .get(idx)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::InvalidParameter(format!("bad records row: {record:?}")))
        };
        let parse_opt = |idx: usize| -> Option<f64> {
            record.get(idx).and_then(|s| {
                if s.is_empty() {
                    None
                } else {
                    s.parse().ok()
                }
            })
        };
        out.push(ReplicationRecord {
            replication: record
                .get(0)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::InvalidParameter(format!("bad records row: {record:?}")))?,
            i_a: parse_f64(1)?,
            upper_bound: parse_f64(2)?,
            i_m: parse_opt(3),
            p_a: parse_opt(4),
            p_m: parse_opt(5),
            time_a_ns: record.get(6).and_then(|s| s.parse().ok()).unwrap_or(0),
            time_m_ns: record.get(7).and_then(|s| s.parse().ok()).unwrap_or(0),
        });
    }
    Ok(out)
}
