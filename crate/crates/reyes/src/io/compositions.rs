//! CSV ingestion for composition tables and adjacency edge lists.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::CompositionSample;

/// Read a composition table: header `id,<part names...>`, one unit per row,
/// nonnegative decimal values. Zeros pass through so that zero replacement
/// can run downstream; strict positivity is enforced at transform time.
pub fn read_compositions(path: &Path) -> Result<CompositionSample> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "{}: need an id column and at least 2 parts, found {} columns",
            path.display(),
            headers.len()
        )));
    }
    let part_names: Vec<String> = headers.iter().skip(1).map(|s| s.to_string()).collect();
    let d = part_names.len();

    let mut ids = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let row_label = record
            .get(0)
            .map(|s| s.to_string())
            .unwrap_or_else(|| format!("line {}", line + 2));
        if record.len() != d + 1 {
            return Err(Error::RaggedRow {
                row: row_label,
                expected: d,
                found: record.len().saturating_sub(1),
            });
        }
        let mut row = Vec::with_capacity(d);
        for field in record.iter().skip(1) {
            let value: f64 = field.parse().map_err(|_| {
                Error::InvalidParameter(format!(
                    "row {row_label}: cannot parse '{field}' as a number"
                ))
            })?;
            if !value.is_finite() || value < 0.0 {
                return Err(Error::NegativeValue {
                    row: row_label.clone(),
                    value,
                });
            }
            row.push(value);
        }
        if row.iter().all(|&v| v == 0.0) {
            return Err(Error::AllZeroRow { row: row_label });
        }
        ids.push(row_label);
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    let mut sample = CompositionSample::from_rows(rows, Some(ids))?;
    sample.set_part_names(part_names)?;
    Ok(sample)
}

/// Write a composition table in the same format `read_compositions` accepts.
/// Values use shortest round-trip decimal formatting, so a read-back
/// reproduces them bit-exactly.
pub fn write_compositions(sample: &CompositionSample, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["id".to_string()];
    header.extend(sample.part_names().iter().cloned());
    writer.write_record(&header)?;
    for i in 0..sample.n() {
        let mut record = vec![sample.unit_ids()[i].clone()];
        record.extend(sample.raw_row(i).iter().map(|v| format!("{v}")));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Read an undirected edge list: header `src,dst`, one edge per line.
pub fn read_edge_list(path: &Path) -> Result<Vec<(String, String)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = reader.headers()?;
    if headers.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "{}: edge list needs src and dst columns",
            path.display()
        )));
    }
    let mut edges = Vec::new();
    for record in reader.records() {
        let record = record?;
        let src = record.get(0).unwrap_or("").to_string();
        let dst = record.get(1).unwrap_or("").to_string();
        if src.is_empty() || dst.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "{}: edge with empty endpoint",
                path.display()
            )));
        }
        edges.push((src, dst));
    }
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn reads_a_clean_table() {
        let f = write_temp("id,home,hospital,icu\nu1,0.8,0.15,0.05\nu2,0.7,0.2,0.1\n");
        let sample = read_compositions(f.path()).unwrap();
        assert_eq!(sample.n(), 2);
        assert_eq!(sample.dim(), 3);
        assert_eq!(sample.unit_ids(), &["u1".to_string(), "u2".to_string()]);
        assert_eq!(
            sample.part_names(),
            &["home".to_string(), "hospital".to_string(), "icu".to_string()]
        );
        assert_eq!(sample.raw_row(0), &[0.8, 0.15, 0.05]);
    }

    #[test]
    fn error_paths_name_the_offending_row() {
        let f = write_temp("id,a,b\nu1,1.0,-2.0\n");
        match read_compositions(f.path()) {
            Err(Error::NegativeValue { row, .. }) => assert_eq!(row, "u1"),
            other => panic!("expected NegativeValue, got {other:?}"),
        }

        let f = write_temp("id,a,b\nu1,0,0\n");
        match read_compositions(f.path()) {
            Err(Error::AllZeroRow { row }) => assert_eq!(row, "u1"),
            other => panic!("expected AllZeroRow, got {other:?}"),
        }

        let f = write_temp("id,a,b\nu1,1.0,2.0\nu1,3.0,4.0\n");
        match read_compositions(f.path()) {
            Err(Error::DuplicateId { id }) => assert_eq!(id, "u1"),
            other => panic!("expected DuplicateId, got {other:?}"),
        }
    }

    #[test]
    fn ragged_rows_are_rejected() {
        // quoting keeps csv from padding the record
        let f = write_temp("id,a,b,c\nu1,1.0,2.0\n");
        match read_compositions(f.path()) {
            Err(Error::RaggedRow { row, expected, found }) => {
                assert_eq!(row, "u1");
                assert_eq!(expected, 3);
                assert_eq!(found, 2);
            }
            other => panic!("expected RaggedRow, got {other:?}"),
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let rows = vec![
            vec![0.123456789012345_f64, 0.5, 1e-7],
            vec![17.0, 0.0003, 2.5e3],
        ];
        let sample = CompositionSample::from_rows(rows.clone(), None).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.csv");
        write_compositions(&sample, &path).unwrap();
        let back = read_compositions(&path).unwrap();
        for i in 0..2 {
            assert_eq!(back.raw_row(i), sample.raw_row(i));
        }
    }

    #[test]
    fn reads_edge_lists() {
        let f = write_temp("src,dst\nA,B\nB,C\n");
        let edges = read_edge_list(f.path()).unwrap();
        assert_eq!(
            edges,
            vec![
                ("A".to_string(), "B".to_string()),
                ("B".to_string(), "C".to_string())
            ]
        );
    }
}
