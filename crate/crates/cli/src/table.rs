//! CSV input and output.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use large_core::{DMatrix, PrecisionEstimate};

use crate::error::CliError;

/// A numeric table read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub values: DMatrix<f64>,
}

fn parse_row(rec: &csv::StringRecord) -> Result<Vec<f64>, (usize, String)> {
    rec.iter()
        .enumerate()
        .map(|(k, field)| {
            if field.is_empty() {
                return Err((k, "missing value".to_string()));
            }
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                Ok(_) => Err((k, format!("non-finite value `{field}`"))),
                Err(_) => Err((k, format!("cannot parse `{field}` as a number"))),
            }
        })
        .collect()
}

/// Reads a comma-separated numeric table. A first row that does not parse as
/// numbers is taken as the header.
pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_table(file, &path.display().to_string())
}

pub fn parse_table<R: std::io::Read>(src: R, name: &str) -> Result<Table, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(src);
    let mut header = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            let msg = match e.kind() {
                csv::ErrorKind::UnequalLengths {
                    expected_len, len, ..
                } => format!("expected {expected_len} fields, found {len}"),
                _ => e.to_string(),
            };
            CliError::Input(format!("{name}: line {line}: {msg}"))
        })?;
        let line = rec.position().map_or(idx as u64 + 1, |p| p.line());
        match parse_row(&rec) {
            Ok(row) => rows.push(row),
            Err(_) if idx == 0 => header = Some(rec.iter().map(str::to_string).collect()),
            Err((k, msg)) => {
                return Err(CliError::Input(format!(
                    "{name}: line {line}, column {}: {msg}",
                    k + 1
                )))
            }
        }
    }
    if rows.is_empty() {
        return Err(CliError::Input(format!("{name}: no data rows")));
    }
    let p = rows[0].len();
    let values = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
    Ok(Table { header, values })
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

/// Headerless matrix, one row per line.
pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<(), CliError> {
    let mut w = create(path)?;
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(",")).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Matrix with a header row.
pub fn write_with_header(path: &Path, header: &[String], m: &DMatrix<f64>) -> Result<(), CliError> {
    let mut w = create(path)?;
    writeln!(w, "{}", header.join(",")).map_err(|e| CliError::io(path, e))?;
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(",")).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Serializes rows through `csv` with a header taken from the field names.
pub fn write_records<T: serde::Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    for r in rows {
        w.serialize(r)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[derive(Debug, serde::Serialize, serde::Deserialize, PartialEq)]
pub struct EdgeRow {
    pub i: usize,
    pub j: usize,
    pub value: f64,
    pub partial_correlation: f64,
}

pub fn edge_rows(est: &PrecisionEstimate) -> Vec<EdgeRow> {
    est.support
        .iter()
        .map(|&(i, j)| EdgeRow {
            i,
            j,
            value: est.theta[(i, j)],
            partial_correlation: est.partial_correlation(i, j),
        })
        .collect()
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    writeln!(w).map_err(|e| CliError::io(path, e))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Table, CliError> {
        parse_table(s.as_bytes(), "t.csv")
    }

    #[test]
    fn header_detected() {
        let t = parse("a,b\n1,2\n3,4\n").unwrap();
        assert_eq!(t.header, Some(vec!["a".into(), "b".into()]));
        assert_eq!(
            t.values,
            DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0])
        );
    }

    #[test]
    fn headerless() {
        let t = parse("1, 2\n-3.5e1,4\n").unwrap();
        assert!(t.header.is_none());
        assert_eq!(t.values[(1, 0)], -35.0);
    }

    #[test]
    fn bad_value_reports_line_and_column() {
        let err = parse("a,b\n1,2\n3,x\n").unwrap_err().to_string();
        assert!(err.contains("line 3, column 2"), "{err}");
        let err = parse("1,2\n3,\n").unwrap_err().to_string();
        assert!(
            err.contains("line 2, column 2") && err.contains("missing"),
            "{err}"
        );
        let err = parse("1,2\nNaN,1\n").unwrap_err().to_string();
        assert!(err.contains("line 2, column 1"), "{err}");
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = parse("1,2\n3,4,5\n").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn empty_input_rejected() {
        assert!(parse("a,b\n").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn matrix_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = DMatrix::from_row_slice(2, 3, &[0.1, 1.0 / 3.0, -2e-17, 4.0, 5.5, f64::MAX]);
        write_matrix(&path, &m).unwrap();
        assert_eq!(read_table(&path).unwrap().values, m);
    }
}
