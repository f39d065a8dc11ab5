use std::fs::File;
use std::path::Path;

use super::{DataError, Result};
use crate::linalg::DenseMatrix;

/// Reads a comma-separated dense matrix, one row per line, rejecting
/// negative entries.
pub fn load_dense_csv(path: impl AsRef<Path>, has_header: bool) -> Result<DenseMatrix> {
    read_matrix(path.as_ref(), has_header, true)
}

/// Like [`load_dense_csv`] but accepts mixed-sign values (projected data).
pub fn read_dense_csv(path: impl AsRef<Path>, has_header: bool) -> Result<DenseMatrix> {
    read_matrix(path.as_ref(), has_header, false)
}

fn read_matrix(path: &Path, has_header: bool, nonnegative: bool) -> Result<DenseMatrix> {
    let file = File::open(path).map_err(|e| DataError::io(path, e))?;
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(::csv::Trim::All)
        .from_reader(file);
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            DataError::parse(path, line, e.to_string())
        })?;
        let line = record.position().map_or(rows + 1, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(DataError::InconsistentDims(format!(
                    "{}:{line}: expected {c} fields, found {}",
                    path.display(),
                    record.len()
                )))
            }
            _ => {}
        }
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| DataError::parse(path, line, format!("not a number: '{field}'")))?;
            if !v.is_finite() {
                return Err(DataError::parse(path, line, format!("non-finite value '{field}'")));
            }
            if nonnegative && v < 0.0 {
                return Err(DataError::NegativeValue {
                    path: path.to_path_buf(),
                    row: rows,
                    col: j,
                    value: v,
                });
            }
            values.push(v);
        }
        rows += 1;
    }
    let Some(cols) = cols else {
        return Err(DataError::parse(path, 1, "no data rows"));
    };
    Ok(DenseMatrix::new(rows, cols, values)?)
}

/// Writes `m` as headerless CSV with shortest round-trip number formatting.
pub fn save_dense_csv(m: &DenseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| DataError::io(path, e))?;
    let mut writer = ::csv::WriterBuilder::new().has_headers(false).from_writer(file);
    let io = |e: ::csv::Error| DataError::io(path, e.into());
    for i in 0..m.rows() {
        writer
            .write_record(m.row(i).iter().map(|v| v.to_string()))
            .map_err(io)?;
    }
    writer.flush().map_err(|e| DataError::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        let m = DenseMatrix::from_rows(&[[0.1, 2.0, 1e-17], [3.5, 0.0, 1.0 / 3.0]]);
        save_dense_csv(&m, &p).unwrap();
        assert_eq!(load_dense_csv(&p, false).unwrap(), m);
    }

    #[test]
    fn header_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.csv");
        std::fs::write(&p, "a,b\n1,2\n3,4\n").unwrap();
        assert_eq!(load_dense_csv(&p, true).unwrap().shape(), (2, 2));
        assert!(matches!(load_dense_csv(&p, false), Err(DataError::Parse { line: 1, .. })));

        std::fs::write(&p, "1,2\n3,-4\n").unwrap();
        assert!(matches!(
            load_dense_csv(&p, false),
            Err(DataError::NegativeValue { row: 1, col: 1, .. })
        ));
        assert_eq!(read_dense_csv(&p, false).unwrap().get(1, 1), -4.0);

        std::fs::write(&p, "1,2\n3\n").unwrap();
        assert!(matches!(load_dense_csv(&p, false), Err(DataError::InconsistentDims(_))));

        let missing = dir.path().join("nope.csv");
        assert!(matches!(load_dense_csv(&missing, false), Err(DataError::Io { .. })));
    }
}
