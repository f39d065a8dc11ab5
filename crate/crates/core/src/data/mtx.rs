use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{DataError, Result};
use crate::linalg::SparseMatrix;

const BANNER: &str = "%%MatrixMarket";

/// Reads a `coordinate real|integer general` Matrix Market file.
///
/// Indices are 1-based; duplicate coordinates are summed.
pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    read(path.as_ref(), true)
}

/// Like [`load_matrix_market`] but accepts negative values (projected data).
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    read(path.as_ref(), false)
}

fn read(path: &Path, nonnegative: bool) -> Result<SparseMatrix> {
    let file = File::open(path).map_err(|e| DataError::io(path, e))?;
    let mut lines = BufReader::new(file).lines().enumerate();
    let mut next = || -> Result<Option<(usize, String)>> {
        match lines.next() {
            Some((i, Ok(l))) => Ok(Some((i + 1, l))),
            Some((_, Err(e))) => Err(DataError::io(path, e)),
            None => Ok(None),
        }
    };

    let (line_no, banner) = next()?.ok_or_else(|| DataError::parse(path, 1, "empty file"))?;
    let fields: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.first().map(String::as_str) != Some(&BANNER.to_ascii_lowercase()) {
        return Err(DataError::parse(path, line_no, format!("missing {BANNER} banner")));
    }
    match fields.get(1..5) {
        Some([obj, fmt, field, sym])
            if obj == "matrix"
                && fmt == "coordinate"
                && (field == "real" || field == "integer")
                && sym == "general" => {}
        _ => {
            return Err(DataError::parse(
                path,
                line_no,
                "only 'matrix coordinate real|integer general' is supported",
            ))
        }
    }

    let (size_line, rows, cols, nnz) = loop {
        let (n, l) = next()?.ok_or_else(|| DataError::parse(path, line_no + 1, "missing size line"))?;
        let t = l.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let nums: Vec<usize> = t
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| DataError::parse(path, n, format!("bad size field '{s}'"))))
            .collect::<Result<_>>()?;
        let [r, c, z] = nums[..] else {
            return Err(DataError::parse(path, n, "size line needs rows, cols and entry count"));
        };
        break (n, r, c, z);
    };

    let mut triplets = Vec::with_capacity(nnz);
    let mut last_line = size_line;
    while let Some((n, l)) = next()? {
        last_line = n;
        let t = l.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let mut it = t.split_whitespace();
        let (Some(i), Some(j), Some(v), None) = (it.next(), it.next(), it.next(), it.next()) else {
            return Err(DataError::parse(path, n, "entry lines need 'row col value'"));
        };
        let index = |s: &str, limit: usize, what: &str| -> Result<usize> {
            match s.parse::<usize>() {
                Ok(x) if (1..=limit).contains(&x) => Ok(x - 1),
                _ => Err(DataError::parse(
                    path,
                    n,
                    format!("{what} index '{s}' outside 1..={limit}"),
                )),
            }
        };
        let (i, j) = (index(i, rows, "row")?, index(j, cols, "column")?);
        let v: f64 = v
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| DataError::parse(path, n, format!("bad value '{v}'")))?;
        if nonnegative && v < 0.0 {
            return Err(DataError::NegativeValue {
                path: path.to_path_buf(),
                row: i,
                col: j,
                value: v,
            });
        }
        triplets.push((i, j, v));
    }
    if triplets.len() != nnz {
        return Err(DataError::parse(
            path,
            last_line,
            format!("header declares {nnz} entries, found {}", triplets.len()),
        ));
    }
    Ok(SparseMatrix::from_triplets(rows, cols, triplets)?)
}

/// Writes `m` in `coordinate real general` form, one stored entry per line.
pub fn save_matrix_market(m: &SparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |e| DataError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "{BANNER} matrix coordinate real general").map_err(io)?;
    writeln!(w, "{} {} {}", m.rows(), m.cols(), m.nnz()).map_err(io)?;
    for (i, j, v) in m.iter() {
        writeln!(w, "{} {} {v}", i + 1, j + 1).map_err(io)?;
    }
    w.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &tempfile::TempDir, body: &str) -> std::path::PathBuf {
        let p = dir.path().join("m.mtx");
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn duplicates_are_summed() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "%%MatrixMarket matrix coordinate integer general\n% note\n2 3 3\n1 2 2\n2 3 1\n1 2 3\n",
        );
        let m = load_matrix_market(&p).unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.iter().collect::<Vec<_>>(), vec![(0, 1, 5.0), (1, 2, 1.0)]);
    }

    #[test]
    fn missing_banner_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "2 2 1\n1 1 1.0\n");
        let err = load_matrix_market(&p).unwrap_err();
        assert!(matches!(err, DataError::Parse { line: 1, .. }));
        assert!(err.to_string().contains(":1:"));
    }

    #[test]
    fn rejects_bad_entries() {
        let dir = tempfile::tempdir().unwrap();
        let head = "%%MatrixMarket matrix coordinate real general\n2 2 1\n";
        let p = write(&dir, &format!("{head}1 1 -2.0\n"));
        assert!(matches!(load_matrix_market(&p), Err(DataError::NegativeValue { .. })));
        let p = write(&dir, &format!("{head}3 1 2.0\n"));
        assert!(matches!(load_matrix_market(&p), Err(DataError::Parse { line: 3, .. })));
        let p = write(&dir, &format!("{head}0 1 2.0\n"));
        assert!(load_matrix_market(&p).is_err());
        let p = write(&dir, head);
        assert!(load_matrix_market(&p).is_err());
        let p = write(&dir, "%%MatrixMarket matrix coordinate real symmetric\n2 2 0\n");
        assert!(load_matrix_market(&p).is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let triplets: Vec<_> = (0..300)
            .map(|t| ((t * 37) % 100, (t * 11) % 50, 0.1 + (t as f64).sqrt()))
            .collect();
        let m = SparseMatrix::from_triplets(100, 50, triplets).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.mtx");
        save_matrix_market(&m, &p).unwrap();
        assert_eq!(load_matrix_market(&p).unwrap(), m);
    }
}
