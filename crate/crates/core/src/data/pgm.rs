use std::fs;
use std::path::{Path, PathBuf};

use super::{DataError, Result};
use crate::linalg::DenseMatrix;

/// Reads one P2 (ASCII) or P5 (binary) greymap as a height×width matrix
/// with values rescaled to [0, 1] by `maxval`.
pub fn load_pgm(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| DataError::io(path, e))?;
    parse_pgm(path, &bytes)
}

/// Loads every `.pgm` file in `dir` (sorted by file name) as one flattened
/// row. All images must share the same dimensions.
pub fn load_pgm_directory(dir: impl AsRef<Path>) -> Result<DenseMatrix> {
    let dir = dir.as_ref();
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| DataError::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .is_some_and(|ext| ext.eq_ignore_ascii_case("pgm"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(DataError::EmptyDirectory(dir.to_path_buf()));
    }
    let mut values = Vec::new();
    let mut dims = None;
    for file in &files {
        let img = load_pgm(file)?;
        match dims {
            None => dims = Some(img.shape()),
            Some(d) if d != img.shape() => {
                return Err(DataError::InconsistentDims(format!(
                    "{} is {}x{}, expected {}x{}",
                    file.display(),
                    img.rows(),
                    img.cols(),
                    d.0,
                    d.1
                )))
            }
            _ => {}
        }
        values.extend_from_slice(img.as_slice());
    }
    let (h, w) = dims.expect("at least one image");
    Ok(DenseMatrix::new(files.len(), h * w, values)?)
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> Header<'a> {
    fn skip_space(&mut self) {
        while let Some(&c) = self.bytes.get(self.pos) {
            if c == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                if c == b'\n' {
                    self.line += 1;
                }
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&'a str> {
        self.skip_space();
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|c| !c.is_ascii_whitespace() && *c != b'#')
        {
            self.pos += 1;
        }
        (self.pos > start)
            .then(|| std::str::from_utf8(&self.bytes[start..self.pos]).ok())
            .flatten()
    }

    fn number(&mut self, path: &Path, what: &str) -> Result<usize> {
        let line = self.line;
        let tok = self
            .token()
            .ok_or_else(|| DataError::parse(path, line, format!("missing {what}")))?;
        tok.parse()
            .map_err(|_| DataError::parse(path, line, format!("bad {what} '{tok}'")))
    }
}

fn parse_pgm(path: &Path, bytes: &[u8]) -> Result<DenseMatrix> {
    let mut h = Header {
        bytes,
        pos: 0,
        line: 1,
    };
    let binary = match h.token() {
        Some("P5") => true,
        Some("P2") => false,
        other => {
            return Err(DataError::parse(
                path,
                1,
                format!("expected P2 or P5 magic, found {:?}", other.unwrap_or("")),
            ))
        }
    };
    let width = h.number(path, "width")?;
    let height = h.number(path, "height")?;
    let maxval = h.number(path, "maxval")?;
    if width == 0 || height == 0 {
        return Err(DataError::parse(path, h.line, "zero image dimension"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(DataError::parse(
            path,
            h.line,
            format!("maxval {maxval} outside 1..=255"),
        ));
    }
    let scale = maxval as f64;
    let count = width * height;
    let mut pixels = Vec::with_capacity(count);
    if binary {
        // exactly one whitespace byte separates the header from the raster
        let start = h.pos + 1;
        let raster = bytes.get(start..start + count).ok_or_else(|| {
            DataError::parse(path, h.line, format!("raster shorter than {count} bytes"))
        })?;
        for &b in raster {
            if b as usize > maxval {
                return Err(DataError::parse(path, h.line, format!("pixel {b} exceeds maxval")));
            }
            pixels.push(b as f64 / scale);
        }
    } else {
        for _ in 0..count {
            let v = h.number(path, "pixel")?;
            if v > maxval {
                return Err(DataError::parse(path, h.line, format!("pixel {v} exceeds maxval")));
            }
            pixels.push(v as f64 / scale);
        }
    }
    Ok(DenseMatrix::new(height, width, pixels)?)
}
