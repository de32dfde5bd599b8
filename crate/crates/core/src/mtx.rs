//! Matrix Market reading and writing.
//!
//! `H` is written as `%%MatrixMarket matrix array real symmetric` (lower
//! triangle, column-major); `U` as `... array real general` (column-major).
//! The reader also accepts coordinate format. Values are written in Rust's
//! shortest round-trip form, so a write followed by a read reproduces every
//! entry exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::linalg::{Mat, OrthonormalBasis, SymmetricOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layout {
    Array,
    Coordinate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

struct Parser<'a> {
    path: PathBuf,
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Parser<'a> {
    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse { path: self.path.clone(), line, message: message.into() }
    }

    /// Next non-comment, non-blank line with its 1-based number.
    fn next_data(&mut self) -> Option<(usize, &'a str)> {
        for (i, line) in self.lines.by_ref() {
            let t = line.trim();
            if !t.is_empty() && !t.starts_with('%') {
                return Some((i + 1, t));
            }
        }
        None
    }

    fn numbers<T: std::str::FromStr>(&self, line: usize, text: &str, count: usize) -> Result<Vec<T>> {
        let parts: Vec<&str> = text.split_whitespace().collect();
        if parts.len() != count {
            return Err(self.err(line, format!("expected {count} fields, found {}", parts.len())));
        }
        parts
            .iter()
            .map(|p| p.parse::<T>().map_err(|_| self.err(line, format!("cannot parse {p:?}"))))
            .collect()
    }
}

fn parse(text: &str, path: &Path) -> Result<(Mat, Symmetry)> {
    let mut p = Parser { path: path.to_path_buf(), lines: text.lines().enumerate().peekable() };
    let banner = match p.lines.next() {
        Some((_, line)) => line.trim().to_ascii_lowercase(),
        None => return Err(p.err(1, "empty file")),
    };
    let fields: Vec<&str> = banner.split_whitespace().collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(p.err(1, "missing '%%MatrixMarket matrix <format> <field> <symmetry>' banner"));
    }
    let layout = match fields[2] {
        "array" => Layout::Array,
        "coordinate" => Layout::Coordinate,
        other => return Err(p.err(1, format!("unsupported format {other:?}"))),
    };
    if fields[3] != "real" && fields[3] != "double" && fields[3] != "integer" {
        return Err(p.err(1, format!("unsupported field {:?}; only real matrices are read", fields[3])));
    }
    let symmetry = match fields[4] {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(p.err(1, format!("unsupported symmetry {other:?}"))),
    };

    let (size_line, size_text) = p.next_data().ok_or_else(|| p.err(2, "missing size line"))?;
    let mut m;
    match layout {
        Layout::Array => {
            let dims: Vec<usize> = p.numbers(size_line, size_text, 2)?;
            let (rows, cols) = (dims[0], dims[1]);
            if symmetry == Symmetry::Symmetric && rows != cols {
                return Err(p.err(size_line, "symmetric matrix must be square"));
            }
            m = Mat::zeros(rows, cols);
            for c in 0..cols {
                let start = if symmetry == Symmetry::Symmetric { c } else { 0 };
                for r in start..rows {
                    let (line, text) = p
                        .next_data()
                        .ok_or_else(|| p.err(size_line, format!("missing entry ({}, {})", r + 1, c + 1)))?;
                    let v: f64 = p.numbers(line, text, 1)?[0];
                    if !v.is_finite() {
                        return Err(p.err(line, "non-finite entry"));
                    }
                    m[(r, c)] = v;
                    if symmetry == Symmetry::Symmetric {
                        m[(c, r)] = v;
                    }
                }
            }
        }
        Layout::Coordinate => {
            let dims: Vec<usize> = p.numbers(size_line, size_text, 3)?;
            let (rows, cols, nnz) = (dims[0], dims[1], dims[2]);
            if symmetry == Symmetry::Symmetric && rows != cols {
                return Err(p.err(size_line, "symmetric matrix must be square"));
            }
            m = Mat::zeros(rows, cols);
            for _ in 0..nnz {
                let (line, text) = p.next_data().ok_or_else(|| p.err(size_line, "fewer entries than declared"))?;
                let parts: Vec<&str> = text.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(p.err(line, format!("expected 3 fields, found {}", parts.len())));
                }
                let r: usize = parts[0].parse().map_err(|_| p.err(line, format!("bad row {:?}", parts[0])))?;
                let c: usize = parts[1].parse().map_err(|_| p.err(line, format!("bad column {:?}", parts[1])))?;
                let v: f64 = parts[2].parse().map_err(|_| p.err(line, format!("bad value {:?}", parts[2])))?;
                if r == 0 || c == 0 || r > rows || c > cols {
                    return Err(p.err(line, format!("index ({r}, {c}) out of range")));
                }
                if !v.is_finite() {
                    return Err(p.err(line, "non-finite entry"));
                }
                m[(r - 1, c - 1)] = v;
                if symmetry == Symmetry::Symmetric {
                    m[(c - 1, r - 1)] = v;
                }
            }
        }
    }
    if let Some((line, _)) = p.next_data() {
        return Err(p.err(line, "unexpected trailing data"));
    }
    Ok((m, symmetry))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Parses a symmetric matrix. `general` files must be symmetric to within
/// `1e-12` relative to the largest entry.
pub fn parse_symmetric(text: &str, path: &Path) -> Result<SymmetricOperator> {
    let (m, sym) = parse(text, path)?;
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::Parse { path: path.to_path_buf(), line: 2, message: "H must be square and nonempty".into() });
    }
    if sym == Symmetry::General {
        let asym = (&m - m.transpose()).amax();
        if asym > 1e-12 * m.amax().max(1.0) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: format!("matrix is not symmetric (max asymmetry {asym:e})"),
            });
        }
    }
    SymmetricOperator::new(m)
}

pub fn parse_dense(text: &str, path: &Path) -> Result<Mat> {
    Ok(parse(text, path)?.0)
}

pub fn read_symmetric(path: impl AsRef<Path>) -> Result<SymmetricOperator> {
    let path = path.as_ref();
    parse_symmetric(&read(path)?, path)
}

pub fn read_dense(path: impl AsRef<Path>) -> Result<Mat> {
    let path = path.as_ref();
    parse_dense(&read(path)?, path)
}

pub fn format_symmetric(h: &SymmetricOperator) -> String {
    let m = h.entries();
    let n = m.nrows();
    let mut out = String::from("%%MatrixMarket matrix array real symmetric\n");
    let _ = writeln!(out, "{n} {n}");
    for c in 0..n {
        for r in c..n {
            let _ = writeln!(out, "{:e}", m[(r, c)]);
        }
    }
    out
}

pub fn format_dense(m: &Mat) -> String {
    let mut out = String::from("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(out, "{} {}", m.nrows(), m.ncols());
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            let _ = writeln!(out, "{:e}", m[(r, c)]);
        }
    }
    out
}

fn write(path: &Path, text: String) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub fn write_symmetric(path: impl AsRef<Path>, h: &SymmetricOperator) -> Result<()> {
    write(path.as_ref(), format_symmetric(h))
}

pub fn write_basis(path: impl AsRef<Path>, u: &OrthonormalBasis) -> Result<()> {
    write(path.as_ref(), format_dense(u.cols()))
}
