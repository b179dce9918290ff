//! Matrix Market I/O for symmetric coordinate matrices and plain vectors.
//!
//! Matrices are written as `%%MatrixMarket matrix coordinate real symmetric`
//! with 1-based indices and only the lower triangle stored. Floats are
//! written with 17 significant digits, which round-trips every f64
//! bit-identically through decimal text.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::Error;
use crate::linalg::sparse::SparseSym;
use crate::Result;

const HEADER: &str = "%%MatrixMarket matrix coordinate real symmetric";

/// Format a float with 17 significant digits (lossless for f64).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write a symmetric matrix, lower triangle only.
pub fn write_matrix(m: &SparseSym, path: &Path) -> Result<()> {
    let lower = m.lower_triplets();
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    out.push_str(&format!("{} {} {}\n", m.n(), m.n(), lower.len()));
    for (r, c, v) in lower {
        out.push_str(&format!("{} {} {}\n", r + 1, c + 1, fmt_f64(v)));
    }
    write_file(path, out.as_bytes())
}

/// Read a symmetric coordinate matrix. A `general` (or any non-symmetric)
/// header is rejected naming the expected symmetry.
pub fn read_matrix(path: &Path) -> Result<SparseSym> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let p = path.display().to_string();
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(&p, "empty file"))?
        .trim();
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 || !fields[0].eq_ignore_ascii_case("%%MatrixMarket") {
        return Err(Error::parse(
            &p,
            format!("malformed header {header:?}, expected {HEADER:?}"),
        ));
    }
    let (object, format, field, symmetry) = (fields[1], fields[2], fields[3], fields[4]);
    if !object.eq_ignore_ascii_case("matrix")
        || !format.eq_ignore_ascii_case("coordinate")
        || !field.eq_ignore_ascii_case("real")
    {
        return Err(Error::parse(
            &p,
            format!("unsupported kind {object} {format} {field}, expected matrix coordinate real"),
        ));
    }
    if !symmetry.eq_ignore_ascii_case("symmetric") {
        return Err(Error::parse(
            &p,
            format!("symmetry is {symmetry:?}, expected \"symmetric\""),
        ));
    }

    let mut rest = lines.filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('%'));
    let size_line = rest
        .next()
        .ok_or_else(|| Error::parse(&p, "missing size line"))?;
    let dims: Vec<&str> = size_line.split_whitespace().collect();
    if dims.len() != 3 {
        return Err(Error::parse(&p, format!("malformed size line {size_line:?}")));
    }
    let rows: usize = parse_num(&p, dims[0])?;
    let cols: usize = parse_num(&p, dims[1])?;
    let nnz: usize = parse_num(&p, dims[2])?;
    if rows != cols {
        return Err(Error::parse(&p, format!("matrix is {rows}x{cols}, not square")));
    }

    let mut triplets = Vec::with_capacity(nnz);
    for line in rest {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(Error::parse(&p, format!("malformed entry line {line:?}")));
        }
        let r: usize = parse_num(&p, f[0])?;
        let c: usize = parse_num(&p, f[1])?;
        let v: f64 = f[2]
            .parse()
            .map_err(|_| Error::parse(&p, format!("bad float {:?}", f[2])))?;
        if r == 0 || c == 0 || r > rows || c > cols {
            return Err(Error::parse(
                &p,
                format!("entry ({r},{c}) out of bounds for {rows}x{cols}"),
            ));
        }
        if c > r {
            return Err(Error::parse(
                &p,
                format!("entry ({r},{c}) above the diagonal in a symmetric file"),
            ));
        }
        triplets.push((r - 1, c - 1, v));
    }
    if triplets.len() != nnz {
        return Err(Error::parse(
            &p,
            format!("entry count {} disagrees with header nnz {nnz}", triplets.len()),
        ));
    }
    SparseSym::from_lower_triplets(rows, &triplets)
}

/// Write a vector, one value per line.
pub fn write_vector(v: &[f64], path: &Path) -> Result<()> {
    let mut out = String::new();
    for x in v {
        out.push_str(&fmt_f64(*x));
        out.push('\n');
    }
    write_file(path, out.as_bytes())
}

/// Read a vector of expected length `n`.
pub fn read_vector(path: &Path, n: usize) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let p = path.display().to_string();
    let mut v = Vec::with_capacity(n);
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let x: f64 = line
            .trim()
            .parse()
            .map_err(|_| Error::parse(&p, format!("bad float {line:?}")))?;
        v.push(x);
    }
    if v.len() != n {
        return Err(Error::parse(
            &p,
            format!("vector has {} entries, expected {n}", v.len()),
        ));
    }
    Ok(v)
}

fn parse_num(path: &str, s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::parse(path, format!("bad integer {s:?}")))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f =
        fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    f.write_all(bytes)
        .map_err(|e| Error::io(path.display().to_string(), e))
}
