//! The on-disk form of a 3T system: a JSON manifest naming five block files.
//!
//! ```json
//! {
//!   "n": 4,
//!   "A_r": "sys_Ar.mtx",
//!   "A_i": "sys_Ai.mtx",
//!   "A_e": "sys_Ae.mtx",
//!   "d_r": "sys_dr.txt",
//!   "d_i": "sys_di.txt",
//!   "meta": {}
//! }
//! ```
//!
//! Matrix paths are Matrix Market symmetric-coordinate files, vector paths
//! hold one value per line; relative paths resolve against the manifest's
//! directory. Writing then reading reproduces every entry bit-identically.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::mm;
use super::ThreeTMatrix;
use crate::error::Error;
use crate::Result;

#[derive(Debug, Serialize, Deserialize)]
struct ManifestFile {
    n: usize,
    #[serde(rename = "A_r")]
    a_r: String,
    #[serde(rename = "A_i")]
    a_i: String,
    #[serde(rename = "A_e")]
    a_e: String,
    d_r: String,
    d_i: String,
    #[serde(default)]
    meta: serde_json::Map<String, serde_json::Value>,
}

/// Write a system as `<stem>.json` plus five block files beside it.
pub fn write_manifest(m: &ThreeTMatrix, path: &Path) -> Result<()> {
    write_manifest_with_meta(m, path, serde_json::Map::new())
}

/// Like [`write_manifest`] with free-form metadata carried along.
pub fn write_manifest_with_meta(
    m: &ThreeTMatrix,
    path: &Path,
    meta: serde_json::Map<String, serde_json::Value>,
) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("system");

    let names = ManifestFile {
        n: m.n,
        a_r: format!("{stem}_Ar.mtx"),
        a_i: format!("{stem}_Ai.mtx"),
        a_e: format!("{stem}_Ae.mtx"),
        d_r: format!("{stem}_dr.txt"),
        d_i: format!("{stem}_di.txt"),
        meta,
    };
    mm::write_matrix(&m.a_r, &dir.join(&names.a_r))?;
    mm::write_matrix(&m.a_i, &dir.join(&names.a_i))?;
    mm::write_matrix(&m.a_e, &dir.join(&names.a_e))?;
    mm::write_vector(&m.d_r, &dir.join(&names.d_r))?;
    mm::write_vector(&m.d_i, &dir.join(&names.d_i))?;

    let json = serde_json::to_string_pretty(&names)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    fs::write(path, json + "\n").map_err(|e| Error::io(path.display().to_string(), e))
}

/// Read a manifest and its block files. Coupling vectors are checked for
/// positive entries; matrix dimensions must match `n`.
pub fn read_manifest(path: &Path) -> Result<ThreeTMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mf: ManifestFile = serde_json::from_str(&text)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let resolve = |p: &str| -> PathBuf {
        let pb = PathBuf::from(p);
        if pb.is_absolute() {
            pb
        } else {
            dir.join(pb)
        }
    };

    let a_r = mm::read_matrix(&resolve(&mf.a_r))?;
    let a_i = mm::read_matrix(&resolve(&mf.a_i))?;
    let a_e = mm::read_matrix(&resolve(&mf.a_e))?;
    for (label, a) in [("A_r", &a_r), ("A_i", &a_i), ("A_e", &a_e)] {
        if a.n() != mf.n {
            return Err(Error::DimensionMismatch(format!(
                "{label} is {}x{} but manifest n = {}",
                a.n(),
                a.n(),
                mf.n
            )));
        }
    }
    let d_r = mm::read_vector(&resolve(&mf.d_r), mf.n)?;
    let d_i = mm::read_vector(&resolve(&mf.d_i), mf.n)?;
    for d in [&d_r, &d_i] {
        if let Some(k) = d.iter().position(|&v| v > 0.0) {
            return Err(Error::PositiveCoupling { index: k + 1 });
        }
    }
    ThreeTMatrix::new(a_r, a_i, a_e, d_r, d_i)
}
