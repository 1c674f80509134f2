//! JSON instance files.
//!
//! ```json
//! {"Y": [[...], ...], "G": [[...], ...], "A": [[...], ...],
//!  "S": [-1, 0, 1], "K": 4, "N": 3, "d0": 0.5}
//! ```
//!
//! Numbers are written in shortest round-trip form, so a saved instance loads back
//! bit-for-bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::assembler::ProblemInstance;
use crate::dioph::Alphabet;
use crate::error::{CilsError, Result};
use crate::intlin::IntMatrix;
use crate::spheredec::RealMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(rename = "Y")]
    pub y: Vec<Vec<f64>>,
    #[serde(rename = "G")]
    pub g: Vec<Vec<f64>>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<i64>>,
    #[serde(rename = "S")]
    pub s: Vec<i64>,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d0: Option<f64>,
}

/// Sidecar written next to generated instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedFile {
    #[serde(rename = "X")]
    pub x: Vec<Vec<i64>>,
}

/// 1-based line of the first occurrence of `"key"` in `text`.
fn key_line(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines()
        .position(|l| l.contains(&needle))
        .map(|i| i + 1)
}

fn at(text: &str, key: &str, msg: String) -> CilsError {
    match key_line(text, key) {
        Some(line) => CilsError::InstanceFile(format!("line {line} ({key}): {msg}")),
        None => CilsError::InstanceFile(format!("{key}: {msg}")),
    }
}

fn real_matrix(text: &str, key: &str, rows: &[Vec<f64>]) -> Result<RealMatrix> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 {
        return Err(at(text, key, "matrix must be nonempty".into()));
    }
    if let Some(i) = rows.iter().position(|r| r.len() != cols) {
        return Err(at(
            text,
            key,
            format!("row {i} has {} entries, expected {cols}", rows[i].len()),
        ));
    }
    Ok(RealMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

impl InstanceFile {
    pub fn from_instance(inst: &ProblemInstance) -> Result<Self> {
        let rows = |m: &RealMatrix| -> Vec<Vec<f64>> {
            (0..m.nrows())
                .map(|i| m.row(i).iter().copied().collect())
                .collect()
        };
        Ok(InstanceFile {
            y: rows(&inst.y),
            g: rows(&inst.g),
            a: inst.a.to_i64_rows()?,
            s: inst.alphabet.values().to_vec(),
            k: inst.k,
            n: inst.rank,
            d0: inst.d0,
        })
    }

    /// Parses and cross-checks dimensions; `text` is used to anchor messages to lines.
    pub fn into_instance(self, text: &str) -> Result<ProblemInstance> {
        let y = real_matrix(text, "Y", &self.y)?;
        let g = real_matrix(text, "G", &self.g)?;
        if self.a.is_empty() {
            return Err(at(text, "A", "matrix must be nonempty".into()));
        }
        let a = IntMatrix::from_rows(&self.a).map_err(|e| at(text, "A", e.to_string()))?;
        let alphabet = Alphabet::new(self.s).map_err(|e| at(text, "S", e.to_string()))?;
        let (m, l) = y.shape();
        if g.nrows() != m {
            return Err(at(text, "G", format!("{} rows, Y has {m}", g.nrows())));
        }
        if g.ncols() != self.n {
            return Err(at(
                text,
                "N",
                format!("N = {} but G has {} columns", self.n, g.ncols()),
            ));
        }
        if a.cols() != l {
            return Err(at(text, "A", format!("{} columns, Y has {l}", a.cols())));
        }
        if self.k > l {
            return Err(at(text, "K", format!("K = {} exceeds L = {l}", self.k)));
        }
        if self.n == 0 || self.n > l {
            return Err(at(text, "N", format!("N = {} must be in 1..={l}", self.n)));
        }
        if let Some(d) = self.d0 {
            if !(d.is_finite() && d > 0.0) {
                return Err(at(
                    text,
                    "d0",
                    format!("initial radius must be positive, got {d}"),
                ));
            }
        }
        ProblemInstance::new(y, g, a, alphabet, self.k, self.n, self.d0)
    }
}

pub fn parse_instance(text: &str) -> Result<ProblemInstance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| {
        CilsError::InstanceFile(format!("line {} column {}: {e}", e.line(), e.column()))
    })?;
    file.into_instance(text)
}

pub fn load_instance(path: &Path) -> Result<ProblemInstance> {
    let text = std::fs::read_to_string(path)?;
    parse_instance(&text)
}

pub fn instance_to_json(inst: &ProblemInstance) -> Result<String> {
    let file = InstanceFile::from_instance(inst)?;
    let mut s =
        serde_json::to_string_pretty(&file).map_err(|e| CilsError::InstanceFile(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn save_instance(inst: &ProblemInstance, path: &Path) -> Result<()> {
    std::fs::write(path, instance_to_json(inst)?)?;
    Ok(())
}

/// `foo.json` → `foo.planted.json`
pub fn planted_path(path: &Path) -> std::path::PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.planted.json"))
}

pub fn save_planted(x: &IntMatrix, path: &Path) -> Result<()> {
    let file = PlantedFile {
        x: x.to_i64_rows()?,
    };
    let mut s =
        serde_json::to_string_pretty(&file).map_err(|e| CilsError::InstanceFile(e.to_string()))?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

pub fn load_planted(path: &Path) -> Result<IntMatrix> {
    let text = std::fs::read_to_string(path)?;
    let file: PlantedFile = serde_json::from_str(&text).map_err(|e| {
        CilsError::InstanceFile(format!("line {} column {}: {e}", e.line(), e.column()))
    })?;
    IntMatrix::from_rows(&file.x)
}
