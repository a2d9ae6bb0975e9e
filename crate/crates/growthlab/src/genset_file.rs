//! Generator-set files: integer-only JSON that parses to an exact
//! [`GeneratorSet`].
//!
//! Schema: `{ "dim": d, "denominator": s, "generators": [ { "name": str,
//! "num": [[int]], "power": int } ], "symmetrize": bool }`. Entry `(i, j)`
//! of a generator is `num[i][j] / s^power`, so files stay integer-only and
//! parsing is exact. `denominator` defaults to 1, `power` to 0, `name` to
//! `g<index>`, and `symmetrize` to true; with `"symmetrize": false` the
//! listed matrices must already be closed under inverses.

use std::path::Path;

use growthlab_core::cayley::{CayleyError, GeneratorSet};
use growthlab_core::matrix::SquareMatrix;
use growthlab_core::{Integer, Rational, RationalMatrix};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GensetError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed generator file: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("dim must be at least 1")]
    ZeroDim,
    #[error("denominator must be at least 1")]
    ZeroDenominator,
    #[error("file lists no generators")]
    Empty,
    #[error("generator {index} ({name}): expected a {dim}x{dim} integer matrix")]
    BadShape { index: usize, name: String, dim: usize },
    #[error("singular generator at index {index} ({name})")]
    Singular { index: usize, name: String },
    #[error("generator names must be distinct: {name} repeats")]
    DuplicateName { name: String },
    #[error("file declares symmetrize: false but the set is not inverse-closed")]
    NotSymmetric,
    #[error(transparent)]
    Invalid(CayleyError),
}

#[derive(Debug, Serialize, Deserialize)]
struct GensetFile {
    #[serde(default)]
    schema: Option<u32>,
    dim: usize,
    #[serde(default = "default_denominator")]
    denominator: u64,
    generators: Vec<GeneratorEntry>,
    #[serde(default = "default_symmetrize")]
    symmetrize: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct GeneratorEntry {
    #[serde(default)]
    name: Option<String>,
    num: Vec<Vec<i64>>,
    #[serde(default)]
    power: u32,
}

fn default_denominator() -> u64 {
    1
}

fn default_symmetrize() -> bool {
    true
}

/// Loads, validates, and (by default) symmetrizes a generator set.
pub fn load_genset(path: impl AsRef<Path>) -> Result<GeneratorSet, GensetError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| GensetError::Io { path: path.display().to_string(), source })?;
    parse_genset(&text)
}

/// Same as [`load_genset`] but from in-memory JSON.
pub fn parse_genset(text: &str) -> Result<GeneratorSet, GensetError> {
    let file: GensetFile = serde_json::from_str(text)?;
    if file.dim == 0 {
        return Err(GensetError::ZeroDim);
    }
    if file.denominator == 0 {
        return Err(GensetError::ZeroDenominator);
    }
    if file.generators.is_empty() {
        return Err(GensetError::Empty);
    }

    let mut labels = Vec::with_capacity(file.generators.len());
    let mut mats: Vec<RationalMatrix> = Vec::with_capacity(file.generators.len());
    for (index, entry) in file.generators.iter().enumerate() {
        let name = entry.name.clone().unwrap_or_else(|| format!("g{index}"));
        if labels.contains(&name) {
            return Err(GensetError::DuplicateName { name });
        }
        let dim = file.dim;
        if entry.num.len() != dim || entry.num.iter().any(|row| row.len() != dim) {
            return Err(GensetError::BadShape { index, name, dim });
        }
        let scale = Integer::from(file.denominator).pow(entry.power);
        let rows: Vec<Vec<Rational>> = entry
            .num
            .iter()
            .map(|row| {
                row.iter().map(|&n| Rational::new(Integer::from(n), scale.clone())).collect()
            })
            .collect();
        let m = SquareMatrix::from_rows(rows).expect("shape checked above");
        mats.push(m);
        labels.push(name);
    }

    let gens =
        GeneratorSet::new(file.dim, file.denominator, mats, Some(labels.clone())).map_err(|e| {
            match e {
                CayleyError::SingularGenerator { index } => {
                    GensetError::Singular { index, name: labels[index].clone() }
                }
                other => GensetError::Invalid(other),
            }
        })?;
    if file.symmetrize {
        Ok(gens.symmetrize())
    } else {
        gens.assert_symmetric().map_err(|_| GensetError::NotSymmetric)
    }
}
