//! Artifact layout for a run directory.
//!
//! Every run writes into one directory. Filenames embed the generator-set
//! digest (and a radius or modulus where it matters) so artifacts from
//! different inputs never collide:
//!
//! ```text
//! report_{digest}.json            pipeline report (always written, even on abort)
//! certificate_{digest}.json       injective-prime certificate
//! ball_k{k}_{digest}.csv          canonical keys of the radius-k ball, "radius,key_hex"
//! series_element_{digest}.csv     element counts per radius, "radius,count,kind,gens_digest"
//! series_trace_{digest}.csv       distinct-trace counts per radius, same columns
//! census_trace_p{p}_{digest}.csv      "value,count" over the mod-p group
//! census_charpoly_p{p}_{digest}.csv   "value,count", coefficients space-joined
//! traces_r{m}_{digest}.csv        sorted distinct integer traces of the radius-m ball
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use growthlab_core::Rational;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot serialize {what}: {source}")]
    Serialize { what: String, source: serde_json::Error },
    #[error("{path}:{line}: malformed row: {reason}")]
    MalformedRow { path: String, line: usize, reason: String },
    #[error("no {pattern} file found in {dir}")]
    MissingArtifact { pattern: String, dir: String },
}

pub fn report_path(dir: &Path, digest: &str) -> PathBuf {
    dir.join(format!("report_{digest}.json"))
}

pub fn certificate_path(dir: &Path, digest: &str) -> PathBuf {
    dir.join(format!("certificate_{digest}.json"))
}

pub fn ball_keys_path(dir: &Path, k: usize, digest: &str) -> PathBuf {
    dir.join(format!("ball_k{k}_{digest}.csv"))
}

pub fn series_path(dir: &Path, kind: &str, digest: &str) -> PathBuf {
    dir.join(format!("series_{kind}_{digest}.csv"))
}

pub fn census_path(dir: &Path, kind: &str, prime: u64, digest: &str) -> PathBuf {
    dir.join(format!("census_{kind}_p{prime}_{digest}.csv"))
}

pub fn traces_path(dir: &Path, radius: usize, digest: &str) -> PathBuf {
    dir.join(format!("traces_r{radius}_{digest}.csv"))
}

/// Serialize `value` as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, what: &str, value: &T) -> Result<(), PersistError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|source| PersistError::Serialize { what: what.to_string(), source })?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), PersistError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|source| PersistError::Write {
                path: parent.display().to_string(),
                source,
            })?;
        }
    }
    std::fs::write(path, text)
        .map_err(|source| PersistError::Write { path: path.display().to_string(), source })
}

pub fn read_text(path: &Path) -> Result<String, PersistError> {
    std::fs::read_to_string(path)
        .map_err(|source| PersistError::Read { path: path.display().to_string(), source })
}

/// CSV of canonical ball keys: one row per element, level-major order.
pub fn ball_keys_csv<'a>(
    rows: impl Iterator<Item = (usize, &'a growthlab_core::CanonicalKey)>,
) -> String {
    let mut out = String::from("radius,key_hex\n");
    for (radius, key) in rows {
        out.push_str(&format!("{radius},{}\n", key.to_hex()));
    }
    out
}

/// CSV of sorted distinct trace values, one per row. Values are exact
/// rationals printed as `n` or `n/d`; integer inputs stay integer-looking.
pub fn traces_csv(values: &[Rational]) -> String {
    let mut out = String::from("trace\n");
    for value in values {
        out.push_str(&format!("{value}\n"));
    }
    out
}

pub fn parse_traces_csv(path: &str, text: &str) -> Result<Vec<Rational>, PersistError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "trace")) => {}
        other => {
            return Err(PersistError::MalformedRow {
                path: path.to_string(),
                line: 1,
                reason: format!("expected header \"trace\", got {:?}", other.map(|(_, l)| l)),
            });
        }
    }
    let mut values = Vec::new();
    for (index, line) in lines {
        let value: Rational = line.trim().parse().map_err(|_| PersistError::MalformedRow {
            path: path.to_string(),
            line: index + 1,
            reason: format!("not an exact rational: {line:?}"),
        })?;
        values.push(value);
    }
    Ok(values)
}

/// Parse a census CSV back into its value table. Values are the space-joined
/// residue vectors written by `CensusTable::to_csv`.
pub fn parse_census_csv(path: &str, text: &str) -> Result<BTreeMap<Vec<u64>, u64>, PersistError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "value,count")) => {}
        other => {
            return Err(PersistError::MalformedRow {
                path: path.to_string(),
                line: 1,
                reason: format!("expected header \"value,count\", got {:?}", other.map(|(_, l)| l)),
            });
        }
    }
    let mut table = BTreeMap::new();
    for (index, line) in lines {
        let malformed = |reason: String| PersistError::MalformedRow {
            path: path.to_string(),
            line: index + 1,
            reason,
        };
        let (value_part, count_part) =
            line.rsplit_once(',').ok_or_else(|| malformed(format!("no comma in {line:?}")))?;
        let count: u64 =
            count_part.trim().parse().map_err(|_| malformed(format!("bad count in {line:?}")))?;
        let value: Vec<u64> = value_part
            .split(' ')
            .map(|piece| piece.parse::<u64>())
            .collect::<Result<_, _>>()
            .map_err(|_| malformed(format!("bad value in {line:?}")))?;
        if table.insert(value, count).is_some() {
            return Err(malformed(format!("duplicate value in {line:?}")));
        }
    }
    Ok(table)
}

/// Locate the single `report_*.json` in a run directory.
pub fn find_report(dir: &Path) -> Result<PathBuf, PersistError> {
    let entries = std::fs::read_dir(dir)
        .map_err(|source| PersistError::Read { path: dir.display().to_string(), source })?;
    let mut hits: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let entry = entry
            .map_err(|source| PersistError::Read { path: dir.display().to_string(), source })?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if name.starts_with("report_") && name.ends_with(".json") {
            hits.push(entry.path());
        }
    }
    hits.sort();
    match hits.len() {
        1 => Ok(hits.remove(0)),
        0 => Err(PersistError::MissingArtifact {
            pattern: "report_*.json".to_string(),
            dir: dir.display().to_string(),
        }),
        _ => Err(PersistError::MissingArtifact {
            pattern: format!("a unique report_*.json (found {})", hits.len()),
            dir: dir.display().to_string(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn census_csv_roundtrips() {
        let text = "value,count\n0,6\n1 2,9\n100,3\n";
        let table = parse_census_csv("census.csv", text).unwrap();
        assert_eq!(table.len(), 3);
        assert_eq!(table[&vec![0]], 6);
        assert_eq!(table[&vec![1, 2]], 9);
        assert!(parse_census_csv("census.csv", "value,count\nx,1\n").is_err());
        assert!(parse_census_csv("census.csv", "wrong\n").is_err());
    }

    #[test]
    fn traces_csv_roundtrips() {
        let values: Vec<Rational> =
            ["-3", "0", "3/2", "12345678901234567890"].iter().map(|s| s.parse().unwrap()).collect();
        let text = traces_csv(&values);
        assert_eq!(text, "trace\n-3\n0\n3/2\n12345678901234567890\n");
        assert_eq!(parse_traces_csv("traces.csv", &text).unwrap(), values);
        assert!(parse_traces_csv("traces.csv", "trace\nnot-a-number\n").is_err());
    }

    #[test]
    fn find_report_wants_exactly_one() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(find_report(dir.path()), Err(PersistError::MissingArtifact { .. })));
        write_text(&report_path(dir.path(), "abc"), "{}\n").unwrap();
        assert_eq!(find_report(dir.path()).unwrap(), report_path(dir.path(), "abc"));
        write_text(&report_path(dir.path(), "def"), "{}\n").unwrap();
        assert!(matches!(find_report(dir.path()), Err(PersistError::MissingArtifact { .. })));
    }
}
