//! Experiment manifests: every pipeline parameter in one JSON file, so a run
//! is reproducible from the manifest and the generator file alone.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed manifest: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("unsupported manifest schema {got} (this build reads schema 1)")]
    Schema { got: u32 },
    #[error("generator file {path} does not exist")]
    MissingGensFile { path: String },
    #[error("radius_k must be in 1..=12, got {got}")]
    BadRadius { got: usize },
    #[error("window must satisfy 2 <= lo <= hi, got {lo}..={hi}")]
    BadWindow { lo: u64, hi: u64 },
    #[error("budget must be at least 1")]
    ZeroBudget,
    #[error("sample_cap must be at least 2, got {got}")]
    BadSampleCap { got: usize },
    #[error("modp_cap must be at least 2, got {got}")]
    BadModPCap { got: usize },
}

/// Parameters of one pipeline run. Defaults are sized for the SL2 fixtures:
/// the element budget covers a few hundred thousand exact matrices and the
/// closure cap covers SL2(F_p) up to p around 200.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub schema: u32,
    /// Path to the generator-set JSON, relative to the working directory.
    pub gens_file: String,
    /// Ball radius `k` examined by the injective-prime search.
    #[serde(default = "default_radius_k")]
    pub radius_k: usize,
    pub window_lo: u64,
    pub window_hi: u64,
    /// Element budget for characteristic-zero enumeration.
    #[serde(default = "default_budget")]
    pub budget: u64,
    /// Element cap for mod-p closures.
    #[serde(default = "default_modp_cap")]
    pub modp_cap: usize,
    /// Power cap for the cover-exponent search.
    #[serde(default = "default_d_cap")]
    pub d_cap: usize,
    /// Pair-sampling cap for the injective-prime search.
    #[serde(default = "default_sample_cap")]
    pub sample_cap: usize,
    #[serde(default)]
    pub seed: u64,
    /// Default output directory; a `--out` flag overrides it.
    #[serde(default)]
    pub out_dir: Option<String>,
}

fn default_radius_k() -> usize {
    5
}

fn default_budget() -> u64 {
    500_000
}

fn default_modp_cap() -> usize {
    10_000_000
}

fn default_d_cap() -> usize {
    64
}

fn default_sample_cap() -> usize {
    2000
}

impl ExperimentManifest {
    pub fn new(gens_file: String, window_lo: u64, window_hi: u64) -> ExperimentManifest {
        ExperimentManifest {
            schema: 1,
            gens_file,
            radius_k: default_radius_k(),
            window_lo,
            window_hi,
            budget: default_budget(),
            modp_cap: default_modp_cap(),
            d_cap: default_d_cap(),
            sample_cap: default_sample_cap(),
            seed: 0,
            out_dir: None,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ExperimentManifest, ManifestError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| ManifestError::Io { path: path.display().to_string(), source })?;
        let manifest: ExperimentManifest = serde_json::from_str(&text)?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<(), ManifestError> {
        if self.schema != 1 {
            return Err(ManifestError::Schema { got: self.schema });
        }
        if !Path::new(&self.gens_file).exists() {
            return Err(ManifestError::MissingGensFile { path: self.gens_file.clone() });
        }
        if self.radius_k == 0 || self.radius_k > 12 {
            return Err(ManifestError::BadRadius { got: self.radius_k });
        }
        if self.window_lo < 2 || self.window_lo > self.window_hi {
            return Err(ManifestError::BadWindow { lo: self.window_lo, hi: self.window_hi });
        }
        if self.budget == 0 {
            return Err(ManifestError::ZeroBudget);
        }
        if self.sample_cap < 2 {
            return Err(ManifestError::BadSampleCap { got: self.sample_cap });
        }
        if self.modp_cap < 2 {
            return Err(ManifestError::BadModPCap { got: self.modp_cap });
        }
        Ok(())
    }
}
