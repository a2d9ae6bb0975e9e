//! Experiment harness around `growthlab-core`: generator-set files, run
//! manifests, the end-to-end pipeline, artifact persistence, replay
//! verification, and the growth trichotomy report.
//!
//! The binary in this crate exposes everything as subcommands; the library
//! modules hold the logic so integration tests can drive runs directly.

pub mod genset_file;
pub mod manifest;
pub mod persist;
pub mod pipeline;
pub mod trichotomy;
pub mod verify;

pub use genset_file::{load_genset, GensetError};
pub use manifest::{ExperimentManifest, ManifestError};
pub use pipeline::{
    run_pipeline, IntegerTraceSummary, PipelineError, PipelineReport, PipelineVerdicts,
};
pub use trichotomy::{empirical_label, trichotomy_report, TrichotomyError, TrichotomyRow};
pub use verify::{verify_run, CheckResult, VerifyError, VerifyReport};
