//! The end-to-end experiment.
//!
//! Six stages, each persisting its artifacts before the next begins:
//!
//! 1. enumerate the radius-`k` ball exactly over Q;
//! 2. pigeonhole an injective prime `p` from the window;
//! 3. confirm reduction mod `p` is injective on that ball;
//! 4. close the reduced generators up mod `p` and find the surjectivity
//!    radius `n*` (abort if the closure is trivial or a proper subgroup);
//! 5. census traces and characteristic polynomials over the full mod-`p`
//!    group, checking the trace census attains all `p` residues;
//! 6. enumerate the characteristic-zero ball toward radius `n*` within the
//!    element budget and bound its distinct-trace count from below.
//!
//! A stage failure still writes the report (status "aborted", with the stage
//! name and reason) and keeps every artifact produced so far.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::path::Path;
use std::time::Instant;

use growthlab_core::{
    count_series, enumerate_ball, find_injective_prime, is_injective_mod_p, primes_in,
    surjectivity_closure, value_census, CensusKind, CountKind, GeneratorSet,
    InjectivePrimeCertificate, Rational, SurjectivityOutcome,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genset_file::{load_genset, GensetError};
use crate::manifest::{ExperimentManifest, ManifestError};
use crate::persist::{self, PersistError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Genset(#[from] GensetError),
    #[error("prime window: {0}")]
    Sieve(#[from] growthlab_core::primes::SieveError),
    #[error(transparent)]
    Persist(#[from] PersistError),
    #[error("internal failure in {stage}: {reason}")]
    Internal { stage: &'static str, reason: String },
}

/// What stage 6 established about distinct traces of the exact ball.
///
/// `B(n*)` itself can be too large to enumerate, so the stage enumerates the
/// deepest budget-complete radius `m <= n*` and reports two lower bounds for
/// the count at `n*`: the exact count at radius `m` (traces of `B(m)` are a
/// subset of traces of `B(n*)`), and `p` whenever the residue cover holds
/// (the ball covers the whole group mod `p` at radius `n*` and the group's
/// traces attain every residue, so the ball's traces meet all `p` classes).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegerTraceSummary {
    /// The surjectivity radius `n*` the bound is stated at.
    pub requested_radius: usize,
    /// Deepest radius enumerated exactly within the element budget.
    pub enumerated_radius: usize,
    /// True when the enumeration reached `n*` (or stabilized before it), so
    /// `distinct_at_enumerated_radius` is the exact count at `n*`.
    pub exact_at_nstar: bool,
    pub distinct_at_enumerated_radius: u64,
    /// True when surjectivity held at `n*` and the mod-p trace census
    /// attained all `p` residues.
    pub residue_cover: bool,
    pub lower_bound_at_nstar: u64,
}

/// One boolean per claim the pipeline asserts; `None` until the owning stage
/// runs. `all` is true only when every claim was reached and held.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineVerdicts {
    pub injective_at_k: Option<bool>,
    pub surjective: Option<bool>,
    pub modp_traces_equal_p: Option<bool>,
    pub integer_traces_geq_p: Option<bool>,
    pub all: bool,
}

impl PipelineVerdicts {
    fn empty() -> PipelineVerdicts {
        PipelineVerdicts {
            injective_at_k: None,
            surjective: None,
            modp_traces_equal_p: None,
            integer_traces_geq_p: None,
            all: false,
        }
    }

    fn settle(&mut self) {
        self.all = [
            self.injective_at_k,
            self.surjective,
            self.modp_traces_equal_p,
            self.integer_traces_geq_p,
        ]
        .iter()
        .all(|v| *v == Some(true));
    }
}

/// The persisted outcome of one run. Field order is the JSON order;
/// `timings_ms` stays last so reports can be compared modulo timing noise by
/// dropping the final key.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub schema: u32,
    /// "ok" when every stage ran and every verdict holds, else "aborted".
    pub status: String,
    pub failed_stage: Option<String>,
    pub failure_reason: Option<String>,
    pub gens_file: String,
    pub gens_digest: String,
    pub dim: usize,
    /// Implied schedule exponent `ln(window_lo) / (3k)`, recorded for
    /// comparison with window schedules of the form `[e^{3an}, e^{4an}]`.
    pub alpha_hat: f64,
    pub prime: Option<u64>,
    pub good_prime_fraction: Option<f64>,
    pub certificate: Option<InjectivePrimeCertificate>,
    pub surjectivity: Option<SurjectivityOutcome>,
    pub modp_trace_distinct: Option<u64>,
    pub modp_charpoly_distinct: Option<u64>,
    pub integer_traces: Option<IntegerTraceSummary>,
    pub verdicts: PipelineVerdicts,
    pub manifest: ExperimentManifest,
    pub timings_ms: BTreeMap<String, u128>,
}

impl PipelineReport {
    /// Surjectivity radius `n*`, when stage 4 found one.
    pub fn n_star(&self) -> Option<usize> {
        self.surjectivity.as_ref().filter(|s| s.surjective).map(|s| s.radius)
    }
}

struct RunState {
    report: PipelineReport,
    out_dir: std::path::PathBuf,
}

impl RunState {
    fn persist_report(&self) -> Result<(), PipelineError> {
        let path = persist::report_path(&self.out_dir, &self.report.gens_digest);
        persist::write_json(&path, "pipeline report", &self.report)?;
        Ok(())
    }

    fn abort(
        mut self,
        stage: &str,
        reason: String,
        timings: BTreeMap<String, u128>,
    ) -> Result<PipelineReport, PipelineError> {
        self.report.status = "aborted".to_string();
        self.report.failed_stage = Some(stage.to_string());
        self.report.failure_reason = Some(reason);
        self.report.verdicts.settle();
        self.report.timings_ms = timings;
        self.persist_report()?;
        Ok(self.report)
    }

    fn finish(mut self, timings: BTreeMap<String, u128>) -> Result<PipelineReport, PipelineError> {
        self.report.verdicts.settle();
        self.report.status = if self.report.verdicts.all { "ok" } else { "aborted" }.to_string();
        self.report.timings_ms = timings;
        self.persist_report()?;
        Ok(self.report)
    }
}

fn internal(stage: &'static str) -> impl Fn(growthlab_core::modp::ModPError) -> PipelineError {
    move |e| PipelineError::Internal { stage, reason: e.to_string() }
}

/// Runs the six stages against `manifest`, writing all artifacts into
/// `out_dir`. Stage failures return the aborted report; `Err` is reserved
/// for environment problems (unreadable files, unwritable output) and
/// internal bugs.
pub fn run_pipeline(
    manifest: &ExperimentManifest,
    out_dir: &Path,
) -> Result<PipelineReport, PipelineError> {
    manifest.validate()?;
    let gens = load_genset(&manifest.gens_file)?;
    let digest = gens.short_digest();
    std::fs::create_dir_all(out_dir)
        .map_err(|source| PersistError::Write { path: out_dir.display().to_string(), source })?;

    let state = RunState {
        report: PipelineReport {
            schema: 1,
            status: "running".to_string(),
            failed_stage: None,
            failure_reason: None,
            gens_file: manifest.gens_file.clone(),
            gens_digest: digest.clone(),
            dim: gens.dim(),
            alpha_hat: (manifest.window_lo as f64).ln() / (3.0 * manifest.radius_k as f64),
            prime: None,
            good_prime_fraction: None,
            certificate: None,
            surjectivity: None,
            modp_trace_distinct: None,
            modp_charpoly_distinct: None,
            integer_traces: None,
            verdicts: PipelineVerdicts::empty(),
            manifest: manifest.clone(),
            timings_ms: BTreeMap::new(),
        },
        out_dir: out_dir.to_path_buf(),
    };
    run_stages(state, manifest, &gens, &digest)
}

fn run_stages(
    mut state: RunState,
    manifest: &ExperimentManifest,
    gens: &GeneratorSet,
    digest: &str,
) -> Result<PipelineReport, PipelineError> {
    let mut timings: BTreeMap<String, u128> = BTreeMap::new();
    let out_dir = state.out_dir.clone();

    // Stage 1: the exact radius-k ball.
    let started = Instant::now();
    let ball_k = enumerate_ball(gens, manifest.radius_k, manifest.budget).map_err(|e| {
        PipelineError::Internal { stage: "stage1_enumerate_ball", reason: e.to_string() }
    })?;
    timings.insert("stage1_enumerate_ball".to_string(), started.elapsed().as_millis());
    if ball_k.last_radius() < manifest.radius_k && !ball_k.is_complete() {
        return state.abort(
            "stage1_enumerate_ball",
            format!(
                "element budget {} exhausted at radius {} before reaching k = {}",
                manifest.budget,
                ball_k.last_radius(),
                manifest.radius_k
            ),
            timings,
        );
    }
    let k = ball_k.last_radius();
    let keys_csv = persist::ball_keys_csv(
        (0..=k).flat_map(|r| ball_k.sphere_keys(r).iter().map(move |key| (r, key))),
    );
    persist::write_text(&persist::ball_keys_path(&out_dir, k, digest), &keys_csv)?;

    // Stage 2: pigeonhole an injective prime over the window.
    let started = Instant::now();
    let window = primes_in(manifest.window_lo, manifest.window_hi)?;
    let found = find_injective_prime(&ball_k, k, &window, manifest.sample_cap, manifest.seed);
    timings.insert("stage2_find_injective_prime".to_string(), started.elapsed().as_millis());
    let certificate = match found {
        Ok(certificate) => certificate,
        Err(
            e @ (growthlab_core::pigeonhole::PigeonholeError::NoCleanPrime { .. }
            | growthlab_core::pigeonhole::PigeonholeError::EmptyWindow
            | growthlab_core::pigeonhole::PigeonholeError::NoAdmissiblePrimes),
        ) => {
            return state.abort("stage2_find_injective_prime", e.to_string(), timings);
        }
        Err(e) => {
            return Err(PipelineError::Internal {
                stage: "stage2_find_injective_prime",
                reason: e.to_string(),
            });
        }
    };
    let p = certificate.prime;
    persist::write_json(
        &persist::certificate_path(&out_dir, digest),
        "injective-prime certificate",
        &certificate,
    )?;
    state.report.prime = Some(p);
    state.report.good_prime_fraction = Some(certificate.good_prime_fraction());
    state.report.certificate = Some(certificate);

    // Stage 3: reduction mod p must be injective on the whole ball.
    let started = Instant::now();
    let injective =
        is_injective_mod_p(&ball_k, k, p).map_err(internal("stage3_verify_injectivity"))?;
    timings.insert("stage3_verify_injectivity".to_string(), started.elapsed().as_millis());
    state.report.verdicts.injective_at_k = Some(injective);
    if !injective {
        return state.abort(
            "stage3_verify_injectivity",
            format!("reduction mod {p} is not injective on the radius-{k} ball"),
            timings,
        );
    }

    // Stage 4: close the reduced generators up mod p.
    let started = Instant::now();
    let closed = surjectivity_closure(gens, p, manifest.modp_cap);
    timings.insert("stage4_surjectivity".to_string(), started.elapsed().as_millis());
    let (outcome, group) = match closed {
        Ok(pair) => pair,
        Err(e @ growthlab_core::modp::ModPError::ClosureCapExceeded { .. }) => {
            return state.abort("stage4_surjectivity", e.to_string(), timings);
        }
        Err(e) => {
            return Err(PipelineError::Internal {
                stage: "stage4_surjectivity",
                reason: e.to_string(),
            });
        }
    };
    state.report.surjectivity = Some(outcome.clone());
    state.report.verdicts.surjective = Some(outcome.surjective);
    if group.len() == 1 {
        return state.abort(
            "stage4_surjectivity",
            format!("degenerate generator set: the mod-{p} closure is trivial (order 1)"),
            timings,
        );
    }
    if !outcome.surjective {
        return state.abort(
            "stage4_surjectivity",
            format!(
                "closure is a proper subgroup of SL_{}(F_{}): order {} of {}",
                outcome.dim, p, outcome.closure_order, outcome.target_order
            ),
            timings,
        );
    }
    let n_star = outcome.radius;

    // Stage 5: trace and charpoly censuses over the full group.
    let started = Instant::now();
    let trace_census =
        value_census(&group, CensusKind::Trace).map_err(internal("stage5_modp_census"))?;
    let charpoly_census =
        value_census(&group, CensusKind::CharPoly).map_err(internal("stage5_modp_census"))?;
    timings.insert("stage5_modp_census".to_string(), started.elapsed().as_millis());
    persist::write_text(
        &persist::census_path(&out_dir, "trace", p, digest),
        &trace_census.to_csv(),
    )?;
    persist::write_text(
        &persist::census_path(&out_dir, "charpoly", p, digest),
        &charpoly_census.to_csv(),
    )?;
    let trace_distinct = trace_census.distinct_values() as u64;
    state.report.modp_trace_distinct = Some(trace_distinct);
    state.report.modp_charpoly_distinct = Some(charpoly_census.distinct_values() as u64);
    state.report.verdicts.modp_traces_equal_p = Some(trace_distinct == p);
    if trace_distinct != p {
        return state.abort(
            "stage5_modp_census",
            format!("mod-{p} trace census has {trace_distinct} distinct values, expected {p}"),
            timings,
        );
    }

    // Stage 6: distinct traces of the exact ball, bounded at n*.
    let started = Instant::now();
    let ball_n = enumerate_ball(gens, n_star, manifest.budget).map_err(|e| {
        PipelineError::Internal { stage: "stage6_integer_traces", reason: e.to_string() }
    })?;
    let m = ball_n.last_radius();
    let element_series = count_series(&ball_n, CountKind::Element);
    let trace_series = count_series(&ball_n, CountKind::Trace);
    let trace_values: BTreeSet<Rational> =
        ball_n.ball_matrices(m).map(|matrix| matrix.trace()).collect();
    timings.insert("stage6_integer_traces".to_string(), started.elapsed().as_millis());

    persist::write_text(
        &persist::series_path(&out_dir, "element", digest),
        &element_series.to_csv(),
    )?;
    persist::write_text(&persist::series_path(&out_dir, "trace", digest), &trace_series.to_csv())?;
    let values: Vec<Rational> = trace_values.into_iter().collect();
    persist::write_text(&persist::traces_path(&out_dir, m, digest), &persist::traces_csv(&values))?;

    let distinct_at_m = values.len() as u64;
    if trace_series.count_at(m) != Some(distinct_at_m) {
        return Err(PipelineError::Internal {
            stage: "stage6_integer_traces",
            reason: format!(
                "trace series says {:?} distinct values at radius {m}, direct count says {distinct_at_m}",
                trace_series.count_at(m)
            ),
        });
    }
    let residue_cover = outcome.surjective && trace_distinct == p;
    let lower_bound_at_nstar = if residue_cover { distinct_at_m.max(p) } else { distinct_at_m };
    let summary = IntegerTraceSummary {
        requested_radius: n_star,
        enumerated_radius: m,
        exact_at_nstar: ball_n.is_complete(),
        distinct_at_enumerated_radius: distinct_at_m,
        residue_cover,
        lower_bound_at_nstar,
    };
    state.report.verdicts.integer_traces_geq_p = Some(lower_bound_at_nstar >= p);
    state.report.integer_traces = Some(summary);

    state.finish(timings)
}
