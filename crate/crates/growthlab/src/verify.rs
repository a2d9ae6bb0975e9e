//! Replays a persisted run: every claim in a pipeline report is re-derived
//! from the generator file and compared against the stored artifacts. A
//! tampered or stale artifact fails its check; nothing is trusted.

use std::collections::BTreeSet;
use std::path::Path;

use growthlab_core::{
    count_series, enumerate_ball, is_injective_mod_p, surjectivity_closure, value_census,
    verify_certificate, CensusKind, CountKind, Rational,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genset_file::{load_genset, GensetError};
use crate::persist::{self, PersistError};
use crate::pipeline::PipelineReport;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Persist(#[from] PersistError),
    #[error(transparent)]
    Genset(#[from] GensetError),
    #[error("malformed report: {0}")]
    Malformed(#[from] serde_json::Error),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub run_dir: String,
    pub gens_digest: String,
    pub checks: Vec<CheckResult>,
    pub all_passed: bool,
}

impl VerifyReport {
    fn finish(run_dir: &Path, gens_digest: String, checks: Vec<CheckResult>) -> VerifyReport {
        let all_passed = checks.iter().all(|c| c.passed);
        VerifyReport { run_dir: run_dir.display().to_string(), gens_digest, checks, all_passed }
    }
}

fn pass(name: &str) -> CheckResult {
    CheckResult { name: name.to_string(), passed: true, detail: "ok".to_string() }
}

fn fail(name: &str, detail: String) -> CheckResult {
    CheckResult { name: name.to_string(), passed: false, detail }
}

fn compare_file(dir: &Path, path: &Path, name: &str, expected: &str) -> CheckResult {
    let shown = path.strip_prefix(dir).unwrap_or(path).display();
    match persist::read_text(path) {
        Ok(stored) if stored == expected => pass(name),
        Ok(_) => fail(name, format!("{shown} differs from the recomputed content")),
        Err(e) => fail(name, e.to_string()),
    }
}

/// Verifies the run directory `dir`. Returns `Err` only when there is no
/// parseable report or the generator file is unreadable; every other
/// discrepancy is reported as a failed check.
pub fn verify_run(dir: &Path) -> Result<VerifyReport, VerifyError> {
    let report_path = persist::find_report(dir)?;
    let report: PipelineReport = serde_json::from_str(&persist::read_text(&report_path)?)?;
    let manifest = &report.manifest;
    let mut checks: Vec<CheckResult> = Vec::new();

    checks.push(if report.schema == 1 {
        pass("report_schema")
    } else {
        fail("report_schema", format!("schema {} is not 1", report.schema))
    });

    // The generator file is the root of trust: everything is re-derived
    // from it, so its digest must match the report's.
    let gens = load_genset(&report.gens_file)?;
    let digest = gens.short_digest();
    if digest != report.gens_digest {
        checks.push(fail(
            "gens_digest",
            format!("generator file digests to {digest}, report says {}", report.gens_digest),
        ));
        return Ok(VerifyReport::finish(dir, report.gens_digest, checks));
    }
    checks.push(pass("gens_digest"));

    // Status bookkeeping must be internally consistent.
    let parts = [
        report.verdicts.injective_at_k,
        report.verdicts.surjective,
        report.verdicts.modp_traces_equal_p,
        report.verdicts.integer_traces_geq_p,
    ];
    let conjunction = parts.iter().all(|v| *v == Some(true));
    let expected_status = if conjunction { "ok" } else { "aborted" };
    if report.verdicts.all != conjunction {
        checks.push(fail(
            "status_consistent",
            format!(
                "verdicts.all = {}, but the verdicts conjoin to {conjunction}",
                report.verdicts.all
            ),
        ));
    } else if report.status != expected_status {
        checks.push(fail(
            "status_consistent",
            format!(
                "status {:?} does not match verdicts (expected {expected_status:?})",
                report.status
            ),
        ));
    } else if report.status == "aborted" && report.failed_stage.is_none() {
        checks.push(fail("status_consistent", "aborted report names no failed stage".to_string()));
    } else {
        checks.push(pass("status_consistent"));
    }

    // Stage 1: the radius-k ball and its persisted keys.
    if report.failed_stage.as_deref() == Some("stage1_enumerate_ball") {
        return Ok(VerifyReport::finish(dir, digest, checks));
    }
    let ball_k = match enumerate_ball(&gens, manifest.radius_k, manifest.budget) {
        Ok(ball) => ball,
        Err(e) => {
            checks.push(fail("ball_k_keys", format!("re-enumeration failed: {e}")));
            return Ok(VerifyReport::finish(dir, digest, checks));
        }
    };
    let k = ball_k.last_radius();
    let keys_csv = persist::ball_keys_csv(
        (0..=k).flat_map(|r| ball_k.sphere_keys(r).iter().map(move |key| (r, key))),
    );
    checks.push(compare_file(
        dir,
        &persist::ball_keys_path(dir, k, &digest),
        "ball_k_keys",
        &keys_csv,
    ));

    // Stage 2: the certificate replays against the re-enumerated ball.
    let Some(report_cert) = &report.certificate else {
        return Ok(VerifyReport::finish(dir, digest, checks));
    };
    let cert_check = match persist::read_text(&persist::certificate_path(dir, &digest)) {
        Ok(text) => {
            match serde_json::from_str::<growthlab_core::InjectivePrimeCertificate>(&text) {
                Ok(stored) if &stored != report_cert => fail(
                    "certificate_replays",
                    "certificate file differs from the report's".to_string(),
                ),
                Ok(stored) => match verify_certificate(&ball_k, &stored) {
                    Ok(())
                        if report.prime == Some(stored.prime)
                            && report.good_prime_fraction == Some(stored.good_prime_fraction()) =>
                    {
                        pass("certificate_replays")
                    }
                    Ok(()) => fail(
                        "certificate_replays",
                        "report prime or good-prime fraction differs from the certificate"
                            .to_string(),
                    ),
                    Err(e) => fail("certificate_replays", e.to_string()),
                },
                Err(e) => {
                    fail("certificate_replays", format!("certificate file is malformed: {e}"))
                }
            }
        }
        Err(e) => fail("certificate_replays", e.to_string()),
    };
    checks.push(cert_check);
    let p = report_cert.prime;

    // Stage 3: injectivity of reduction mod p on the ball.
    if let Some(claimed) = report.verdicts.injective_at_k {
        checks.push(match is_injective_mod_p(&ball_k, k, p) {
            Ok(got) if got == claimed => pass("injectivity_mod_p"),
            Ok(got) => fail(
                "injectivity_mod_p",
                format!("re-check says injective = {got}, report says {claimed}"),
            ),
            Err(e) => fail("injectivity_mod_p", e.to_string()),
        });
    }
    if report.verdicts.injective_at_k != Some(true) {
        return Ok(VerifyReport::finish(dir, digest, checks));
    }

    // Stage 4: the mod-p closure and surjectivity radius.
    let Some(report_surj) = &report.surjectivity else {
        return Ok(VerifyReport::finish(dir, digest, checks));
    };
    let group = match surjectivity_closure(&gens, p, manifest.modp_cap) {
        Ok((outcome, group)) if &outcome == report_surj => {
            checks.push(pass("surjectivity"));
            Some(group)
        }
        Ok((outcome, _)) => {
            checks.push(fail(
                "surjectivity",
                format!(
                    "re-run gives radius {} order {}, report says radius {} order {}",
                    outcome.radius,
                    outcome.closure_order,
                    report_surj.radius,
                    report_surj.closure_order
                ),
            ));
            None
        }
        Err(e) => {
            checks.push(fail("surjectivity", e.to_string()));
            None
        }
    };

    // Stage 5: censuses over the full group.
    if let (Some(group), Some(trace_distinct)) = (&group, report.modp_trace_distinct) {
        let recomputed = value_census(group, CensusKind::Trace)
            .and_then(|t| value_census(group, CensusKind::CharPoly).map(|c| (t, c)));
        match recomputed {
            Ok((trace_census, charpoly_census)) => {
                let got = (
                    trace_census.distinct_values() as u64,
                    charpoly_census.distinct_values() as u64,
                );
                let claimed = (trace_distinct, report.modp_charpoly_distinct.unwrap_or(0));
                checks.push(if got == claimed {
                    pass("modp_census_counts")
                } else {
                    fail(
                        "modp_census_counts",
                        format!("recomputed {got:?}, report says {claimed:?}"),
                    )
                });
                checks.push(compare_file(
                    dir,
                    &persist::census_path(dir, "trace", p, &digest),
                    "modp_census_trace_csv",
                    &trace_census.to_csv(),
                ));
                checks.push(compare_file(
                    dir,
                    &persist::census_path(dir, "charpoly", p, &digest),
                    "modp_census_charpoly_csv",
                    &charpoly_census.to_csv(),
                ));
            }
            Err(e) => checks.push(fail("modp_census_counts", e.to_string())),
        }
    }

    // Stage 6: the exact ball toward n* and its trace bound.
    if let Some(summary) = &report.integer_traces {
        checks.push(verify_integer_traces(dir, &report, summary, &gens, &digest, p));
    }

    Ok(VerifyReport::finish(dir, digest, checks))
}

fn verify_integer_traces(
    dir: &Path,
    report: &PipelineReport,
    summary: &crate::pipeline::IntegerTraceSummary,
    gens: &growthlab_core::GeneratorSet,
    digest: &str,
    p: u64,
) -> CheckResult {
    let name = "integer_traces";
    if report.n_star() != Some(summary.requested_radius) {
        return fail(
            name,
            format!(
                "summary requests radius {}, surjectivity radius is {:?}",
                summary.requested_radius,
                report.n_star()
            ),
        );
    }
    let ball = match enumerate_ball(gens, summary.requested_radius, report.manifest.budget) {
        Ok(ball) => ball,
        Err(e) => return fail(name, format!("re-enumeration failed: {e}")),
    };
    let m = ball.last_radius();
    if m != summary.enumerated_radius || ball.is_complete() != summary.exact_at_nstar {
        return fail(
            name,
            format!(
                "re-enumeration reaches radius {m} (complete: {}), summary says {} (exact: {})",
                ball.is_complete(),
                summary.enumerated_radius,
                summary.exact_at_nstar
            ),
        );
    }

    let element_series = count_series(&ball, CountKind::Element);
    let trace_series = count_series(&ball, CountKind::Trace);
    for (kind, series) in [("element", &element_series), ("trace", &trace_series)] {
        let check =
            compare_file(dir, &persist::series_path(dir, kind, digest), name, &series.to_csv());
        if !check.passed {
            return check;
        }
    }

    let values: Vec<Rational> = {
        let set: BTreeSet<Rational> = ball.ball_matrices(m).map(|matrix| matrix.trace()).collect();
        set.into_iter().collect()
    };
    let traces_check = compare_file(
        dir,
        &persist::traces_path(dir, m, digest),
        name,
        &persist::traces_csv(&values),
    );
    if !traces_check.passed {
        return traces_check;
    }

    let distinct = values.len() as u64;
    if distinct != summary.distinct_at_enumerated_radius {
        return fail(
            name,
            format!(
                "recomputed {distinct} distinct traces at radius {m}, summary says {}",
                summary.distinct_at_enumerated_radius
            ),
        );
    }
    let surjective = report.surjectivity.as_ref().map(|s| s.surjective) == Some(true);
    let residue_cover = surjective && report.modp_trace_distinct == Some(p);
    let lower_bound = if residue_cover { distinct.max(p) } else { distinct };
    if residue_cover != summary.residue_cover || lower_bound != summary.lower_bound_at_nstar {
        return fail(
            name,
            format!(
                "residue cover {residue_cover} / lower bound {lower_bound} disagree with summary ({}, {})",
                summary.residue_cover, summary.lower_bound_at_nstar
            ),
        );
    }
    if report.verdicts.integer_traces_geq_p != Some(lower_bound >= p) {
        return fail(
            name,
            format!(
                "verdict integer_traces_geq_p = {:?} does not match lower bound {lower_bound} vs p = {p}",
                report.verdicts.integer_traces_geq_p
            ),
        );
    }
    pass(name)
}
