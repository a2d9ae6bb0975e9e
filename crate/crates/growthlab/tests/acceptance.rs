//! Acceptance checks for the whole toolkit, one test per claim. Each test
//! prints a single summary line (visible with `--nocapture`) and enforces
//! its stated wall-clock bound, always against independently derived
//! expectations: the characteristic polynomial is checked against a
//! cofactor-expansion oracle written here, group orders against the closed
//! formula, the kappa bound against a from-scratch floor computation, and
//! the pipeline against its own persisted, replayable artifacts.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use growthlab::{run_pipeline, ExperimentManifest, PipelineReport};
use growthlab_core::modp::reduce_ball;
use growthlab_core::{
    charpoly, enumerate_ball, estimate_rate, find_injective_prime, is_injective_mod_p, kappa,
    prime_count, primes_in, surjectivity_closure, triple_product_size, value_census,
    verify_certificate, CensusKind, FiniteMatrix, FiniteSet, GeneratorSet, GrowthClass, Integer,
    Rational, RationalMatrix,
};

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn sl2_gens() -> GeneratorSet {
    growthlab::load_genset(fixture("sl2_st.json")).expect("sl2 fixture loads")
}

fn check_time(name: &str, elapsed: Duration, bound: Duration) {
    assert!(
        elapsed <= bound,
        "{name} took {:.1}s, over its {:.0}s bound",
        elapsed.as_secs_f64(),
        bound.as_secs_f64()
    );
}

// --- c01: exact characteristic polynomials ---------------------------------

/// Ascending-coefficient polynomial arithmetic over the rationals, written
/// independently of the library's descending representation.
type Poly = Vec<Rational>;

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![Rational::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] += y;
    }
    out
}

fn poly_neg(a: &Poly) -> Poly {
    a.iter().map(|x| -x).collect()
}

/// Determinant of a polynomial matrix by first-row cofactor expansion.
fn det_cofactor(m: &[Vec<Poly>]) -> Poly {
    let d = m.len();
    if d == 1 {
        return m[0][0].clone();
    }
    let mut acc: Poly = vec![Rational::zero()];
    for col in 0..d {
        let minor: Vec<Vec<Poly>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != col)
                    .map(|(_, poly)| poly.clone())
                    .collect()
            })
            .collect();
        let mut term = poly_mul(&m[0][col], &det_cofactor(&minor));
        if col % 2 == 1 {
            term = poly_neg(&term);
        }
        acc = poly_add(&acc, &term);
    }
    acc
}

/// char poly of `a` as det(XI - A) over Q[X], ascending coefficients.
fn oracle_charpoly(a: &RationalMatrix) -> Poly {
    let d = a.dim();
    let entries: Vec<Vec<Poly>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let x_coeff = if i == j { Rational::one() } else { Rational::zero() };
                    vec![-a.entry(i, j).clone(), x_coeff]
                })
                .collect()
        })
        .collect();
    det_cofactor(&entries)
}

#[test]
fn c01_charpoly_agrees_with_the_cofactor_oracle() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_260_822);
    let mut checked = 0u32;
    for trial in 0..1000 {
        let d = [2, 3, 4][trial % 3];
        let entries: Vec<Rational> = (0..d * d)
            .map(|_| Rational::from_integer(Integer::from(rng.gen_range(-9i64..=9))))
            .collect();
        let matrix = RationalMatrix::new(d, entries).expect("square entry count");

        let got = charpoly(&matrix);
        let mut expected = oracle_charpoly(&matrix);
        expected.reverse();
        assert_eq!(
            got.coeffs(),
            &expected[..],
            "charpoly mismatch on trial {trial} (dim {d}): {matrix:?}"
        );
        checked += 1;
    }
    let elapsed = started.elapsed();
    check_time("c01", elapsed, Duration::from_secs(10));
    println!(
        "PASS c01 exact charpoly: {checked} random matrices (dims 2-4, entries -9..=9) match the \
         cofactor oracle exactly ({:.2}s)",
        elapsed.as_secs_f64()
    );
}

// --- c02/c03/c04: finite group orders, traces, level sets -------------------

const SMALL_PRIMES: [u64; 5] = [3, 5, 7, 11, 13];

fn sl2_group(p: u64) -> FiniteSet {
    let (outcome, group) =
        surjectivity_closure(&sl2_gens(), p, 10_000_000).expect("closure fits the cap");
    assert!(outcome.surjective, "closure mod {p} should be all of SL2");
    group
}

#[test]
fn c02_closure_orders_match_the_closed_formula() {
    let started = Instant::now();
    for p in SMALL_PRIMES {
        let group = sl2_group(p);
        let expected = p * (p * p - 1);
        assert_eq!(
            group.len() as u64,
            expected,
            "closure mod {p} has order {}, formula gives {expected}",
            group.len()
        );
    }
    let elapsed = started.elapsed();
    check_time("c02", elapsed, Duration::from_secs(30));
    println!(
        "PASS c02 finite group orders: closure({{S,T}} mod p) = p(p^2-1) for p in {SMALL_PRIMES:?} \
         ({:.2}s)",
        elapsed.as_secs_f64()
    );
}

#[test]
fn c03_every_residue_is_a_trace() {
    for p in SMALL_PRIMES {
        let census = value_census(&sl2_group(p), CensusKind::Trace).expect("census of a group");
        assert_eq!(
            census.distinct_values() as u64,
            p,
            "trace census mod {p} should attain every residue"
        );
        let seen: BTreeSet<u64> = census.counts.keys().map(|value| value[0]).collect();
        assert_eq!(seen, (0..p).collect::<BTreeSet<u64>>());
    }
    println!(
        "PASS c03 trace surjectivity: exactly p distinct traces mod p for p in {SMALL_PRIMES:?}"
    );
}

#[test]
fn c04_trace_level_sets_are_small_against_the_group() {
    for p in SMALL_PRIMES {
        let group = sl2_group(p);
        let census = value_census(&group, CensusKind::Trace).expect("census of a group");
        let max_level = census.counts.values().copied().max().unwrap();
        assert!(
            max_level <= 2 * p * p,
            "largest trace level set mod {p} is {max_level} > 2p^2 = {}",
            2 * p * p
        );
        assert!(
            2 * group.len() as u64 >= p * p * p,
            "group order {} is below p^3/2 for p = {p}",
            group.len()
        );
        let total: u64 = census.counts.values().sum();
        assert_eq!(total, group.len() as u64, "level sets must partition the group");
    }
    println!(
        "PASS c04 level sets: max trace fiber <= 2p^2 and group order >= p^3/2 for p in \
         {SMALL_PRIMES:?} (exact arithmetic)"
    );
}

// --- c05: the kappa bound, exhaustively on a ball ---------------------------

/// Largest e >= 0 with threshold^e <= max |entry| of gamma - I, computed
/// from scratch with exact integers.
fn floor_log_sup_norm(gamma: &RationalMatrix, threshold: u64) -> u64 {
    let identity = RationalMatrix::identity(gamma.dim());
    let diff = gamma.sub(&identity).expect("same dimensions");
    let sup: Rational = diff.entries().iter().map(|e| e.abs()).max().expect("nonempty");
    assert!(sup.denom().is_one(), "integer fixture entries stay integer");
    let sup = sup.numer().clone();
    let threshold = Integer::from(threshold);
    let mut exponent = 0u64;
    let mut power = threshold.clone();
    while power <= sup {
        exponent += 1;
        power *= &threshold;
    }
    exponent
}

#[test]
fn c05_kappa_respects_the_sup_norm_bound_on_b6() {
    let started = Instant::now();
    let ball = enumerate_ball(&sl2_gens(), 6, 1_000_000).expect("tiny ball");
    assert!(ball.is_complete());
    let mut checked = 0u64;
    for gamma in ball.ball_matrices(6) {
        if gamma.is_identity() {
            continue;
        }
        for threshold in [10, 100] {
            let counted = kappa(&gamma, threshold).expect("small entries factor");
            let bound = floor_log_sup_norm(&gamma, threshold);
            assert!(
                counted <= bound,
                "kappa(gamma, {threshold}) = {counted} exceeds floor bound {bound} for {gamma:?}"
            );
        }
        checked += 1;
    }
    assert_eq!(checked, 204 - 1, "B(6) of the fixture has 204 elements including I");
    let elapsed = started.elapsed();
    check_time("c05", elapsed, Duration::from_secs(60));
    println!(
        "PASS c05 kappa bound: kappa <= floor(log sup|gamma - I| / log T) for all {checked} \
         non-identity elements of B(6), T in {{10, 100}} ({:.2}s)",
        elapsed.as_secs_f64()
    );
}

// --- c06: pigeonholing injective primes --------------------------------------

#[test]
fn c06_injective_primes_are_found_and_replayable() {
    let started = Instant::now();
    let gens = sl2_gens();

    let ball1 = enumerate_ball(&gens, 1, 1000).expect("five elements");
    let window = primes_in(5, 50).expect("small window");
    let cert = find_injective_prime(&ball1, 1, &window, 2000, 0).expect("a clean prime exists");
    assert_eq!(cert.prime, 5, "the smallest clean prime for B(1) in [5, 50] is 5");
    verify_certificate(&ball1, &cert).expect("certificate replays cleanly");

    let ball5 = enumerate_ball(&gens, 5, 1_000_000).expect("B(5) is 496 elements");
    let window = primes_in(100, 1000).expect("window sieves");
    let cert5 = find_injective_prime(&ball5, 5, &window, 2000, 0).expect("some prime is clean");
    assert!((100..=1000).contains(&cert5.prime));
    assert!(
        is_injective_mod_p(&ball5, 5, cert5.prime).expect("admissible prime"),
        "reduction mod {} must be injective on B(5)",
        cert5.prime
    );

    let elapsed = started.elapsed();
    check_time("c06", elapsed, Duration::from_secs(120));
    println!(
        "PASS c06 pigeonhole: B(1) window [5,50] gives p = 5 with a replaying certificate; B(5) \
         window [100,1000] gives p = {} confirmed injective ({:.2}s)",
        cert5.prime,
        elapsed.as_secs_f64()
    );
}

// --- c07/c11: the end-to-end pipeline and its determinism --------------------

struct BigRun {
    _dir: tempfile::TempDir,
    out: PathBuf,
    report: PipelineReport,
    elapsed: Duration,
}

fn big_manifest() -> ExperimentManifest {
    let mut manifest = ExperimentManifest::new(fixture("sl2_st.json"), 100, 1000);
    manifest.radius_k = 5;
    manifest.budget = 500_000;
    manifest.seed = 0;
    manifest
}

fn big_run() -> &'static BigRun {
    static RUN: OnceLock<BigRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let dir = tempfile::tempdir().expect("tempdir");
        let out = dir.path().join("run");
        let started = Instant::now();
        let report = run_pipeline(&big_manifest(), &out).expect("pipeline runs");
        BigRun { _dir: dir, out, report, elapsed: started.elapsed() }
    })
}

#[test]
fn c07_pipeline_proves_the_trace_bound_end_to_end() {
    let run = big_run();
    let report = &run.report;
    assert_eq!(report.status, "ok", "abort reason: {:?}", report.failure_reason);
    let p = report.prime.expect("stage 2 found a prime");
    assert_eq!(report.verdicts.injective_at_k, Some(true));

    let surjectivity = report.surjectivity.as_ref().expect("stage 4 ran");
    assert!(surjectivity.surjective, "mod-{p} closure must be all of SL2");
    let n_star = report.n_star().expect("n* found");
    assert!(n_star > 0);

    assert_eq!(report.modp_trace_distinct, Some(p), "every residue is a trace");

    let traces = report.integer_traces.as_ref().expect("stage 6 ran");
    assert_eq!(traces.requested_radius, n_star);
    assert!(
        traces.lower_bound_at_nstar >= p,
        "distinct integer traces in B({n_star}) must be at least p = {p}"
    );
    assert!(traces.residue_cover, "surjectivity + full census covers every residue class");
    assert!(report.verdicts.all);

    check_time("c07", run.elapsed, Duration::from_secs(600));
    println!(
        "PASS c07 pipeline: k = 5, window [100,1000] -> p = {p}, n* = {n_star}, {} distinct \
         integer traces enumerated at radius {} (exact at n*: {}), bound at n* >= {p} ({:.1}s)",
        traces.distinct_at_enumerated_radius,
        traces.enumerated_radius,
        traces.exact_at_nstar,
        run.elapsed.as_secs_f64()
    );
}

#[test]
fn c11_pipeline_reports_are_deterministic() {
    let first = big_run();
    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("run");
    let second = run_pipeline(&big_manifest(), &out).expect("second run");

    let read = |out: &std::path::Path, digest: &str| {
        std::fs::read_to_string(out.join(format!("report_{digest}.json"))).expect("report exists")
    };
    let text_a = read(&first.out, &first.report.gens_digest);
    let text_b = read(&out, &second.gens_digest);

    // timings_ms is the final key; everything before it must be identical
    // bytes.
    let cut_a = text_a.find("\"timings_ms\"").expect("timings key present");
    let cut_b = text_b.find("\"timings_ms\"").expect("timings key present");
    assert_eq!(&text_a[..cut_a], &text_b[..cut_b], "reports differ before the timing section");

    // And as parsed documents the two reports agree except for timings.
    let strip = |text: &str| {
        let mut value: serde_json::Value = serde_json::from_str(text).expect("valid JSON");
        value.as_object_mut().expect("object").remove("timings_ms");
        value
    };
    assert_eq!(strip(&text_a), strip(&text_b));
    println!(
        "PASS c11 determinism: two pipeline runs from one manifest agree byte-for-byte up to the \
         trailing timings_ms section"
    );
}

// --- c08: the growth trichotomy ----------------------------------------------

#[test]
fn c08_trichotomy_rows_classify_as_expected() {
    // Shear alone: the charpoly series is exactly the constant 1.
    let row = growthlab::trichotomy_report(&fixture("unipotent_t.json"), 12, 100_000)
        .expect("shear enumerates");
    assert!(!row.partial);
    assert!(matches!(row.charpoly_class, GrowthClass::Bounded), "got {:?}", row.charpoly_class);
    assert!(
        row.charpoly_series.counts.iter().all(|&count| count == 1),
        "every shear power has charpoly (X-1)^2"
    );
    assert_eq!(row.label, "v. nilpotent-like");

    // Solvable pair: charpoly counts stay within 2n+2 and classify polynomial.
    let row = growthlab::trichotomy_report(&fixture("solvable_2.json"), 14, 700_000)
        .expect("solvable ball to 14 fits the budget");
    assert!(!row.partial, "B(14) needs about 656k of the 700k budget");
    for (offset, &count) in row.charpoly_series.counts.iter().enumerate() {
        let n = (row.charpoly_series.first_radius + offset) as u64;
        assert!(count <= 2 * n + 2, "charpoly count {count} at radius {n} exceeds 2n+2");
    }
    assert!(
        matches!(row.charpoly_class, GrowthClass::Polynomial { .. }),
        "got {:?}",
        row.charpoly_class
    );
    assert_eq!(row.label, "v. solvable-like");

    // Free-ish pair: charpoly growth is exponential with a visible rate.
    let row =
        growthlab::trichotomy_report(&fixture("sl2_st.json"), 12, 100_000).expect("sl2 ball to 12");
    assert!(!row.partial);
    assert!(
        matches!(row.charpoly_class, GrowthClass::Exponential { .. }),
        "got {:?}",
        row.charpoly_class
    );
    let rate = estimate_rate(&row.charpoly_series, (6, 12)).expect("window inside series");
    assert!(rate.slope > 0.1, "fitted charpoly rate {} should exceed 0.1", rate.slope);
    assert_eq!(row.label, "not v. solvable-like");

    println!(
        "PASS c08 trichotomy: shear charpoly constant 1; solvable counts <= 2n+2 to n = 14 and \
         polynomial; sl2 exponential with rate {:.3} > 0.1 on [6,12]",
        rate.slope
    );
}

// --- c09: the product-theorem dichotomy --------------------------------------

#[test]
fn c09_tripling_separates_progressions_from_ball_images() {
    let started = Instant::now();

    // A progression inside a one-parameter subgroup barely triples.
    let p = 101;
    let shear = FiniteMatrix::new(p, 2, vec![1, 1, 0, 1]).expect("valid matrix");
    let inverse = shear.inverse().expect("unipotent is invertible");
    let mut progression = FiniteSet::new(p, 2).expect("valid modulus");
    let mut forward = FiniteMatrix::identity(p, 2).expect("valid modulus");
    let mut backward = forward.clone();
    progression.insert(forward.clone()).expect("insert identity");
    for _ in 1..=10 {
        forward = forward.mul(&shear);
        backward = backward.mul(&inverse);
        progression.insert(forward.clone()).expect("insert power");
        progression.insert(backward.clone()).expect("insert inverse power");
    }
    assert_eq!(progression.len(), 21);
    let triple = triple_product_size(&progression, 1_000_000).expect("tiny expansion");
    assert!(triple.complete);
    assert_eq!(triple.size, 61, "shear powers -30..=30 are distinct mod 101");
    assert!(triple.size <= 3 * progression.len() as u64);

    // A ball image is expanding: |AAA| >= |A|^1.1.
    let ball = enumerate_ball(&sl2_gens(), 2, 1000).expect("B(2) is 16 elements");
    let image = reduce_ball(&ball, 2, p).expect("101 is admissible");
    let ball_triple = triple_product_size(&image, 1_000_000).expect("small expansion");
    assert!(ball_triple.complete);
    let needed = (image.len() as f64).powf(1.1);
    assert!(
        ball_triple.size as f64 >= needed,
        "|AAA| = {} but |A|^1.1 = {needed:.1}",
        ball_triple.size
    );

    let elapsed = started.elapsed();
    check_time("c09", elapsed, Duration::from_secs(60));
    println!(
        "PASS c09 product dichotomy: progression |AAA| = 61 <= 3|A| = 63; ball image |A| = {} has \
         |AAA| = {} >= |A|^1.1 = {needed:.1} ({:.2}s)",
        image.len(),
        ball_triple.size,
        elapsed.as_secs_f64()
    );
}

// --- c10: prime counting ------------------------------------------------------

#[test]
fn c10_prime_counts_and_chebyshev_ratios() {
    let started = Instant::now();
    let million = prime_count(1_000_000).expect("sieve to a million");
    assert_eq!(million.count, 78_498);
    for (x, expected) in [(10_000u64, 1_229u64), (100_000, 9_592), (1_000_000, 78_498)] {
        let counted = prime_count(x).expect("sieve").count;
        assert_eq!(counted, expected, "pi({x})");
        let ratio = counted as f64 * (x as f64).ln() / x as f64;
        assert!(
            (0.9..=1.3).contains(&ratio),
            "pi({x}) ln x / x = {ratio:.4} is outside [0.9, 1.3]"
        );
    }
    let elapsed = started.elapsed();
    check_time("c10", elapsed, Duration::from_secs(30));
    println!(
        "PASS c10 prime counting: pi(10^6) = 78498 exactly; Chebyshev ratios within [0.9, 1.3] \
         for x = 10^4, 10^5, 10^6 ({:.2}s)",
        elapsed.as_secs_f64()
    );
}
