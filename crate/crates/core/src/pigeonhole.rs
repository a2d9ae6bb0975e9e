//! Pigeonhole search for a prime that reduces a word ball injectively.
//!
//! For distinct ball elements `g, h`, the reduction mod p collapses them
//! exactly when p divides every entry numerator of `gh⁻¹ − I`. Those
//! entrywise gcds are small compared to any healthy prime window, so after
//! factoring each gcd the bad primes are few and an injective prime exists by
//! counting. [`find_injective_prime`] returns the smallest clean admissible
//! prime together with a certificate that can be replayed from the persisted
//! ball alone.
//!
//! [`kappa`] is the single-element version of the same bookkeeping: how many
//! primes above a threshold divide every entry of `γ − I`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_integer::Integer as _;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cayley::BallLevels;
use crate::codec::decode_key;
use crate::primes::{distinct_prime_factors, PrimeWindow};
use crate::RationalMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum PigeonholeError {
    #[error("threshold must be at least 2, got {got}")]
    ThresholdTooSmall { got: u64 },
    #[error("the sup-norm kappa bound needs integer entries; one has a nontrivial denominator")]
    NonIntegralEntry,
    #[error("kappa of the identity would count every prime")]
    KappaOfIdentity,
    #[error("entrywise gcd has an unfactored cofactor {cofactor}; counting would be unsound")]
    FactorizationIncomplete { cofactor: String },
    #[error("ball has radius {available}, requested level {requested}")]
    RadiusOutOfRange { requested: usize, available: usize },
    #[error("prime window is empty")]
    EmptyWindow,
    #[error("every window prime divides the declared denominator base")]
    NoAdmissiblePrimes,
    #[error("sample cap must be at least 2, got {got}")]
    SampleCapTooSmall { got: usize },
    #[error("two examined elements are equal; ball levels must be deduplicated")]
    DuplicateElements,
    #[error("no clean prime in [{window_lo}, {window_hi}]: {} primes are bad", bad.len())]
    NoCleanPrime { window_lo: u64, window_hi: u64, bad: Vec<(u64, String)> },
    #[error("certificate replay failed: {reason}")]
    ReplayMismatch { reason: String },
}

/// Number of distinct primes `p ≥ threshold` with `γ ≡ I (mod p)`, i.e.
/// dividing every entry numerator of `γ − I` in lowest terms.
///
/// Entries may be rational: a prime dividing every numerator of the reduced
/// differences cannot also divide a denominator, so the numerator gcd counts
/// exactly the reduction-to-identity primes and denominator primes (the
/// excluded places of the generator set) are never miscounted.
pub fn kappa(gamma: &RationalMatrix, threshold: u64) -> Result<u64, PigeonholeError> {
    if threshold < 2 {
        return Err(PigeonholeError::ThresholdTooSmall { got: threshold });
    }
    if gamma.is_identity() {
        return Err(PigeonholeError::KappaOfIdentity);
    }
    let diff = gamma.sub(&RationalMatrix::identity(gamma.dim())).expect("same dimension");
    let g = numerator_gcd(&diff);
    let factors = distinct_prime_factors(&g);
    if let Some(cofactor) = factors.unresolved {
        return Err(PigeonholeError::FactorizationIncomplete { cofactor: cofactor.to_string() });
    }
    let threshold = BigUint::from(threshold);
    Ok(factors.primes.iter().filter(|p| **p >= threshold).count() as u64)
}

/// Largest `e` with `threshold^e ≤ sup_norm(γ − I)`: an a-priori bound on
/// [`kappa`], since the product of the counted primes divides some nonzero
/// entry of `γ − I`. Only meaningful for integer entries (a rational entry
/// can hide an arbitrarily large numerator behind a small value), so
/// non-integral input is an error here even though [`kappa`] accepts it.
pub fn kappa_upper_bound(gamma: &RationalMatrix, threshold: u64) -> Result<u64, PigeonholeError> {
    if threshold < 2 {
        return Err(PigeonholeError::ThresholdTooSmall { got: threshold });
    }
    if gamma.is_identity() {
        return Err(PigeonholeError::KappaOfIdentity);
    }
    for entry in gamma.entries() {
        if !entry.denom().is_one() {
            return Err(PigeonholeError::NonIntegralEntry);
        }
    }
    let diff = gamma.sub(&RationalMatrix::identity(gamma.dim())).expect("same dimension");
    let sup = diff.sup_norm();
    let sup = sup.numer().magnitude().clone();
    let t = BigUint::from(threshold);
    let mut power = t.clone();
    let mut e = 0u64;
    while power <= sup {
        e += 1;
        power *= &t;
    }
    Ok(e)
}

/// Gcd of the entry numerators; zero entries contribute nothing.
fn numerator_gcd(m: &RationalMatrix) -> BigUint {
    let mut acc = BigUint::zero();
    for entry in m.entries() {
        acc = acc.gcd(entry.numer().magnitude());
    }
    acc
}

/// Entrywise-gcd values of `g h⁻¹ − I` over all unordered pairs of distinct
/// matrices. A prime collapses some pair under reduction exactly when it
/// divides one of these values (given it leaves denominators invertible).
pub fn pair_divisor_gcds(mats: &[RationalMatrix]) -> Result<BTreeSet<BigUint>, PigeonholeError> {
    let inverses: Vec<RationalMatrix> =
        mats.iter().map(|m| m.inverse().expect("ball elements are invertible")).collect();
    let sets: Result<Vec<BTreeSet<BigUint>>, PigeonholeError> = (0..mats.len())
        .into_par_iter()
        .map(|i| {
            let mut local = BTreeSet::new();
            let identity = RationalMatrix::identity(mats[i].dim());
            for inverse in &inverses[i + 1..] {
                let gamma = mats[i].mul(inverse).expect("same dimension");
                let diff = gamma.sub(&identity).expect("same dimension");
                let g = numerator_gcd(&diff);
                if g.is_zero() {
                    return Err(PigeonholeError::DuplicateElements);
                }
                local.insert(g);
            }
            Ok(local)
        })
        .collect();
    let mut out = BTreeSet::new();
    for s in sets? {
        out.extend(s);
    }
    Ok(out)
}

/// A window prime excluded by some examined pair, with the gcd that did it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadPrime {
    pub prime: u64,
    pub witness_gcd: String,
}

/// Replayable record of an injective-prime search: which level was examined,
/// how the subset was sampled, and which window primes were excluded by which
/// pair gcd. The chosen prime divides none of the recorded gcds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InjectivePrimeCertificate {
    pub schema: u32,
    pub prime: u64,
    pub radius: usize,
    pub dim: usize,
    pub gens_digest: String,
    pub window_lo: u64,
    pub window_hi: u64,
    /// Total primes in the window, before any exclusion.
    pub window_prime_count: u64,
    /// Window primes dividing the declared denominator base; excluded up
    /// front because reduction is undefined there.
    pub denominator_primes_excluded: Vec<u64>,
    pub subset_size: usize,
    pub sampled: bool,
    pub sample_cap: usize,
    pub seed: u64,
    pub checked_pairs: u64,
    pub bad_primes_seen: Vec<BadPrime>,
}

impl InjectivePrimeCertificate {
    /// Fraction of window primes that are clean for the examined pairs.
    pub fn good_prime_fraction(&self) -> f64 {
        if self.window_prime_count == 0 {
            return 0.0;
        }
        let excluded = self.bad_primes_seen.len() + self.denominator_primes_excluded.len();
        (self.window_prime_count as f64 - excluded as f64) / self.window_prime_count as f64
    }
}

/// Finds the smallest admissible window prime dividing no pair gcd of the
/// examined subset of `B(k)`.
///
/// The subset is all of `B(k)` when it fits in `sample_cap`, otherwise a
/// seed-deterministic sample of `sample_cap` elements. Primes dividing the
/// ball's denominator base are excluded up front; all remaining window primes
/// are classified (not just those before the first clean one), so the
/// certificate also yields the good-prime fraction of the whole window.
pub fn find_injective_prime(
    ball: &BallLevels,
    k: usize,
    window: &PrimeWindow,
    sample_cap: usize,
    seed: u64,
) -> Result<InjectivePrimeCertificate, PigeonholeError> {
    if k > ball.last_radius() {
        return Err(PigeonholeError::RadiusOutOfRange {
            requested: k,
            available: ball.last_radius(),
        });
    }
    if window.is_empty() {
        return Err(PigeonholeError::EmptyWindow);
    }
    if sample_cap < 2 {
        return Err(PigeonholeError::SampleCapTooSmall { got: sample_cap });
    }

    let denom = ball.denom();
    let denominator_primes_excluded: Vec<u64> =
        window.primes.iter().copied().filter(|&p| denom.is_multiple_of(p)).collect();
    let admissible: Vec<u64> =
        window.primes.iter().copied().filter(|&p| !denom.is_multiple_of(p)).collect();
    if admissible.is_empty() {
        return Err(PigeonholeError::NoAdmissiblePrimes);
    }

    let (mats, sampled) = examined_subset(ball, k, sample_cap, seed);
    let gcds = pair_divisor_gcds(&mats)?;
    let bad = bad_primes_in_window(&gcds, &admissible);

    let chosen = admissible.iter().copied().find(|p| !bad.contains_key(p));
    let bad_primes_seen: Vec<BadPrime> = bad
        .iter()
        .map(|(&prime, witness)| BadPrime { prime, witness_gcd: witness.to_string() })
        .collect();
    let Some(prime) = chosen else {
        return Err(PigeonholeError::NoCleanPrime {
            window_lo: window.lo,
            window_hi: window.hi,
            bad: bad_primes_seen.into_iter().map(|b| (b.prime, b.witness_gcd)).collect(),
        });
    };

    let n = mats.len() as u64;
    Ok(InjectivePrimeCertificate {
        schema: 1,
        prime,
        radius: k,
        dim: ball.dim(),
        gens_digest: ball.gens_digest().to_string(),
        window_lo: window.lo,
        window_hi: window.hi,
        window_prime_count: window.len() as u64,
        denominator_primes_excluded,
        subset_size: mats.len(),
        sampled,
        sample_cap,
        seed,
        checked_pairs: n * (n - 1) / 2,
        bad_primes_seen,
    })
}

/// Re-derives the examined subset and pair gcds from the ball and checks
/// every claim the certificate makes; errors describe the first mismatch.
pub fn verify_certificate(
    ball: &BallLevels,
    cert: &InjectivePrimeCertificate,
) -> Result<(), PigeonholeError> {
    let fail = |reason: String| Err(PigeonholeError::ReplayMismatch { reason });
    if cert.radius > ball.last_radius() {
        return fail(format!(
            "certificate radius {} exceeds ball radius {}",
            cert.radius,
            ball.last_radius()
        ));
    }
    if cert.gens_digest != ball.gens_digest() {
        return fail("generator digest differs from the ball's".into());
    }
    let (mats, sampled) = examined_subset(ball, cert.radius, cert.sample_cap, cert.seed);
    if mats.len() != cert.subset_size || sampled != cert.sampled {
        return fail(format!(
            "examined subset has {} elements (sampled: {}), certificate says {} (sampled: {})",
            mats.len(),
            sampled,
            cert.subset_size,
            cert.sampled
        ));
    }
    let gcds = pair_divisor_gcds(&mats)?;
    let prime = BigUint::from(cert.prime);
    if gcds.iter().any(|g| (g % &prime).is_zero()) {
        return fail(format!("prime {} divides an examined pair gcd", cert.prime));
    }
    for bad in &cert.bad_primes_seen {
        let witness: BigUint =
            bad.witness_gcd.parse().map_err(|_| PigeonholeError::ReplayMismatch {
                reason: format!("unparseable witness gcd {:?}", bad.witness_gcd),
            })?;
        if !gcds.contains(&witness) {
            return fail(format!(
                "witness gcd {} for prime {} is not a pair gcd",
                witness, bad.prime
            ));
        }
        if !(&witness % BigUint::from(bad.prime)).is_zero() {
            return fail(format!(
                "prime {} does not divide its witness gcd {}",
                bad.prime, witness
            ));
        }
    }
    Ok(())
}

/// The examined subset of `B(k)`: everything if it fits the cap, otherwise a
/// seed-deterministic sample. Returns the matrices and whether sampling
/// happened.
fn examined_subset(
    ball: &BallLevels,
    k: usize,
    sample_cap: usize,
    seed: u64,
) -> (Vec<RationalMatrix>, bool) {
    let keys: Vec<_> = ball.ball_keys(k).collect();
    if keys.len() <= sample_cap {
        let mats = keys
            .iter()
            .map(|key| decode_key(key).expect("ball keys decode by construction"))
            .collect();
        return (mats, false);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices = rand::seq::index::sample(&mut rng, keys.len(), sample_cap).into_vec();
    indices.sort_unstable();
    let mats = indices
        .into_iter()
        .map(|i| decode_key(keys[i]).expect("ball keys decode by construction"))
        .collect();
    (mats, true)
}

/// Classifies the admissible primes against the pair gcds: a prime is bad
/// when it divides some gcd. Factoring each gcd is cheaper than scanning the
/// window when gcds are small; unresolved cofactors fall back to a direct
/// divisibility scan so the classification stays exact.
fn bad_primes_in_window(gcds: &BTreeSet<BigUint>, admissible: &[u64]) -> BTreeMap<u64, BigUint> {
    let mut bad: BTreeMap<u64, BigUint> = BTreeMap::new();
    let lo = *admissible.first().expect("admissible set checked nonempty");
    let hi = *admissible.last().expect("admissible set checked nonempty");
    for g in gcds {
        if g.is_one() {
            continue;
        }
        let factors = distinct_prime_factors(g);
        for q in &factors.primes {
            if let Some(p) = q.to_u64() {
                if p >= lo && p <= hi && admissible.binary_search(&p).is_ok() {
                    bad.entry(p).or_insert_with(|| g.clone());
                }
            }
        }
        if let Some(cofactor) = factors.unresolved {
            for &p in admissible {
                if !bad.contains_key(&p) && (&cofactor % BigUint::from(p)).is_zero() {
                    bad.insert(p, g.clone());
                }
            }
        }
    }
    bad
}
