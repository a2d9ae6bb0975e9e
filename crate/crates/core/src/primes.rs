//! Segmented sieving, exact prime counting, and integer factoring support.
//!
//! Windows are sieved block by block with base primes up to `√hi`, so memory
//! stays bounded by the segment length regardless of where the window sits.
//! Primality beyond the trial-division bound uses the deterministic
//! Miller–Rabin witness set for 64-bit integers; nothing here is
//! probabilistic.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use once_cell::sync::Lazy;
use thiserror::Error;

/// Upper bound accepted for any sieving endpoint.
pub const MAX_SIEVE_BOUND: u64 = 1 << 40;
/// Largest window span `hi - lo` a single call will materialize.
pub const MAX_WINDOW_SPAN: u64 = 1 << 31;
/// Trial division bound used by the factoring helper.
pub const TRIAL_DIVISION_BOUND: u64 = 1 << 20;

const SEGMENT_LEN: u64 = 1 << 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SieveError {
    #[error("invalid range [{lo}, {hi}]: need 2 <= lo <= hi")]
    InvalidRange { lo: u64, hi: u64 },
    #[error("bound {value} exceeds the supported maximum {MAX_SIEVE_BOUND}")]
    BeyondBound { value: u64 },
    #[error("window span {span} exceeds the configured maximum {MAX_WINDOW_SPAN}")]
    SpanTooLarge { span: u64 },
}

/// All primes in an inclusive window, ascending and complete.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeWindow {
    pub lo: u64,
    pub hi: u64,
    pub primes: Vec<u64>,
}

impl PrimeWindow {
    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn contains(&self, p: u64) -> bool {
        self.primes.binary_search(&p).is_ok()
    }
}

/// Exact `π(x)` together with the Chebyshev ratio `π(x)·ln(x)/x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrimeCount {
    pub count: u64,
    pub chebyshev_ratio: f64,
}

/// Primes to `TRIAL_DIVISION_BOUND`, shared by sieving and factoring. The
/// bound is exactly `√MAX_SIEVE_BOUND`, so these also serve as base primes
/// for every admissible segment.
static TRIAL_PRIMES: Lazy<Vec<u64>> = Lazy::new(|| simple_sieve(TRIAL_DIVISION_BOUND));

pub(crate) fn trial_primes() -> &'static [u64] {
    &TRIAL_PRIMES
}

/// Plain sieve of Eratosthenes up to `limit` inclusive.
fn simple_sieve(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            primes.push(p as u64);
            let mut m = p * p;
            while m <= n {
                composite[m] = true;
                m += p;
            }
        }
    }
    primes
}

/// Streams every prime in `[lo, hi]` (callers validate the range).
fn for_each_prime_in(lo: u64, hi: u64, mut f: impl FnMut(u64)) {
    let sqrt = hi.isqrt();
    let base: &[u64] = trial_primes();
    let base_end = base.partition_point(|&p| p <= sqrt);
    let base = &base[..base_end];

    let mut segment = vec![true; SEGMENT_LEN as usize];
    let mut start = lo;
    while start <= hi {
        let end = (start + SEGMENT_LEN - 1).min(hi);
        let len = (end - start + 1) as usize;
        segment[..len].fill(true);
        for &p in base {
            if p * p > end {
                break;
            }
            let first = (p * p).max(start.div_ceil(p) * p);
            let mut m = first;
            while m <= end {
                segment[(m - start) as usize] = false;
                m += p;
            }
        }
        for (i, &is_prime) in segment[..len].iter().enumerate() {
            if is_prime {
                f(start + i as u64);
            }
        }
        if end == u64::MAX {
            break;
        }
        start = end + 1;
    }
}

/// Complete ascending list of primes in `[lo, hi]`.
pub fn primes_in(lo: u64, hi: u64) -> Result<PrimeWindow, SieveError> {
    if lo < 2 || lo > hi {
        return Err(SieveError::InvalidRange { lo, hi });
    }
    if hi > MAX_SIEVE_BOUND {
        return Err(SieveError::BeyondBound { value: hi });
    }
    if hi - lo > MAX_WINDOW_SPAN {
        return Err(SieveError::SpanTooLarge { span: hi - lo });
    }
    let mut primes = Vec::new();
    for_each_prime_in(lo, hi, |p| primes.push(p));
    Ok(PrimeWindow { lo, hi, primes })
}

/// Exact prime count `π(x)` by streaming the sieve; no list is materialized,
/// so only the segment buffer is resident. Time is linear-ish in `x`.
pub fn prime_count(x: u64) -> Result<PrimeCount, SieveError> {
    if x < 2 {
        return Err(SieveError::InvalidRange { lo: 2, hi: x });
    }
    if x > MAX_SIEVE_BOUND {
        return Err(SieveError::BeyondBound { value: x });
    }
    let mut count = 0u64;
    for_each_prime_in(2, x, |_| count += 1);
    let chebyshev_ratio = count as f64 * (x as f64).ln() / x as f64;
    Ok(PrimeCount { count, chebyshev_ratio })
}

/// Deterministic Miller–Rabin for 64-bit integers. The witness set is
/// sufficient for every `n < 3.3·10²⁴`, which covers the whole input range.
pub fn is_prime_u64(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..r - 1 {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Distinct prime factors of `n`, found by trial division up to
/// [`TRIAL_DIVISION_BOUND`] followed by a deterministic primality test on the
/// cofactor. When the cofactor is composite (or too large to certify), it is
/// returned unresolved instead of being mis-counted.
#[derive(Clone, Debug, PartialEq)]
pub struct DistinctPrimeFactors {
    pub primes: Vec<BigUint>,
    pub unresolved: Option<BigUint>,
}

pub fn distinct_prime_factors(n: &BigUint) -> DistinctPrimeFactors {
    let mut primes = Vec::new();
    let mut m = n.clone();
    if m.is_zero() || m.is_one() {
        return DistinctPrimeFactors { primes, unresolved: None };
    }

    if let Some(mut small) = m.to_u64() {
        for &p in trial_primes() {
            if p * p > small {
                break;
            }
            if small % p == 0 {
                primes.push(BigUint::from(p));
                while small % p == 0 {
                    small /= p;
                }
            }
        }
        if small > 1 {
            // Any composite cofactor below the square of the trial bound
            // would still have a small factor, so this is prime by
            // construction; Miller-Rabin covers the rest of the u64 range.
            if is_prime_u64(small) {
                primes.push(BigUint::from(small));
            } else {
                return DistinctPrimeFactors { primes, unresolved: Some(BigUint::from(small)) };
            }
        }
        return DistinctPrimeFactors { primes, unresolved: None };
    }

    for &p in trial_primes() {
        let pb = BigUint::from(p);
        if (&m % &pb).is_zero() {
            primes.push(pb.clone());
            while (&m % &pb).is_zero() {
                m /= &pb;
            }
            if let Some(small) = m.to_u64() {
                // Dropped into the 64-bit range: finish there.
                let rest = distinct_prime_factors(&BigUint::from(small));
                let fresh: Vec<BigUint> =
                    rest.primes.into_iter().filter(|q| !primes.contains(q)).collect();
                primes.extend(fresh);
                return DistinctPrimeFactors { primes, unresolved: rest.unresolved };
            }
        }
    }
    if m.is_one() {
        DistinctPrimeFactors { primes, unresolved: None }
    } else if let Some(small) = m.to_u64() {
        if is_prime_u64(small) {
            primes.push(BigUint::from(small));
            DistinctPrimeFactors { primes, unresolved: None }
        } else {
            DistinctPrimeFactors { primes, unresolved: Some(m) }
        }
    } else {
        // Beyond the deterministic certification range.
        DistinctPrimeFactors { primes, unresolved: Some(m) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn window_matches_the_textbook_list() {
        let w = primes_in(10, 20).unwrap();
        assert_eq!(w.primes, vec![11, 13, 17, 19]);
        assert!(w.contains(13));
        assert!(!w.contains(15));
        assert_eq!(primes_in(2, 2).unwrap().primes, vec![2]);
    }

    #[test]
    fn segmented_window_agrees_with_plain_sieve() {
        let w = primes_in(2, 10_000).unwrap();
        assert_eq!(w.primes, simple_sieve(10_000));
    }

    #[test]
    fn window_crossing_segment_boundary() {
        let lo = SEGMENT_LEN - 500;
        let hi = SEGMENT_LEN + 500;
        let w = primes_in(lo, hi).unwrap();
        let brute: Vec<u64> = (lo..=hi).filter(|&n| is_prime_u64(n)).collect();
        assert_eq!(w.primes, brute);
        assert!(!w.is_empty());
    }

    #[test]
    fn invalid_ranges_are_rejected() {
        assert_eq!(primes_in(1, 10).unwrap_err(), SieveError::InvalidRange { lo: 1, hi: 10 });
        assert_eq!(primes_in(20, 10).unwrap_err(), SieveError::InvalidRange { lo: 20, hi: 10 });
        assert!(matches!(primes_in(2, MAX_SIEVE_BOUND + 1), Err(SieveError::BeyondBound { .. })));
        assert!(matches!(
            primes_in(2, 2 + MAX_WINDOW_SPAN + 1),
            Err(SieveError::SpanTooLarge { .. })
        ));
    }

    #[test]
    fn prime_count_millionth_milestones() {
        assert_eq!(prime_count(1_000_000).unwrap().count, 78_498);
        assert_eq!(prime_count(100_000).unwrap().count, 9_592);
        assert_eq!(prime_count(10_000).unwrap().count, 1_229);
    }

    #[test]
    fn chebyshev_ratio_sits_near_one() {
        for x in [10_000u64, 100_000, 1_000_000] {
            let pc = prime_count(x).unwrap();
            assert!(
                (0.9..=1.3).contains(&pc.chebyshev_ratio),
                "ratio {} at x = {x}",
                pc.chebyshev_ratio
            );
        }
    }

    #[test]
    fn count_and_window_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let lo: u64 = rng.gen_range(3..90_000);
            let hi: u64 = lo + rng.gen_range(0..10_000);
            let window = primes_in(lo, hi).unwrap();
            let below_hi = prime_count(hi).unwrap().count;
            let below_lo = prime_count(lo - 1).map(|c| c.count).unwrap_or(0);
            assert_eq!(below_hi - below_lo, window.len() as u64, "window [{lo}, {hi}]");
        }
    }

    #[test]
    fn miller_rabin_agrees_with_known_cases() {
        assert!(is_prime_u64(2));
        assert!(is_prime_u64(97));
        assert!(is_prime_u64(2_147_483_647)); // 2^31 - 1
        assert!(is_prime_u64(2_305_843_009_213_693_951)); // 2^61 - 1
        assert!(!is_prime_u64(0));
        assert!(!is_prime_u64(1));
        assert!(!is_prime_u64(561)); // Carmichael
        assert!(!is_prime_u64(3_825_123_056_546_413_051)); // strong pseudoprime to small bases
    }

    #[test]
    fn factoring_small_and_large() {
        let f = distinct_prime_factors(&BigUint::from(720u32));
        assert_eq!(f.primes, vec![2u32.into(), 3u32.into(), 5u32.into()]);
        assert_eq!(f.unresolved, None);

        // Prime cofactor beyond the trial bound is certified, not dropped.
        let p = BigUint::from(2_147_483_647u64);
        let f = distinct_prime_factors(&(BigUint::from(12u32) * &p));
        assert!(f.primes.contains(&p));
        assert_eq!(f.unresolved, None);

        // A semiprime of two huge primes cannot be split by trial division.
        let q = BigUint::from(2_305_843_009_213_693_951u64);
        let f = distinct_prime_factors(&(&p * &q));
        assert!(f.primes.is_empty());
        assert_eq!(f.unresolved, Some(&p * &q));
    }

    #[test]
    fn factoring_trivial_inputs() {
        assert_eq!(
            distinct_prime_factors(&BigUint::one()),
            DistinctPrimeFactors { primes: vec![], unresolved: None }
        );
        assert_eq!(
            distinct_prime_factors(&BigUint::zero()),
            DistinctPrimeFactors { primes: vec![], unresolved: None }
        );
    }
}
