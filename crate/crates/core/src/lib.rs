//! Exact-arithmetic toolkit for measuring the growth of finitely generated
//! matrix groups over the rationals.
//!
//! The crate is organised around a small number of layers:
//!
//! * [`matrix`] — square matrices generic over an exact scalar type, with
//!   multiplication, inversion, and characteristic polynomials ([`charpoly`]).
//! * [`codec`] — an injective canonical byte encoding for rational matrices,
//!   used as the deduplication key everywhere a set of matrices is built.
//! * [`cayley`] — word balls `B(n) = (Σ ∪ Σ⁻¹)ⁿ` enumerated level by level
//!   with exact deduplication and a hard element budget.
//! * [`growth`] — distinct-value counting per radius (elements, traces,
//!   characteristic polynomials), rate estimation, and a growth classifier.
//! * [`primes`] / [`pigeonhole`] — segmented sieving, prime counting, and the
//!   pigeonhole search for a prime that keeps a ball injective mod p.
//! * [`modp`] — reduction of the whole picture into `SL_m(F_p)`: subgroup
//!   closure, surjectivity radius, product growth, and value censuses.
//!
//! All characteristic-zero arithmetic is exact: scalars are arbitrary
//! precision rationals kept in lowest terms, so equality of matrices is
//! literal equality and no tolerance ever enters a set membership test.

pub mod cayley;
pub mod charpoly;
pub mod codec;
pub mod growth;
pub mod matrix;
pub mod modp;
pub mod pigeonhole;
pub mod primes;
pub mod scalar;

/// Arbitrary precision rational scalar, always in lowest terms with a
/// positive denominator (both invariants are maintained by `num-rational`).
pub type Rational = num_rational::BigRational;

/// Arbitrary precision integer scalar.
pub type Integer = num_bigint::BigInt;

/// Square matrix over [`Rational`]: the concrete instantiation used by the
/// enumeration pipeline.
pub type RationalMatrix = matrix::SquareMatrix<Rational>;

/// Square matrix over [`Integer`]: handy for integer-only computations such
/// as entrywise gcd bounds and test oracles.
pub type IntegerMatrix = matrix::SquareMatrix<Integer>;

pub use cayley::{enumerate_ball, BallLevels, GeneratorSet};
pub use charpoly::{charpoly, CharPoly};
pub use codec::{canonical_key, decode_key, CanonicalKey};
pub use growth::{
    classify_growth, count_series, estimate_rate, CountKind, GrowthClass, GrowthSeries,
    RateEstimate,
};
pub use modp::{
    closure, is_injective_mod_p, power_cover_exponent, reduce_mod_p, slm_order,
    surjectivity_closure, surjectivity_radius, triple_product_size, value_census, CensusKind,
    CensusTable, FiniteMatrix, FiniteSet, SurjectivityOutcome,
};
pub use pigeonhole::{
    find_injective_prime, kappa, kappa_upper_bound, verify_certificate, InjectivePrimeCertificate,
};
pub use primes::{prime_count, primes_in, PrimeCount, PrimeWindow};
