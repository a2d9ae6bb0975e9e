//! Word balls in the Cayley graph of a finitely generated matrix group.
//!
//! A [`GeneratorSet`] holds finitely many invertible rational matrices; after
//! [`GeneratorSet::symmetrize`] it is closed under inverses, and
//! [`enumerate_ball`] performs a level-synchronous breadth-first enumeration
//! of `B(n) = (Σ ∪ Σ⁻¹)ⁿ` with exact deduplication through canonical keys.
//!
//! Elements are stored as their canonical encodings; the encoding is
//! injective and decodable, so a key set is an element store without keeping
//! every `BigRational` alive. A hard element budget guards against entry-size
//! blowup: when the next level would exceed it the enumeration stops cleanly
//! at the last fully completed radius and flags the result as partial.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_integer::Integer as _;
use num_traits::One;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::codec::{canonical_key, decode_key, CanonicalKey};
use crate::RationalMatrix;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CayleyError {
    #[error("generator {index} is {got}x{got}, expected {expected}x{expected}")]
    DimensionMismatch { index: usize, expected: usize, got: usize },
    #[error("generator {index} is singular")]
    SingularGenerator { index: usize },
    #[error("{got} labels for {expected} generators")]
    LabelCount { expected: usize, got: usize },
    #[error("declared denominator base must be at least 1")]
    ZeroDenominatorBase,
    #[error(
        "generator {index} has an entry denominator with a prime factor outside the declared base"
    )]
    DenominatorOutsideBase { index: usize },
    #[error("generator set must be symmetrized before enumeration")]
    NotSymmetric,
    #[error("element budget must be at least 1")]
    ZeroBudget,
}

/// Finite set of invertible rational matrices with a declared denominator
/// base: every entry denominator is a product of primes dividing `denom`.
#[derive(Clone, Debug)]
pub struct GeneratorSet {
    dim: usize,
    denom: u64,
    gens: Vec<RationalMatrix>,
    labels: Vec<String>,
    symmetric: bool,
}

impl GeneratorSet {
    /// Validates dimensions, invertibility, and that entry denominators stay
    /// inside the declared base. `denom = 1` declares integer matrices.
    pub fn new(
        dim: usize,
        denom: u64,
        gens: Vec<RationalMatrix>,
        labels: Option<Vec<String>>,
    ) -> Result<Self, CayleyError> {
        if denom == 0 {
            return Err(CayleyError::ZeroDenominatorBase);
        }
        let labels = match labels {
            Some(l) => {
                if l.len() != gens.len() {
                    return Err(CayleyError::LabelCount { expected: gens.len(), got: l.len() });
                }
                l
            }
            None => (0..gens.len()).map(|i| format!("g{i}")).collect(),
        };
        for (index, g) in gens.iter().enumerate() {
            if g.dim() != dim {
                return Err(CayleyError::DimensionMismatch { index, expected: dim, got: g.dim() });
            }
            if g.inverse().is_err() {
                return Err(CayleyError::SingularGenerator { index });
            }
            if !denominators_within_base(g, denom) {
                return Err(CayleyError::DenominatorOutsideBase { index });
            }
        }
        Ok(GeneratorSet { dim, denom, gens, labels, symmetric: false })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Declared denominator base `s`; primes dividing `s` are inadmissible
    /// for any reduction mod p.
    pub fn denom(&self) -> u64 {
        self.denom
    }

    pub fn generators(&self) -> &[RationalMatrix] {
        &self.gens
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Returns the set extended by all missing inverses, with duplicates
    /// removed. Idempotent: symmetrizing a symmetric set changes nothing.
    pub fn symmetrize(&self) -> GeneratorSet {
        let mut seen = HashSet::new();
        let mut gens = Vec::new();
        let mut labels = Vec::new();
        for (g, label) in self.gens.iter().zip(&self.labels) {
            if seen.insert(canonical_key(g)) {
                gens.push(g.clone());
                labels.push(label.clone());
            }
        }
        for (g, label) in self.gens.iter().zip(&self.labels) {
            let inv = g.inverse().expect("invertibility was checked at construction");
            if seen.insert(canonical_key(&inv)) {
                gens.push(inv);
                labels.push(format!("{label}^-1"));
            }
        }
        GeneratorSet { dim: self.dim, denom: self.denom, gens, labels, symmetric: true }
    }

    /// Checks closure under inverses without changing the set, then marks it
    /// symmetric. For inputs that already ship both `g` and `g⁻¹`.
    pub fn assert_symmetric(mut self) -> Result<Self, CayleyError> {
        let keys: HashSet<CanonicalKey> = self.gens.iter().map(canonical_key).collect();
        for (index, g) in self.gens.iter().enumerate() {
            let inv = g.inverse().map_err(|_| CayleyError::SingularGenerator { index })?;
            if !keys.contains(&canonical_key(&inv)) {
                return Err(CayleyError::NotSymmetric);
            }
        }
        self.symmetric = true;
        Ok(self)
    }

    /// Content digest of the set: dimension, denominator base, and the sorted
    /// canonical keys of the generators. Stable across runs and platforms, so
    /// it names output files and ties series to the set that produced them.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(b"genset/v1");
        hasher.update((self.dim as u32).to_be_bytes());
        hasher.update(self.denom.to_be_bytes());
        let mut keys: Vec<CanonicalKey> = self.gens.iter().map(canonical_key).collect();
        keys.sort();
        for k in keys {
            hasher.update((k.as_bytes().len() as u32).to_be_bytes());
            hasher.update(k.as_bytes());
        }
        let out = hasher.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// First 12 hex characters of [`GeneratorSet::digest`], for file names.
    pub fn short_digest(&self) -> String {
        self.digest()[..12].to_string()
    }
}

/// True when every prime factor of each entry denominator divides `base`.
fn denominators_within_base(g: &RationalMatrix, base: u64) -> bool {
    let base = BigUint::from(base);
    for entry in g.entries() {
        let mut d = entry.denom().magnitude().clone();
        while !d.is_one() {
            let g = d.gcd(&base);
            if g.is_one() {
                return false;
            }
            d /= g;
        }
    }
    true
}

/// Word ball enumerated level by level. `spheres[n]` holds the canonical
/// keys of the elements whose word length is exactly `n`, sorted by key, and
/// `counts[n]` the cumulative ball size `|B(n)|`.
#[derive(Clone, Debug)]
pub struct BallLevels {
    dim: usize,
    denom: u64,
    gens_digest: String,
    spheres: Vec<Vec<CanonicalKey>>,
    counts: Vec<u64>,
    complete: bool,
}

impl BallLevels {
    /// Largest radius with a fully enumerated level.
    pub fn last_radius(&self) -> usize {
        self.spheres.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn denom(&self) -> u64 {
        self.denom
    }

    pub fn gens_digest(&self) -> &str {
        &self.gens_digest
    }

    /// Cumulative ball sizes `|B(0)|, |B(1)|, …`.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, radius: usize) -> Option<u64> {
        self.counts.get(radius).copied()
    }

    /// False when the element budget cut the enumeration short; the stored
    /// levels are still exact and complete up to [`BallLevels::last_radius`].
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn sphere_keys(&self, radius: usize) -> &[CanonicalKey] {
        &self.spheres[radius]
    }

    /// Keys of all elements of `B(radius)`, grouped by word length.
    pub fn ball_keys(&self, radius: usize) -> impl Iterator<Item = &CanonicalKey> {
        self.spheres[..=radius].iter().flatten()
    }

    /// Decodes the elements of `B(radius)` back to matrices.
    pub fn ball_matrices(&self, radius: usize) -> impl Iterator<Item = RationalMatrix> + '_ {
        self.ball_keys(radius).map(|k| decode_key(k).expect("ball keys decode by construction"))
    }

    /// Rebuilds a ball from persisted per-level keys, revalidating that every
    /// key decodes to a matrix of the right dimension and recomputing counts.
    pub fn from_parts(
        dim: usize,
        denom: u64,
        gens_digest: String,
        spheres: Vec<Vec<CanonicalKey>>,
        complete: bool,
    ) -> Result<Self, crate::codec::CodecError> {
        let mut counts = Vec::with_capacity(spheres.len());
        let mut total = 0u64;
        for sphere in &spheres {
            for key in sphere {
                let m = decode_key(key)?;
                if m.dim() != dim {
                    return Err(crate::codec::CodecError::BadDimension(m.dim() as u32));
                }
            }
            total += sphere.len() as u64;
            counts.push(total);
        }
        Ok(BallLevels { dim, denom, gens_digest, spheres, counts, complete })
    }
}

/// Enumerates `B(0), …, B(n_max)` for a symmetric generator set.
///
/// The frontier of each level is partitioned into chunks whose candidate
/// products are computed independently; per-level results are merged into the
/// global deduplicating store and sorted, so the outcome does not depend on
/// how the chunks were scheduled.
pub fn enumerate_ball(
    gens: &GeneratorSet,
    n_max: usize,
    budget: u64,
) -> Result<BallLevels, CayleyError> {
    if !gens.is_symmetric() {
        return Err(CayleyError::NotSymmetric);
    }
    if budget == 0 {
        return Err(CayleyError::ZeroBudget);
    }

    let identity = RationalMatrix::identity(gens.dim());
    let id_key = canonical_key(&identity);
    let mut seen: HashSet<CanonicalKey> = HashSet::new();
    seen.insert(id_key.clone());
    let mut spheres = vec![vec![id_key]];
    let mut counts = vec![1u64];
    let mut complete = true;

    for _n in 1..=n_max {
        let frontier = spheres.last().expect("at least the identity level exists");
        if frontier.is_empty() {
            // The group is exhausted; later balls repeat the last count.
            spheres.push(Vec::new());
            let last = *counts.last().expect("counts is never empty");
            counts.push(last);
            continue;
        }

        let candidates: Vec<Vec<CanonicalKey>> = frontier
            .par_chunks(1024)
            .map(|chunk| {
                let mut out = Vec::with_capacity(chunk.len() * gens.generators().len());
                for key in chunk {
                    let m = decode_key(key).expect("ball keys decode by construction");
                    for g in gens.generators() {
                        let product = m.mul(g).expect("generator dimensions were validated");
                        out.push(canonical_key(&product));
                    }
                }
                out
            })
            .collect();

        let mut total = *counts.last().expect("counts is never empty");
        let mut sphere = Vec::new();
        let mut over_budget = false;
        'merge: for chunk in candidates {
            for key in chunk {
                if seen.contains(&key) {
                    continue;
                }
                if total + sphere.len() as u64 + 1 > budget {
                    over_budget = true;
                    break 'merge;
                }
                seen.insert(key.clone());
                sphere.push(key);
            }
        }
        if over_budget {
            complete = false;
            break;
        }
        sphere.sort();
        total += sphere.len() as u64;
        spheres.push(sphere);
        counts.push(total);
    }

    Ok(BallLevels {
        dim: gens.dim(),
        denom: gens.denom(),
        gens_digest: gens.digest(),
        spheres,
        counts,
        complete,
    })
}
