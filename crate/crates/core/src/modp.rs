//! Reduction mod p and the finite side of the pipeline: subgroup closure in
//! `SL_m(F_p)`, surjectivity radius, product-set growth, and value censuses.
//!
//! Matrices over `F_p` are kept as reduced `u64` residues with the modulus
//! bounded below `2^31`, so entry products fit in `u64` and dot products
//! accumulate in `u128` without overflow. Set membership uses a packed key:
//! a single `u64` whenever `dim² · bit_len(p-1) ≤ 64` (which covers every
//! pipeline-sized case), a boxed slice otherwise.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer as _;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cayley::{BallLevels, GeneratorSet};
use crate::codec::decode_key;
use crate::primes::is_prime_u64;
use crate::RationalMatrix;

/// Largest allowed modulus (exclusive). Keeps `a · b` for reduced residues
/// inside `u64`.
pub const MAX_MODULUS: u64 = 1 << 31;

#[derive(Debug, Error, PartialEq)]
pub enum ModPError {
    #[error("modulus {modulus} is not a prime below 2^31")]
    UnsupportedModulus { modulus: u64 },
    #[error("prime {prime} divides an entry denominator; reduction is undefined")]
    InadmissiblePrime { prime: u64 },
    #[error("matrices have mismatched shape or modulus")]
    ShapeMismatch,
    #[error("matrix is singular mod p")]
    Singular,
    #[error("SL_m needs m >= 2, got {dim}")]
    DimensionTooSmall { dim: usize },
    #[error("closure exceeded the element cap {cap}")]
    ClosureCapExceeded { cap: usize },
    #[error("ball has radius {available}, requested level {requested}")]
    RadiusOutOfRange { requested: usize, available: usize },
    #[error("set is empty")]
    EmptySet,
}

fn check_modulus(p: u64) -> Result<(), ModPError> {
    if !(2..MAX_MODULUS).contains(&p) || !is_prime_u64(p) {
        return Err(ModPError::UnsupportedModulus { modulus: p });
    }
    Ok(())
}

/// Square matrix over `F_p` with entries stored as reduced residues.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteMatrix {
    modulus: u64,
    dim: usize,
    entries: Vec<u64>,
}

/// Packed set-membership key for a [`FiniteMatrix`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FiniteKey {
    Narrow(u64),
    Wide(Box<[u64]>),
}

impl FiniteMatrix {
    /// Builds a matrix, reducing entries mod `p`. The modulus must be a prime
    /// below `2^31`.
    pub fn new(modulus: u64, dim: usize, entries: Vec<u64>) -> Result<Self, ModPError> {
        check_modulus(modulus)?;
        if dim == 0 || entries.len() != dim * dim {
            return Err(ModPError::ShapeMismatch);
        }
        let entries = entries.into_iter().map(|e| e % modulus).collect();
        Ok(FiniteMatrix { modulus, dim, entries })
    }

    pub fn identity(modulus: u64, dim: usize) -> Result<Self, ModPError> {
        check_modulus(modulus)?;
        if dim == 0 {
            return Err(ModPError::ShapeMismatch);
        }
        let mut entries = vec![0u64; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1 % modulus;
        }
        Ok(FiniteMatrix { modulus, dim, entries })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> u64 {
        self.entries[row * self.dim + col]
    }

    pub fn is_identity(&self) -> bool {
        self.entries.iter().enumerate().all(|(idx, &e)| {
            let expected = if idx / self.dim == idx % self.dim { 1 % self.modulus } else { 0 };
            e == expected
        })
    }

    /// Matrix product. Shapes and moduli must agree; internal callers keep
    /// that invariant, so this asserts rather than returning a `Result`.
    pub fn mul(&self, rhs: &FiniteMatrix) -> FiniteMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        assert_eq!(self.modulus, rhs.modulus, "modulus mismatch");
        let d = self.dim;
        let p = self.modulus as u128;
        let mut entries = vec![0u64; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc: u128 = 0;
                for k in 0..d {
                    acc += (self.entries[i * d + k] as u128) * (rhs.entries[k * d + j] as u128);
                }
                entries[i * d + j] = (acc % p) as u64;
            }
        }
        FiniteMatrix { modulus: self.modulus, dim: d, entries }
    }

    pub fn trace(&self) -> u64 {
        let mut acc: u128 = 0;
        for i in 0..self.dim {
            acc += self.entries[i * self.dim + i] as u128;
        }
        (acc % self.modulus as u128) as u64
    }

    pub fn det(&self) -> u64 {
        let (det, _, _) = self.row_reduce(None);
        det
    }

    /// Inverse by Gauss-Jordan elimination with Fermat inverses.
    pub fn inverse(&self) -> Result<FiniteMatrix, ModPError> {
        let (_, _, inv) = self.row_reduce(Some(()));
        inv.ok_or(ModPError::Singular)
    }

    /// Shared elimination core: returns `(det, rank, inverse)`; the inverse
    /// is tracked only when requested and is `None` for singular input.
    fn row_reduce(&self, want_inverse: Option<()>) -> (u64, usize, Option<FiniteMatrix>) {
        let d = self.dim;
        let p = self.modulus;
        let mut a = self.entries.clone();
        let mut inv = want_inverse.map(|_| {
            let mut id = vec![0u64; d * d];
            for i in 0..d {
                id[i * d + i] = 1 % p;
            }
            id
        });
        let mut det: u64 = 1 % p;
        let mut rank = 0usize;
        for col in 0..d {
            let Some(pivot_row) = (col..d).find(|&r| a[r * d + col] != 0) else {
                det = 0;
                continue;
            };
            if pivot_row != col {
                for j in 0..d {
                    a.swap(pivot_row * d + j, col * d + j);
                    if let Some(inv) = inv.as_mut() {
                        inv.swap(pivot_row * d + j, col * d + j);
                    }
                }
                det = (p - det) % p;
            }
            let pivot = a[col * d + col];
            det = mul_mod(det, pivot, p);
            rank += 1;
            let pivot_inv = inv_mod(pivot, p);
            for j in 0..d {
                a[col * d + j] = mul_mod(a[col * d + j], pivot_inv, p);
                if let Some(inv) = inv.as_mut() {
                    inv[col * d + j] = mul_mod(inv[col * d + j], pivot_inv, p);
                }
            }
            for r in 0..d {
                if r == col || a[r * d + col] == 0 {
                    continue;
                }
                let factor = a[r * d + col];
                for j in 0..d {
                    let sub = mul_mod(factor, a[col * d + j], p);
                    a[r * d + j] = (a[r * d + j] + p - sub) % p;
                    if let Some(inv) = inv.as_mut() {
                        let sub = mul_mod(factor, inv[col * d + j], p);
                        inv[r * d + j] = (inv[r * d + j] + p - sub) % p;
                    }
                }
            }
        }
        let inverse = if rank == d {
            inv.map(|entries| FiniteMatrix { modulus: p, dim: d, entries })
        } else {
            None
        };
        (det, rank, inverse)
    }

    /// Characteristic polynomial of the matrix, as descending coefficients
    /// of a monic polynomial of degree `dim` over `F_p`. Computed by cofactor
    /// expansion of `det(xI - A)`, which needs no divisions at all and is
    /// cheap at pipeline dimensions.
    pub fn charpoly(&self) -> Vec<u64> {
        let d = self.dim;
        let p = self.modulus;
        let rows: Vec<Vec<Poly>> = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let neg = (p - self.entries[i * d + j] % p) % p;
                        if i == j {
                            normalize(vec![neg, 1 % p])
                        } else {
                            normalize(vec![neg])
                        }
                    })
                    .collect()
            })
            .collect();
        let det = det_poly(&rows, p);
        let mut descending = vec![0u64; d + 1];
        for (i, c) in det.iter().enumerate() {
            descending[d - i] = *c;
        }
        descending
    }

    /// Packed dedup key; injective for fixed modulus and dimension.
    pub fn key(&self) -> FiniteKey {
        let bits = entry_bits(self.modulus);
        if self.dim * self.dim * bits <= 64 {
            let mut key = 0u64;
            for (i, &e) in self.entries.iter().enumerate() {
                if i == 0 {
                    key = e;
                } else {
                    key = (key << bits) | e;
                }
            }
            FiniteKey::Narrow(key)
        } else {
            FiniteKey::Wide(self.entries.clone().into_boxed_slice())
        }
    }
}

impl fmt::Display for FiniteMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim {
            let row: Vec<String> =
                (0..self.dim).map(|j| self.entries[i * self.dim + j].to_string()).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

fn entry_bits(modulus: u64) -> usize {
    (64 - (modulus - 1).leading_zeros()).max(1) as usize
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    // Residues are below 2^31, so the product fits in u64.
    (a * b) % p
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Polynomial over `F_p` as ascending coefficients with no trailing zeros.
type Poly = Vec<u64>;

fn normalize(mut v: Poly) -> Poly {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn poly_add(a: &Poly, b: &Poly, p: u64) -> Poly {
    let mut out = vec![0u64; a.len().max(b.len())];
    for (i, slot) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *slot = (x + y) % p;
    }
    normalize(out)
}

fn poly_neg(a: &Poly, p: u64) -> Poly {
    normalize(a.iter().map(|&c| (p - c) % p).collect())
}

fn poly_mul(a: &Poly, b: &Poly, p: u64) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + mul_mod(x, y, p)) % p;
        }
    }
    normalize(out)
}

/// Determinant of a polynomial matrix by first-row cofactor expansion.
fn det_poly(rows: &[Vec<Poly>], p: u64) -> Poly {
    let d = rows.len();
    if d == 1 {
        return rows[0][0].clone();
    }
    let mut acc: Poly = Vec::new();
    for j in 0..d {
        if rows[0][j].is_empty() {
            continue;
        }
        let minor: Vec<Vec<Poly>> = rows[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != j)
                    .map(|(_, poly)| poly.clone())
                    .collect()
            })
            .collect();
        let mut term = poly_mul(&rows[0][j], &det_poly(&minor, p), p);
        if j % 2 == 1 {
            term = poly_neg(&term, p);
        }
        acc = poly_add(&acc, &term, p);
    }
    acc
}

/// Reduces a rational matrix mod `p`, mapping each entry `a/b` to
/// `a · b⁻¹ mod p`. Fails when `p` divides any denominator.
pub fn reduce_mod_p(m: &RationalMatrix, p: u64) -> Result<FiniteMatrix, ModPError> {
    check_modulus(p)?;
    let big_p = BigUint::from(p);
    let mut entries = Vec::with_capacity(m.dim() * m.dim());
    for entry in m.entries() {
        let den = entry.denom().magnitude() % &big_p;
        let den = den.to_u64().expect("residue fits u64");
        if den == 0 {
            return Err(ModPError::InadmissiblePrime { prime: p });
        }
        let num = entry.numer().mod_floor(&big_p.clone().into());
        let num = num.to_u64().expect("residue fits u64");
        entries.push(mul_mod(num, inv_mod(den, p), p));
    }
    Ok(FiniteMatrix { modulus: p, dim: m.dim(), entries })
}

/// Deduplicated set of matrices over a fixed `F_p` and dimension. Keeps the
/// elements in insertion order next to the packed key set.
pub struct FiniteSet {
    modulus: u64,
    dim: usize,
    keys: HashSet<FiniteKey>,
    elements: Vec<FiniteMatrix>,
}

impl FiniteSet {
    pub fn new(modulus: u64, dim: usize) -> Result<Self, ModPError> {
        check_modulus(modulus)?;
        if dim == 0 {
            return Err(ModPError::ShapeMismatch);
        }
        Ok(FiniteSet { modulus, dim, keys: HashSet::new(), elements: Vec::new() })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[FiniteMatrix] {
        &self.elements
    }

    /// Inserts the matrix if absent; returns whether it was new.
    pub fn insert(&mut self, m: FiniteMatrix) -> Result<bool, ModPError> {
        if m.modulus != self.modulus || m.dim != self.dim {
            return Err(ModPError::ShapeMismatch);
        }
        if self.keys.insert(m.key()) {
            self.elements.push(m);
            Ok(true)
        } else {
            Ok(false)
        }
    }

    pub fn contains(&self, m: &FiniteMatrix) -> bool {
        self.keys.contains(&m.key())
    }
}

/// Image of the word ball `B(k)` under reduction mod `p`.
pub fn reduce_ball(ball: &BallLevels, k: usize, p: u64) -> Result<FiniteSet, ModPError> {
    if k > ball.last_radius() {
        return Err(ModPError::RadiusOutOfRange { requested: k, available: ball.last_radius() });
    }
    let mut set = FiniteSet::new(p, ball.dim())?;
    for key in ball.ball_keys(k) {
        let m = decode_key(key).expect("ball keys decode by construction");
        set.insert(reduce_mod_p(&m, p)?)?;
    }
    Ok(set)
}

/// Whether reduction mod `p` is injective on the ball `B(k)`: the image has
/// exactly as many elements as the ball.
pub fn is_injective_mod_p(ball: &BallLevels, k: usize, p: u64) -> Result<bool, ModPError> {
    let image = reduce_ball(ball, k, p)?;
    let expected = ball.count(k).expect("radius checked") as usize;
    Ok(image.len() == expected)
}

/// Order of `SL_m(F_p)`: `p^(m(m-1)/2) · ∏_{i=2..m} (p^i - 1)`.
pub fn slm_order(m: usize, p: u64) -> Result<BigUint, ModPError> {
    check_modulus(p)?;
    if m < 2 {
        return Err(ModPError::DimensionTooSmall { dim: m });
    }
    let p = BigUint::from(p);
    let mut order = p.pow((m * (m - 1) / 2) as u32);
    for i in 2..=m {
        order *= p.pow(i as u32) - BigUint::one();
    }
    Ok(order)
}

/// Result of a breadth-first closure: the generated set, the last radius at
/// which a new element appeared, and whether the closure ran to completion
/// within the cap.
pub struct ClosureOutcome {
    pub set: FiniteSet,
    pub diameter: usize,
    pub complete: bool,
}

/// Breadth-first closure of a finite generator list inside `GL_m(F_p)`,
/// starting from the identity and multiplying by the generators and their
/// inverses. Level `n` of the search is therefore the image of the word ball
/// `B(n)`, and the level at which growth stops is the Cayley-graph diameter
/// of the generated subgroup. Stops early (with `complete = false`) once the
/// set would exceed `cap` elements.
pub fn closure(gens: &[FiniteMatrix], cap: usize) -> Result<ClosureOutcome, ModPError> {
    let Some(first) = gens.first() else {
        return Err(ModPError::EmptySet);
    };
    let (p, d) = (first.modulus, first.dim);
    if gens.iter().any(|g| g.modulus != p || g.dim != d) {
        return Err(ModPError::ShapeMismatch);
    }
    if cap == 0 {
        return Err(ModPError::ClosureCapExceeded { cap });
    }
    let mut symmetric: Vec<FiniteMatrix> = Vec::new();
    let mut gen_keys = HashSet::new();
    for g in gens {
        let inv = g.inverse()?;
        for cand in [g.clone(), inv] {
            if gen_keys.insert(cand.key()) {
                symmetric.push(cand);
            }
        }
    }
    let mut set = FiniteSet::new(p, d)?;
    set.insert(FiniteMatrix::identity(p, d)?)?;
    let mut frontier: Vec<FiniteMatrix> = vec![FiniteMatrix::identity(p, d)?];
    let mut diameter = 0usize;
    let mut level = 0usize;
    loop {
        level += 1;
        let mut next = Vec::new();
        for m in &frontier {
            for g in &symmetric {
                let prod = m.mul(g);
                if set.len() >= cap && !set.contains(&prod) {
                    return Ok(ClosureOutcome { set, diameter, complete: false });
                }
                if set.insert(prod.clone())? {
                    next.push(prod);
                }
            }
        }
        if next.is_empty() {
            return Ok(ClosureOutcome { set, diameter, complete: true });
        }
        diameter = level;
        frontier = next;
    }
}

/// Outcome of [`surjectivity_radius`]: whether the reduced generators fill
/// all of `SL_m(F_p)`, and if so at which ball radius every element has
/// appeared (the Cayley-graph diameter `n*`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurjectivityOutcome {
    pub prime: u64,
    pub dim: usize,
    pub surjective: bool,
    /// Cayley-graph diameter of the image subgroup under the reduced
    /// generators; equals `n*` when `surjective` holds.
    pub radius: usize,
    pub closure_order: u64,
    /// `|SL_m(F_p)|` as a decimal string (it overflows u64 early).
    pub target_order: String,
}

/// Reduces a generator set mod `p` and closes it up inside `SL_m(F_p)`,
/// reporting whether the image is everything and how many steps that takes.
/// Word balls are symmetric by definition, and [`closure`] adjoins inverses
/// itself, so the generator set need not be pre-symmetrized. Errors with
/// [`ModPError::ClosureCapExceeded`] if the closure does not finish within
/// `cap` elements.
pub fn surjectivity_radius(
    gens: &GeneratorSet,
    p: u64,
    cap: usize,
) -> Result<SurjectivityOutcome, ModPError> {
    surjectivity_closure(gens, p, cap).map(|(outcome, _)| outcome)
}

/// Like [`surjectivity_radius`], but also hands back the materialized image
/// subgroup so callers can run censuses without repeating the closure.
pub fn surjectivity_closure(
    gens: &GeneratorSet,
    p: u64,
    cap: usize,
) -> Result<(SurjectivityOutcome, FiniteSet), ModPError> {
    let mut reduced = FiniteSet::new(p, gens.dim())?;
    for g in gens.generators() {
        reduced.insert(reduce_mod_p(g, p)?)?;
    }
    let outcome = closure(reduced.elements(), cap)?;
    if !outcome.complete {
        return Err(ModPError::ClosureCapExceeded { cap });
    }
    let target = slm_order(gens.dim(), p)?;
    let closure_order = outcome.set.len() as u64;
    let report = SurjectivityOutcome {
        prime: p,
        dim: gens.dim(),
        surjective: BigUint::from(closure_order) == target,
        radius: outcome.diameter,
        closure_order,
        target_order: target.to_string(),
    };
    Ok((report, outcome.set))
}

/// Size of the triple product set `AAA = {xyz : x, y, z ∈ A}`.
pub struct TripleProductOutcome {
    pub size: u64,
    /// False when the intermediate sets hit `cap` and the size is a lower
    /// bound only.
    pub complete: bool,
}

pub fn triple_product_size(a: &FiniteSet, cap: usize) -> Result<TripleProductOutcome, ModPError> {
    if a.is_empty() {
        return Err(ModPError::EmptySet);
    }
    let mut double = FiniteSet::new(a.modulus, a.dim)?;
    for x in a.elements() {
        for y in a.elements() {
            if double.len() >= cap {
                return Ok(TripleProductOutcome { size: double.len() as u64, complete: false });
            }
            double.insert(x.mul(y))?;
        }
    }
    let mut triple = FiniteSet::new(a.modulus, a.dim)?;
    for xy in double.elements() {
        for z in a.elements() {
            if triple.len() >= cap {
                return Ok(TripleProductOutcome { size: triple.len() as u64, complete: false });
            }
            triple.insert(xy.mul(z))?;
        }
    }
    Ok(TripleProductOutcome { size: triple.len() as u64, complete: true })
}

/// Outcome of [`power_cover_exponent`].
#[derive(Debug, PartialEq, Eq)]
pub enum PowerCoverOutcome {
    /// Smallest `D` with `(A ∪ A⁻¹ ∪ {I})^D = ⟨A⟩`.
    Exponent(usize),
    /// The search hit a cap before the powers stabilized; carries the last
    /// power tried and the size it reached.
    CapExceeded { last_power: usize, last_size: u64 },
}

/// Searches for the smallest `D` such that the `D`-fold product set of
/// `A' = A ∪ A⁻¹ ∪ {I}` is the whole generated subgroup `⟨A⟩`.
///
/// `A` is symmetrized and the identity adjoined so that `D` measures
/// covering rather than exact-length representation; `A'^D` is then the
/// word ball of radius `D`, which grows monotonically and stabilizes exactly
/// at `⟨A⟩`, so `D` is the Cayley diameter of `⟨A⟩` under `A'`. `d_cap`
/// bounds the power tried and `expansion_cap` bounds the set sizes; past
/// either cap the search reports `CapExceeded` rather than guessing.
pub fn power_cover_exponent(
    a: &FiniteSet,
    d_cap: usize,
    expansion_cap: usize,
) -> Result<PowerCoverOutcome, ModPError> {
    if a.is_empty() {
        return Err(ModPError::EmptySet);
    }
    let outcome = closure(a.elements(), expansion_cap)?;
    if !outcome.complete {
        return Ok(PowerCoverOutcome::CapExceeded {
            last_power: outcome.diameter,
            last_size: outcome.set.len() as u64,
        });
    }
    if outcome.diameter > d_cap {
        return Ok(PowerCoverOutcome::CapExceeded {
            last_power: d_cap,
            last_size: outcome.set.len() as u64,
        });
    }
    Ok(PowerCoverOutcome::Exponent(outcome.diameter))
}

/// What a census counts for each element of a set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CensusKind {
    Trace,
    CharPoly,
}

impl fmt::Display for CensusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CensusKind::Trace => write!(f, "trace"),
            CensusKind::CharPoly => write!(f, "charpoly"),
        }
    }
}

/// Histogram of a value over a finite set of matrices. Keys are the value
/// as residue vectors: a single residue for traces, descending monic
/// coefficients for characteristic polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusTable {
    pub kind: CensusKind,
    pub modulus: u64,
    pub counts: BTreeMap<Vec<u64>, u64>,
}

impl CensusTable {
    pub fn distinct_values(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// CSV with a `value,count` header; vector values are space-joined.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,count\n");
        for (value, count) in &self.counts {
            let value: Vec<String> = value.iter().map(u64::to_string).collect();
            out.push_str(&format!("{},{}\n", value.join(" "), count));
        }
        out
    }
}

/// Counts distinct traces or characteristic polynomials over the set.
pub fn value_census(a: &FiniteSet, kind: CensusKind) -> Result<CensusTable, ModPError> {
    if a.is_empty() {
        return Err(ModPError::EmptySet);
    }
    let mut counts: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
    for m in a.elements() {
        let value = match kind {
            CensusKind::Trace => vec![m.trace()],
            CensusKind::CharPoly => m.charpoly(),
        };
        match counts.entry(value) {
            Entry::Vacant(slot) => {
                slot.insert(1);
            }
            Entry::Occupied(mut slot) => *slot.get_mut() += 1,
        }
    }
    Ok(CensusTable { kind, modulus: a.modulus, counts })
}
