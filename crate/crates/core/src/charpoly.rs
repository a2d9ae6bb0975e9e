//! Characteristic polynomials, computed exactly.
//!
//! Two routes, both over the polynomial ring `T[X]`:
//!
//! * dimension ≤ 4: Leibniz expansion of `det(XI − A)` as a signed sum over
//!   permutations — division-free, so it also works for integer scalars;
//! * dimension ≥ 5: fraction-free Gaussian elimination (Bareiss) on the
//!   polynomial matrix, where every division is exact by construction.
//!
//! The result is always monic of degree `d`, with the coefficient of
//! `X^{d-1}` equal to `−trace`.

use std::fmt;

use itertools::Itertools;

use crate::matrix::SquareMatrix;
use crate::scalar::{FieldScalar, Scalar};

/// Monic characteristic polynomial; `coeffs[0] = 1` down to the constant
/// term, so the vector has length `dim + 1`. Used directly as a set key when
/// counting distinct characteristic polynomials.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CharPoly<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> CharPoly<T> {
    /// Degree of the polynomial, equal to the matrix dimension.
    pub fn dim(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficients from the leading `1` down to the constant term.
    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }
}

impl<T: fmt::Display> fmt::Debug for CharPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.coeffs.iter().map(|c| c.to_string()).join(", "))
    }
}

impl<T: fmt::Display> fmt::Display for CharPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coeffs.iter().map(|c| c.to_string()).join(" "))
    }
}

/// Characteristic polynomial of `a`, dispatching on dimension as described in
/// the module docs.
pub fn charpoly<T: FieldScalar>(a: &SquareMatrix<T>) -> CharPoly<T> {
    if a.dim() <= 4 {
        charpoly_division_free(a)
    } else {
        charpoly_bareiss(a)
    }
}

/// Division-free Leibniz expansion of `det(XI − A)`. Cost grows as `d!`, so
/// this is only used for small dimensions, but it places no divisibility
/// demands on the scalar and therefore also serves integer matrices.
pub fn charpoly_division_free<T: Scalar>(a: &SquareMatrix<T>) -> CharPoly<T> {
    let d = a.dim();
    let entry_polys: Vec<Poly<T>> = char_matrix_entries(a);
    let mut acc = Poly::zero();
    for perm in (0..d).permutations(d) {
        let mut term = Poly::constant(T::one());
        for (i, &j) in perm.iter().enumerate() {
            term = term.mul(&entry_polys[i * d + j]);
            if term.is_zero() {
                break;
            }
        }
        if permutation_parity(&perm) {
            acc = acc.sub(&term);
        } else {
            acc = acc.add(&term);
        }
    }
    finish(acc, d)
}

/// Fraction-free elimination on the polynomial matrix `XI − A`. Bareiss's
/// identity guarantees each interior division is exact, so the computation
/// stays in `T[X]` with no coefficient blowup beyond the minors themselves.
fn charpoly_bareiss<T: FieldScalar>(a: &SquareMatrix<T>) -> CharPoly<T> {
    let d = a.dim();
    let mut m: Vec<Poly<T>> = char_matrix_entries(a);
    let mut sign_negative = false;
    let mut prev = Poly::constant(T::one());

    for k in 0..d - 1 {
        if m[k * d + k].is_zero() {
            let pivot_row = (k + 1..d)
                .find(|&r| !m[r * d + k].is_zero())
                .expect("det(XI - A) is monic of full degree, a zero column cannot occur");
            for j in 0..d {
                m.swap(k * d + j, pivot_row * d + j);
            }
            sign_negative = !sign_negative;
        }
        for i in k + 1..d {
            for j in k + 1..d {
                let num = m[k * d + k].mul(&m[i * d + j]).sub(&m[i * d + k].mul(&m[k * d + j]));
                m[i * d + j] = num.exact_div(&prev);
            }
        }
        prev = m[k * d + k].clone();
    }

    let mut det = m[(d - 1) * d + (d - 1)].clone();
    if sign_negative {
        det = det.neg();
    }
    finish(det, d)
}

/// Entries of `XI − A` as polynomials, row-major.
fn char_matrix_entries<T: Scalar>(a: &SquareMatrix<T>) -> Vec<Poly<T>> {
    let d = a.dim();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let neg = -a.entry(i, j).clone();
            if i == j {
                out.push(Poly::from_ascending(vec![neg, T::one()]));
            } else {
                out.push(Poly::constant(neg));
            }
        }
    }
    out
}

fn finish<T: Scalar>(det: Poly<T>, d: usize) -> CharPoly<T> {
    let mut coeffs = det.into_descending(d);
    assert!(coeffs[0].is_one(), "characteristic polynomial must be monic");
    coeffs.shrink_to_fit();
    CharPoly { coeffs }
}

/// True for odd permutations.
fn permutation_parity(perm: &[usize]) -> bool {
    let mut inversions = 0usize;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    inversions % 2 == 1
}

/// Dense polynomial with ascending coefficients and no trailing zeros; the
/// zero polynomial is the empty vector. Internal to this module — callers
/// only ever see finished [`CharPoly`] values.
#[derive(Clone, Debug, PartialEq)]
struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Poly<T> {
    fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    fn constant(c: T) -> Self {
        Poly { coeffs: vec![c] }.normalized()
    }

    fn from_ascending(coeffs: Vec<T>) -> Self {
        Poly { coeffs }.normalized()
    }

    fn normalized(mut self) -> Self {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        self
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn add(&self, rhs: &Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let a = self.coeffs.get(k).cloned().unwrap_or_else(T::zero);
            let b = rhs.coeffs.get(k).cloned().unwrap_or_else(T::zero);
            out.push(a + b);
        }
        Poly { coeffs: out }.normalized()
    }

    fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.clone().neg())
    }

    fn neg(self) -> Self {
        Poly { coeffs: self.coeffs.into_iter().map(|c| -c).collect() }
    }

    fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly { coeffs: out }.normalized()
    }

    /// Coefficients from degree `deg` down to the constant term, padding with
    /// zeros if the polynomial is sparser than `deg`.
    fn into_descending(self, deg: usize) -> Vec<T> {
        let mut asc = self.coeffs;
        assert!(asc.len() <= deg + 1, "degree exceeds expected bound");
        asc.resize(deg + 1, T::zero());
        asc.reverse();
        asc
    }
}

impl<T: FieldScalar> Poly<T> {
    /// Division known to be exact; panics if a remainder survives, which
    /// would mean the fraction-free invariant was broken.
    fn exact_div(&self, divisor: &Self) -> Self {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        if self.is_zero() {
            return Self::zero();
        }
        let dd = divisor.degree().unwrap();
        let lead = divisor.coeffs[dd].clone();
        let mut rem = self.clone();
        let mut quot = vec![T::zero(); self.coeffs.len() - dd];
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let shift = rd - dd;
            let c = rem.coeffs[rd].clone() / lead.clone();
            for (j, b) in divisor.coeffs.iter().enumerate() {
                rem.coeffs[shift + j] = rem.coeffs[shift + j].clone() - c.clone() * b.clone();
            }
            rem = rem.normalized();
            quot[shift] = c;
        }
        assert!(rem.is_zero(), "polynomial division left a remainder");
        Poly { coeffs: quot }.normalized()
    }
}
