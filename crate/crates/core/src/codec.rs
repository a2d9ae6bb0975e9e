//! Canonical byte encoding for rational matrices.
//!
//! The encoding is the deduplication key for every set of matrices the crate
//! builds, so it must be injective: two matrices get the same bytes exactly
//! when they are equal. That follows from encoding the already-normalized
//! scalar form (lowest terms, positive denominator) with explicit signs and
//! length prefixes, and rejecting any non-minimal representation on decode.
//!
//! Layout, all integers big-endian:
//!
//! ```text
//! u32 dim
//! then per entry, row-major:
//!   u8  numerator sign: 0 = zero, 1 = positive, 2 = negative
//!   u32 numerator magnitude length (0 when zero), then that many bytes
//!   u32 denominator length, then that many bytes (denominator ≥ 1)
//! ```

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};
use thiserror::Error;

use crate::matrix::SquareMatrix;
use crate::{Rational, RationalMatrix};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("key ends before the declared content")]
    Truncated,
    #[error("key has {0} trailing bytes after the last entry")]
    TrailingBytes(usize),
    #[error("invalid sign byte {0}")]
    BadSign(u8),
    #[error("magnitude has a leading zero byte")]
    LeadingZero,
    #[error("zero numerator must have empty magnitude")]
    ZeroWithMagnitude,
    #[error("denominator must be at least 1")]
    BadDenominator,
    #[error("entry is not in lowest terms")]
    NotReduced,
    #[error("dimension {0} is not valid")]
    BadDimension(u32),
}

/// Canonical encoding of one rational matrix; ordering and hashing are plain
/// byte ordering, which makes per-level output deterministic after a sort.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(Box<[u8]>);

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.0.len() * 2);
        for b in self.0.iter() {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }

    pub fn from_hex(hex: &str) -> Result<Self, CodecError> {
        if !hex.len().is_multiple_of(2) {
            return Err(CodecError::Truncated);
        }
        let mut bytes = Vec::with_capacity(hex.len() / 2);
        for chunk in hex.as_bytes().chunks(2) {
            let s = std::str::from_utf8(chunk).map_err(|_| CodecError::Truncated)?;
            bytes.push(u8::from_str_radix(s, 16).map_err(|_| CodecError::Truncated)?);
        }
        Ok(CanonicalKey(bytes.into_boxed_slice()))
    }
}

impl std::fmt::Debug for CanonicalKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CanonicalKey({})", self.to_hex())
    }
}

/// Encodes a matrix to its canonical key.
pub fn canonical_key(m: &RationalMatrix) -> CanonicalKey {
    let mut out = Vec::with_capacity(4 + m.dim() * m.dim() * 12);
    out.extend_from_slice(&(m.dim() as u32).to_be_bytes());
    for entry in m.entries() {
        push_rational(&mut out, entry);
    }
    CanonicalKey(out.into_boxed_slice())
}

fn push_rational(out: &mut Vec<u8>, value: &Rational) {
    let numer = value.numer();
    match numer.sign() {
        Sign::NoSign => {
            out.push(0);
            out.extend_from_slice(&0u32.to_be_bytes());
        }
        Sign::Plus => {
            out.push(1);
            push_magnitude(out, numer.magnitude());
        }
        Sign::Minus => {
            out.push(2);
            push_magnitude(out, numer.magnitude());
        }
    }
    push_magnitude(out, value.denom().magnitude());
}

fn push_magnitude(out: &mut Vec<u8>, magnitude: &BigUint) {
    let bytes = magnitude.to_bytes_be();
    out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
    out.extend_from_slice(&bytes);
}

/// Decodes a canonical key back to the matrix it encodes. Every byte is
/// validated, so corrupted or non-canonical keys are rejected rather than
/// silently accepted as some other matrix.
pub fn decode_key(key: &CanonicalKey) -> Result<RationalMatrix, CodecError> {
    let bytes = key.as_bytes();
    let mut cursor = Cursor { bytes, pos: 0 };
    let dim = cursor.take_u32()?;
    if dim == 0 || dim > 1 << 16 {
        return Err(CodecError::BadDimension(dim));
    }
    let dim = dim as usize;
    let mut entries = Vec::with_capacity(dim * dim);
    for _ in 0..dim * dim {
        entries.push(read_rational(&mut cursor)?);
    }
    if cursor.pos != bytes.len() {
        return Err(CodecError::TrailingBytes(bytes.len() - cursor.pos));
    }
    SquareMatrix::new(dim, entries).map_err(|_| CodecError::BadDimension(dim as u32))
}

fn read_rational(cursor: &mut Cursor<'_>) -> Result<Rational, CodecError> {
    let sign = cursor.take_u8()?;
    let numer_mag = read_magnitude(cursor)?;
    let numer = match sign {
        0 => {
            if !numer_mag.is_zero() {
                return Err(CodecError::ZeroWithMagnitude);
            }
            BigInt::zero()
        }
        1 => BigInt::from_biguint(Sign::Plus, numer_mag),
        2 => BigInt::from_biguint(Sign::Minus, numer_mag),
        other => return Err(CodecError::BadSign(other)),
    };
    let denom_mag = read_magnitude(cursor)?;
    if denom_mag.is_zero() {
        return Err(CodecError::BadDenominator);
    }
    if sign == 0 {
        if !denom_mag.is_one() {
            return Err(CodecError::NotReduced);
        }
        return Ok(Rational::zero());
    }
    if !num_integer::Integer::gcd(&numer_mag_of(&numer), &denom_mag).is_one() {
        return Err(CodecError::NotReduced);
    }
    Ok(Rational::new_raw(numer, BigInt::from_biguint(Sign::Plus, denom_mag)))
}

fn numer_mag_of(n: &BigInt) -> BigUint {
    n.magnitude().clone()
}

fn read_magnitude(cursor: &mut Cursor<'_>) -> Result<BigUint, CodecError> {
    let len = cursor.take_u32()? as usize;
    let bytes = cursor.take(len)?;
    if len > 0 && bytes[0] == 0 {
        return Err(CodecError::LeadingZero);
    }
    Ok(BigUint::from_bytes_be(bytes))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        if self.pos + n > self.bytes.len() {
            return Err(CodecError::Truncated);
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn take_u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    fn take_u32(&mut self) -> Result<u32, CodecError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn roundtrip_simple_matrices() {
        let mats = [
            RationalMatrix::identity(2),
            RationalMatrix::from_rows(vec![
                vec![rat(0, 1), rat(-1, 1)],
                vec![rat(1, 1), rat(0, 1)],
            ])
            .unwrap(),
            RationalMatrix::from_rows(vec![
                vec![rat(2, 1), rat(-7, 3)],
                vec![rat(1, 2), rat(0, 1)],
            ])
            .unwrap(),
        ];
        for m in &mats {
            let key = canonical_key(m);
            assert_eq!(&decode_key(&key).unwrap(), m);
        }
    }

    #[test]
    fn equal_values_share_a_key() {
        let a = RationalMatrix::from_rows(vec![vec![Rational::new(2.into(), 4.into())]]).unwrap();
        let b = RationalMatrix::from_rows(vec![vec![rat(1, 2)]]).unwrap();
        assert_eq!(canonical_key(&a), canonical_key(&b));
    }

    #[test]
    fn distinct_matrices_get_distinct_keys() {
        let id = RationalMatrix::identity(2);
        let neg = RationalMatrix::from_rows(vec![
            vec![rat(-1, 1), rat(0, 1)],
            vec![rat(0, 1), rat(-1, 1)],
        ])
        .unwrap();
        assert_ne!(canonical_key(&id), canonical_key(&neg));
        assert_ne!(canonical_key(&id), canonical_key(&RationalMatrix::identity(3)));
    }

    #[test]
    fn corrupted_keys_are_rejected() {
        let key = canonical_key(&RationalMatrix::identity(2));
        let mut truncated = key.as_bytes().to_vec();
        truncated.pop();
        assert!(decode_key(&CanonicalKey(truncated.into_boxed_slice())).is_err());

        let mut trailing = key.as_bytes().to_vec();
        trailing.push(7);
        assert_eq!(
            decode_key(&CanonicalKey(trailing.into_boxed_slice())),
            Err(CodecError::TrailingBytes(1))
        );

        let mut bad_sign = key.as_bytes().to_vec();
        bad_sign[4] = 9;
        assert_eq!(
            decode_key(&CanonicalKey(bad_sign.into_boxed_slice())),
            Err(CodecError::BadSign(9))
        );
    }

    #[test]
    fn non_reduced_entries_are_rejected() {
        // Hand-build a key claiming 2/4 for a 1x1 matrix.
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&1u32.to_be_bytes());
        bytes.push(1);
        bytes.extend_from_slice(&1u32.to_be_bytes());
        bytes.push(2);
        bytes.extend_from_slice(&1u32.to_be_bytes());
        bytes.push(4);
        assert_eq!(
            decode_key(&CanonicalKey(bytes.into_boxed_slice())),
            Err(CodecError::NotReduced)
        );
    }

    #[test]
    fn hex_roundtrip() {
        let key = canonical_key(&RationalMatrix::identity(3));
        let hex = key.to_hex();
        assert_eq!(CanonicalKey::from_hex(&hex).unwrap(), key);
    }

    proptest! {
        #[test]
        fn roundtrip_random_rational_matrices(
            dim in 1usize..4,
            nums in proptest::collection::vec(-1000i64..1000, 16),
            dens in proptest::collection::vec(1i64..200, 16),
        ) {
            let entries: Vec<Rational> = (0..dim * dim)
                .map(|k| Rational::new(nums[k].into(), dens[k].into()))
                .collect();
            let m = SquareMatrix::new(dim, entries).unwrap();
            let key = canonical_key(&m);
            prop_assert_eq!(decode_key(&key).unwrap(), m);
        }
    }
}
