use std::fmt;
use std::ops::{BitAnd, BitXor, BitXorAssign};

use rand::{Rng, RngCore};

use crate::error::{Error, Result};

/// Packed bit vector. Bit `i` lives in word `i / 64` at position `i % 64`,
/// which makes the byte serialization little-endian within each byte.
/// Bits past `len` are always zero.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    words: Vec<u64>,
    len: usize,
}

pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            words: vec![0; words_for(len)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = BitVec {
            words: vec![u64::MAX; words_for(len)],
            len,
        };
        v.clear_padding();
        v
    }

    pub fn random<R: RngCore + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut words = vec![0u64; words_for(len)];
        for w in &mut words {
            *w = rng.next_u64();
        }
        let mut v = BitVec { words, len };
        v.clear_padding();
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Builds a vector from raw words, clearing any bits beyond `len`.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.resize(words_for(len), 0);
        let mut v = BitVec { words, len };
        v.clear_padding();
        v
    }

    /// Parses `ceil(len / 8)` packed bytes. Nonzero padding bits are rejected.
    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::Malformed(format!(
                "{} bytes cannot hold exactly {len} bits",
                bytes.len()
            )));
        }
        let mut words = vec![0u64; words_for(len)];
        for (i, chunk) in bytes.chunks(8).enumerate() {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            words[i] = u64::from_le_bytes(buf);
        }
        let v = BitVec { words, len };
        let tail = len % 64;
        if tail != 0 && v.words[v.words.len() - 1] >> tail != 0 {
            return Err(Error::Malformed("nonzero padding bits".into()));
        }
        Ok(v)
    }

    /// Packs into `ceil(len / 8)` bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.len.div_ceil(8));
        for w in &self.words {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out.truncate(self.len.div_ceil(8));
        out
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, b: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if b {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn push(&mut self, b: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, b);
    }

    /// Appends all bits of `other`.
    pub fn extend(&mut self, other: &BitVec) {
        let shift = self.len % 64;
        if shift == 0 {
            self.words.extend_from_slice(&other.words);
        } else {
            for &w in &other.words {
                let last = self.words.len() - 1;
                self.words[last] |= w << shift;
                self.words.push(w >> (64 - shift));
            }
        }
        self.len += other.len;
        self.words.truncate(words_for(self.len));
    }

    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a BitVec>) -> BitVec {
        let mut out = BitVec::zeros(0);
        for p in parts {
            out.extend(p);
        }
        out
    }

    /// Copies bits `start..start + len`.
    pub fn slice(&self, start: usize, len: usize) -> BitVec {
        assert!(start + len <= self.len, "slice out of range");
        let mut out = BitVec::zeros(len);
        let shift = start % 64;
        let base = start / 64;
        for i in 0..out.words.len() {
            let lo = self.words[base + i] >> shift;
            let hi = if shift != 0 && base + i + 1 < self.words.len() {
                self.words[base + i + 1] << (64 - shift)
            } else {
                0
            };
            out.words[i] = lo | hi;
        }
        out.clear_padding();
        out
    }

    /// XOR that reports a length mismatch instead of panicking.
    pub fn checked_xor(&self, other: &BitVec) -> Result<BitVec> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(self ^ other)
    }

    /// XORs `other` into `self` when `cond` holds.
    pub fn xor_if(&mut self, cond: bool, other: &BitVec) {
        if cond {
            *self ^= other;
        }
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "dot of unequal lengths");
        dot_words(&self.words, &other.words)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    fn clear_padding(&mut self) {
        let tail = self.len % 64;
        if tail != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
    }
}

pub(crate) fn dot_words(a: &[u64], b: &[u64]) -> bool {
    a.iter()
        .zip(b)
        .fold(0u32, |acc, (x, y)| acc ^ (x & y).count_ones())
        & 1
        == 1
}

impl BitXorAssign<&BitVec> for BitVec {
    /// Panics on unequal lengths; use [`BitVec::checked_xor`] for untrusted input.
    fn bitxor_assign(&mut self, rhs: &BitVec) {
        assert_eq!(self.len, rhs.len, "xor of unequal lengths");
        for (a, b) in self.words.iter_mut().zip(&rhs.words) {
            *a ^= b;
        }
    }
}

impl BitXor for &BitVec {
    type Output = BitVec;
    fn bitxor(self, rhs: &BitVec) -> BitVec {
        let mut out = self.clone();
        out ^= rhs;
        out
    }
}

impl BitAnd for &BitVec {
    type Output = BitVec;
    fn bitand(self, rhs: &BitVec) -> BitVec {
        assert_eq!(self.len, rhs.len, "and of unequal lengths");
        BitVec {
            words: self
                .words
                .iter()
                .zip(&rhs.words)
                .map(|(a, b)| a & b)
                .collect(),
            len: self.len,
        }
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec[{}](", self.len)?;
        for b in self.iter().take(128) {
            f.write_str(if b { "1" } else { "0" })?;
        }
        if self.len > 128 {
            f.write_str("...")?;
        }
        f.write_str(")")
    }
}

impl FromIterator<bool> for BitVec {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut v = BitVec::zeros(0);
        for b in iter {
            v.push(b);
        }
        v
    }
}

/// Uniform random bit.
pub fn random_bit<R: Rng + ?Sized>(rng: &mut R) -> bool {
    rng.random()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_bits(max: usize) -> impl Strategy<Value = Vec<bool>> {
        proptest::collection::vec(any::<bool>(), 0..max)
    }

    #[test]
    fn packing_is_little_endian_within_bytes() {
        let v = BitVec::from_bools(&[true, false, false, false, false, false, false, false, true]);
        assert_eq!(v.to_bytes(), vec![0x01, 0x01]);
        let v = BitVec::from_bools(&[false, true, true]);
        assert_eq!(v.to_bytes(), vec![0b110]);
    }

    #[test]
    fn nonzero_padding_is_rejected() {
        assert!(BitVec::from_bytes(&[0b1000], 3).is_err());
        assert!(BitVec::from_bytes(&[0b100], 3).is_ok());
        assert!(BitVec::from_bytes(&[0, 0], 3).is_err());
    }

    #[test]
    fn unequal_xor_is_an_error() {
        let a = BitVec::zeros(3);
        let b = BitVec::zeros(4);
        assert!(matches!(
            a.checked_xor(&b),
            Err(Error::LengthMismatch { left: 3, right: 4 })
        ));
    }

    #[test]
    fn ones_has_zero_padding() {
        let v = BitVec::ones(70);
        assert_eq!(v.count_ones(), 70);
        assert_eq!(v.words()[1], (1 << 6) - 1);
    }

    proptest! {
        #[test]
        fn byte_round_trip(bits in arb_bits(300)) {
            let v = BitVec::from_bools(&bits);
            let back = BitVec::from_bytes(&v.to_bytes(), bits.len()).unwrap();
            prop_assert_eq!(back.iter().collect::<Vec<_>>(), bits);
        }

        #[test]
        fn xor_matches_bitwise(pair in (0usize..200).prop_flat_map(|n| (
            proptest::collection::vec(any::<bool>(), n),
            proptest::collection::vec(any::<bool>(), n)))) {
            let (a, b) = pair;
            let x = &BitVec::from_bools(&a) ^ &BitVec::from_bools(&b);
            let expect: Vec<bool> = a.iter().zip(&b).map(|(p, q)| p ^ q).collect();
            prop_assert_eq!(x.iter().collect::<Vec<_>>(), expect);
        }

        #[test]
        fn dot_matches_bitwise(pair in (0usize..200).prop_flat_map(|n| (
            proptest::collection::vec(any::<bool>(), n),
            proptest::collection::vec(any::<bool>(), n)))) {
            let (a, b) = pair;
            let expect = a.iter().zip(&b).filter(|(p, q)| **p && **q).count() % 2 == 1;
            prop_assert_eq!(BitVec::from_bools(&a).dot(&BitVec::from_bools(&b)), expect);
        }

        #[test]
        fn extend_and_slice_agree(a in arb_bits(200), b in arb_bits(200)) {
            let mut v = BitVec::from_bools(&a);
            v.extend(&BitVec::from_bools(&b));
            let all: Vec<bool> = a.iter().chain(&b).copied().collect();
            prop_assert_eq!(v.iter().collect::<Vec<_>>(), all.clone());
            prop_assert_eq!(v.slice(a.len(), b.len()).iter().collect::<Vec<_>>(), b);
            prop_assert_eq!(v.slice(0, a.len()).iter().collect::<Vec<_>>(), a);
            // Padding of the concatenation stays clear.
            prop_assert_eq!(v.count_ones(), all.iter().filter(|x| **x).count());
        }
    }
}
