use rand::RngCore;

use super::bitvec::{dot_words, words_for, BitVec};
use crate::error::{Error, Result};

/// Dense GF(2) matrix stored row-major, each row padded to whole words.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    row_words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let row_words = words_for(cols);
        BitMatrix {
            rows,
            cols,
            row_words,
            data: vec![0; rows * row_words],
        }
    }

    pub fn random<R: RngCore + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let mut m = BitMatrix::zeros(rows, cols);
        for r in 0..rows {
            let row = BitVec::random(cols, rng);
            m.row_mut(r).copy_from_slice(row.words());
        }
        m
    }

    /// Stacks equal-length vectors as rows.
    pub fn from_rows(rows: &[BitVec]) -> Result<Self> {
        let cols = rows.first().map_or(0, BitVec::len);
        let mut m = BitMatrix::zeros(rows.len(), cols);
        for (r, v) in rows.iter().enumerate() {
            if v.len() != cols {
                return Err(Error::LengthMismatch {
                    left: cols,
                    right: v.len(),
                });
            }
            m.row_mut(r).copy_from_slice(v.words());
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols);
        (self.data[r * self.row_words + c / 64] >> (c % 64)) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, b: bool) {
        assert!(r < self.rows && c < self.cols);
        let w = &mut self.data[r * self.row_words + c / 64];
        let mask = 1u64 << (c % 64);
        if b {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.row_words..(r + 1) * self.row_words]
    }

    fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.row_words..(r + 1) * self.row_words]
    }

    pub fn row(&self, r: usize) -> BitVec {
        BitVec::from_words(self.row_words(r).to_vec(), self.cols)
    }

    /// Matrix-vector product `self * v`.
    pub fn mul_vec(&self, v: &BitVec) -> Result<BitVec> {
        if v.len() != self.cols {
            return Err(Error::LengthMismatch {
                left: self.cols,
                right: v.len(),
            });
        }
        let mut out = BitVec::zeros(self.rows);
        for r in 0..self.rows {
            if dot_words(self.row_words(r), v.words()) {
                out.set(r, true);
            }
        }
        Ok(out)
    }

    /// Product of `self` with a vector given as packed words of length `cols`.
    pub fn mul_words(&self, v: &[u64]) -> BitVec {
        debug_assert_eq!(v.len(), self.row_words);
        let mut out = BitVec::zeros(self.rows);
        for r in 0..self.rows {
            if dot_words(self.row_words(r), v) {
                out.set(r, true);
            }
        }
        out
    }

    /// Row-major bytes, each row packed to `ceil(cols / 8)` bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.rows * self.cols.div_ceil(8));
        for r in 0..self.rows {
            out.extend_from_slice(&self.row(r).to_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], rows: usize, cols: usize) -> Result<Self> {
        let rb = cols.div_ceil(8);
        if bytes.len() != rows * rb {
            return Err(Error::Malformed(format!(
                "{} bytes do not encode a {rows}x{cols} matrix",
                bytes.len()
            )));
        }
        let mut m = BitMatrix::zeros(rows, cols);
        for r in 0..rows {
            let row = BitVec::from_bytes(&bytes[r * rb..(r + 1) * rb], cols)?;
            m.row_mut(r).copy_from_slice(row.words());
        }
        Ok(m)
    }

    /// Transpose using 64x64 block swaps.
    pub fn transpose(&self) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.cols, self.rows);
        let mut block = [0u64; 64];
        for bi in 0..self.rows.div_ceil(64) {
            for bj in 0..self.row_words {
                for (k, slot) in block.iter_mut().enumerate() {
                    let r = bi * 64 + k;
                    *slot = if r < self.rows {
                        self.data[r * self.row_words + bj]
                    } else {
                        0
                    };
                }
                transpose64(&mut block);
                for (k, &w) in block.iter().enumerate() {
                    let r = bj * 64 + k;
                    if r < out.rows {
                        out.data[r * out.row_words + bi] = w;
                    }
                }
            }
        }
        out
    }

    /// Rank by Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for c in 0..self.cols {
            let Some(p) = (rank..m.rows).find(|&r| m.get(r, c)) else {
                continue;
            };
            if p != rank {
                for w in 0..m.row_words {
                    m.data.swap(p * m.row_words + w, rank * m.row_words + w);
                }
            }
            let pivot: Vec<u64> = m.row_words(rank).to_vec();
            for r in 0..m.rows {
                if r != rank && m.get(r, c) {
                    for (a, b) in m.row_mut(r).iter_mut().zip(&pivot) {
                        *a ^= b;
                    }
                }
            }
            rank += 1;
            if rank == m.rows {
                break;
            }
        }
        rank
    }
}

/// In-place transpose of a 64x64 bit block where word `k` is row `k`
/// and bit `c` of a word is column `c`.
fn transpose64(a: &mut [u64; 64]) {
    let mut j = 32;
    let mut m: u64 = 0x0000_0000_FFFF_FFFF;
    while j != 0 {
        let mut k = 0;
        while k < 64 {
            let t = ((a[k] >> j) ^ a[k + j]) & m;
            a[k] ^= t << j;
            a[k + j] ^= t;
            k = (k + j + 1) & !j;
        }
        j >>= 1;
        m ^= m << j;
    }
}

/// Transposes `rows` equal-length vectors into `cols` vectors of length `rows`.
pub fn transpose_bits(rows: &[BitVec]) -> Result<Vec<BitVec>> {
    let t = BitMatrix::from_rows(rows)?.transpose();
    Ok((0..t.rows()).map(|r| t.row(r)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn naive_transpose(m: &BitMatrix) -> BitMatrix {
        let mut t = BitMatrix::zeros(m.cols(), m.rows());
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                t.set(c, r, m.get(r, c));
            }
        }
        t
    }

    /// Rank by brute-force span enumeration, usable for up to ~4 columns.
    fn span_rank(m: &BitMatrix) -> usize {
        let mut span = std::collections::BTreeSet::new();
        span.insert(0u64);
        for r in 0..m.rows() {
            let row = m.row_words(r).first().copied().unwrap_or(0);
            let next: Vec<u64> = span.iter().map(|s| s ^ row).collect();
            span.extend(next);
        }
        span.len().trailing_zeros() as usize
    }

    #[test]
    fn naive_and_block_transpose_agree_on_odd_shapes() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for (r, c) in [(1, 1), (3, 130), (65, 7), (130, 200), (64, 64), (939, 70)] {
            let m = BitMatrix::random(r, c, &mut rng);
            assert_eq!(m.transpose(), naive_transpose(&m), "{r}x{c}");
        }
    }

    #[test]
    fn identity_has_full_rank() {
        let mut m = BitMatrix::zeros(5, 5);
        for i in 0..5 {
            m.set(i, i, true);
        }
        assert_eq!(m.rank(), 5);
    }

    proptest! {
        #[test]
        fn transpose_is_an_involution(r in 1usize..150, c in 1usize..150, seed: u64) {
            let m = BitMatrix::random(r, c, &mut ChaCha20Rng::seed_from_u64(seed));
            prop_assert_eq!(m.transpose().transpose(), m);
        }

        #[test]
        fn rank_matches_span_enumeration(rows in 0usize..8, cols in 1usize..=4, seed: u64) {
            let m = BitMatrix::random(rows, cols, &mut ChaCha20Rng::seed_from_u64(seed));
            prop_assert_eq!(m.rank(), span_rank(&m));
        }

        #[test]
        fn mul_vec_is_linear(r in 1usize..40, c in 1usize..100, seed: u64) {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let m = BitMatrix::random(r, c, &mut rng);
            let a = BitVec::random(c, &mut rng);
            let b = BitVec::random(c, &mut rng);
            let lhs = m.mul_vec(&(&a ^ &b)).unwrap();
            let rhs = &m.mul_vec(&a).unwrap() ^ &m.mul_vec(&b).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn matrix_bytes_round_trip(r in 0usize..20, c in 0usize..90, seed: u64) {
            let m = BitMatrix::random(r, c, &mut ChaCha20Rng::seed_from_u64(seed));
            prop_assert_eq!(BitMatrix::from_bytes(&m.to_bytes(), r, c).unwrap(), m);
        }
    }
}
