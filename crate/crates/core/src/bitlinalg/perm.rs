use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// A permutation of `0..n`, stored as its image list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation(Vec<u32>);

impl Permutation {
    /// Uniform permutation (Fisher-Yates).
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut p: Vec<u32> = (0..n as u32).collect();
        p.shuffle(rng);
        Permutation(p)
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n as u32).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i] as usize
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// Returns `items` reordered so that position `i` holds `items[self(i)]`.
    pub fn permute<T: Clone>(&self, items: &[T]) -> Vec<T> {
        self.0.iter().map(|&j| items[j as usize].clone()).collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.0.iter().flat_map(|v| v.to_be_bytes()).collect()
    }

    /// Decodes and validates a permutation of exactly `n` elements.
    pub fn from_bytes(bytes: &[u8], n: usize) -> Result<Self> {
        let p = decode_u32s(bytes, n)?;
        let mut seen = vec![false; n];
        for &v in &p {
            let v = v as usize;
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(Error::Protocol("received list is not a permutation".into()));
            }
        }
        Ok(Permutation(p))
    }
}

/// A fixed-point-free involution on `0..n`: every index is matched with a partner.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pairing(Vec<u32>);

impl Pairing {
    /// Uniform perfect matching on an even number of indices.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if !n.is_multiple_of(2) {
            return Err(Error::Usage(format!("cannot pair an odd count {n}")));
        }
        let order = Permutation::random(n, rng);
        let mut partner = vec![0u32; n];
        for pair in order.as_slice().chunks(2) {
            partner[pair[0] as usize] = pair[1];
            partner[pair[1] as usize] = pair[0];
        }
        Ok(Pairing(partner))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn partner(&self, i: usize) -> usize {
        self.0[i] as usize
    }

    /// Indices `i` with `i < partner(i)`, ascending. Exactly one per pair.
    pub fn leaders(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| i < self.partner(i)).collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.0.iter().flat_map(|v| v.to_be_bytes()).collect()
    }

    /// Decodes and validates an involution without fixed points.
    pub fn from_bytes(bytes: &[u8], n: usize) -> Result<Self> {
        let p = decode_u32s(bytes, n)?;
        for (i, &j) in p.iter().enumerate() {
            let j = j as usize;
            if j >= n || j == i || p[j] as usize != i {
                return Err(Error::Protocol("received list is not a pairing".into()));
            }
        }
        Ok(Pairing(p))
    }
}

fn decode_u32s(bytes: &[u8], n: usize) -> Result<Vec<u32>> {
    if bytes.len() != 4 * n {
        return Err(Error::Malformed(format!(
            "expected {} bytes for {n} indices, got {}",
            4 * n,
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| u32::from_be_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn permutation_first_element_is_uniform() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let n = 5;
        let trials = 50_000;
        let mut counts = vec![0usize; n];
        for _ in 0..trials {
            counts[Permutation::random(n, &mut rng).apply(0)] += 1;
        }
        let p = 1.0 / n as f64;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - trials as f64 * p).abs() < 4.0 * sigma);
        }
    }

    #[test]
    fn pairing_rejects_fixed_points_and_non_involutions() {
        let enc = |v: &[u32]| v.iter().flat_map(|x| x.to_be_bytes()).collect::<Vec<_>>();
        assert!(Pairing::from_bytes(&enc(&[1, 0, 3, 2]), 4).is_ok());
        assert!(Pairing::from_bytes(&enc(&[0, 1]), 2).is_err());
        assert!(Pairing::from_bytes(&enc(&[1, 2, 0]), 3).is_err());
        assert!(Pairing::random(3, &mut ChaCha20Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn permutation_rejects_duplicates() {
        let enc = |v: &[u32]| v.iter().flat_map(|x| x.to_be_bytes()).collect::<Vec<_>>();
        assert!(Permutation::from_bytes(&enc(&[0, 0]), 2).is_err());
        assert!(Permutation::from_bytes(&enc(&[1, 0]), 2).is_ok());
        assert!(Permutation::from_bytes(&enc(&[2, 0]), 2).is_err());
    }

    proptest! {
        #[test]
        fn random_pairing_is_a_valid_matching(half in 1usize..100, seed: u64) {
            let p = Pairing::random(2 * half, &mut ChaCha20Rng::seed_from_u64(seed)).unwrap();
            prop_assert_eq!(p.leaders().len(), half);
            let round = Pairing::from_bytes(&p.to_bytes(), 2 * half).unwrap();
            prop_assert_eq!(round, p);
        }

        #[test]
        fn random_permutation_round_trips(n in 0usize..200, seed: u64) {
            let p = Permutation::random(n, &mut ChaCha20Rng::seed_from_u64(seed));
            prop_assert_eq!(Permutation::from_bytes(&p.to_bytes(), n).unwrap(), p);
        }
    }
}
