//! Hash-based primitives built on SHA-256 with domain-separated inputs. Every
//! oracle call is counted per domain on the calling thread.

use std::cell::Cell;

use sha2::{Digest as _, Sha256};

use crate::bitlinalg::BitVec;

/// Raw SHA-256 output.
pub type Digest = [u8; 32];

/// Domain separation tags. Each call to the oracle is prefixed by one of these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    EqCommit,
    LaotTransfer,
    LaotRecommit,
    LaandU,
    Rot,
    Prg,
    AccLeaf,
    AccChain,
    SeedOt,
    DeltaCommit,
    Store,
}

impl Domain {
    pub const ALL: [Domain; 11] = [
        Domain::EqCommit,
        Domain::LaotTransfer,
        Domain::LaotRecommit,
        Domain::LaandU,
        Domain::Rot,
        Domain::Prg,
        Domain::AccLeaf,
        Domain::AccChain,
        Domain::SeedOt,
        Domain::DeltaCommit,
        Domain::Store,
    ];

    pub fn tag(self) -> &'static [u8] {
        match self {
            Domain::EqCommit => b"tinyot/eq-commit",
            Domain::LaotTransfer => b"tinyot/laot-transfer",
            Domain::LaotRecommit => b"tinyot/laot-recommit",
            Domain::LaandU => b"tinyot/laand-u",
            Domain::Rot => b"tinyot/rot",
            Domain::Prg => b"tinyot/prg",
            Domain::AccLeaf => b"tinyot/acc-leaf",
            Domain::AccChain => b"tinyot/acc-chain",
            Domain::SeedOt => b"tinyot/seed-ot",
            Domain::DeltaCommit => b"tinyot/delta-commit",
            Domain::Store => b"tinyot/store",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

thread_local! {
    static CALLS: [Cell<u64>; Domain::ALL.len()] = Default::default();
}

/// Snapshot of per-domain oracle call counts on the current thread.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HashCounts([u64; Domain::ALL.len()]);

impl HashCounts {
    pub fn now() -> Self {
        CALLS.with(|c| HashCounts(std::array::from_fn(|i| c[i].get())))
    }

    pub fn get(&self, d: Domain) -> u64 {
        self.0[d.index()]
    }

    /// Counts accumulated since `earlier`.
    pub fn since(&self, earlier: &HashCounts) -> HashCounts {
        HashCounts(std::array::from_fn(|i| self.0[i] - earlier.0[i]))
    }

    pub fn add(&self, other: &HashCounts) -> HashCounts {
        HashCounts(std::array::from_fn(|i| self.0[i] + other.0[i]))
    }
}

/// `H(domain, parts)`. Each part is length-prefixed so distinct splits never collide.
pub fn hash_parts(domain: Domain, parts: &[&[u8]]) -> Digest {
    CALLS.with(|c| {
        let slot = &c[domain.index()];
        slot.set(slot.get() + 1);
    });
    let tag = domain.tag();
    let mut h = Sha256::new();
    h.update([tag.len() as u8]);
    h.update(tag);
    for p in parts {
        h.update((p.len() as u64).to_be_bytes());
        h.update(p);
    }
    h.finalize().into()
}

pub fn hash(domain: Domain, input: &[u8]) -> Digest {
    hash_parts(domain, &[input])
}

/// Oracle output truncated (or PRG-stretched) to `kappa` bits.
pub fn h(domain: Domain, kappa: usize, parts: &[&[u8]]) -> BitVec {
    let d = hash_parts(domain, parts);
    fit(&d, kappa)
}

fn fit(d: &Digest, bits: usize) -> BitVec {
    if bits <= 256 {
        truncate(d, bits)
    } else {
        expand(d, bits)
    }
}

fn truncate(d: &Digest, bits: usize) -> BitVec {
    let mut bytes = d[..bits.div_ceil(8)].to_vec();
    if !bits.is_multiple_of(8) {
        let last = bytes.len() - 1;
        bytes[last] &= (1u8 << (bits % 8)) - 1;
    }
    BitVec::from_bytes(&bytes, bits).expect("padding cleared")
}

/// Counter-mode PRG: block `i` is `H(seed || i)`.
pub fn expand(seed: &[u8], out_bits: usize) -> BitVec {
    let blocks = out_bits.div_ceil(256);
    let mut bytes = Vec::with_capacity(blocks * 32);
    for i in 0..blocks as u64 {
        bytes.extend_from_slice(&hash_parts(Domain::Prg, &[seed, &i.to_be_bytes()]));
    }
    bytes.truncate(out_bits.div_ceil(8));
    if !out_bits.is_multiple_of(8) {
        let last = bytes.len() - 1;
        bytes[last] &= (1u8 << (out_bits % 8)) - 1;
    }
    BitVec::from_bytes(&bytes, out_bits).expect("padding cleared")
}

/// A pad of `len` bits keyed by `key`: the oracle output itself when
/// `len == kappa`, otherwise the PRG stretched from it.
pub fn pad(domain: Domain, kappa: usize, key: &[&[u8]], len: usize) -> BitVec {
    let k = h(domain, kappa, key);
    if len == kappa {
        k
    } else {
        expand(&k.to_bytes(), len)
    }
}

/// `pad(key) XOR message`.
pub fn mask(domain: Domain, kappa: usize, key: &[&[u8]], message: &BitVec) -> BitVec {
    let mut out = pad(domain, kappa, key, message.len());
    out ^= message;
    out
}

/// Running hash chain `N <- G(N, H(M))` over revealed MACs, starting at `0^kappa`.
#[derive(Clone, Debug)]
pub struct MacAccumulator {
    state: BitVec,
    absorbed: u64,
}

impl MacAccumulator {
    pub fn new(kappa: usize) -> Self {
        MacAccumulator {
            state: BitVec::zeros(kappa),
            absorbed: 0,
        }
    }

    pub fn absorb(&mut self, mac: &BitVec) {
        let kappa = self.state.len();
        let leaf = h(Domain::AccLeaf, kappa, &[&mac.to_bytes()]);
        self.state = h(
            Domain::AccChain,
            kappa,
            &[&self.state.to_bytes(), &leaf.to_bytes()],
        );
        self.absorbed += 1;
    }

    pub fn state(&self) -> &BitVec {
        &self.state
    }

    pub fn absorbed(&self) -> u64 {
        self.absorbed
    }

    pub fn reset(&mut self) {
        self.state = BitVec::zeros(self.state.len());
        self.absorbed = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn sha256_backend_matches_known_vector() {
        let d: Digest = Sha256::digest(b"abc").into();
        assert_eq!(
            d[..4],
            [0xba, 0x78, 0x16, 0xbf],
            "SHA-256(\"abc\") prefix"
        );
    }

    #[test]
    fn domains_separate_outputs() {
        let x = b"same input";
        let outs: std::collections::HashSet<Digest> =
            Domain::ALL.iter().map(|&d| hash(d, x)).collect();
        assert_eq!(outs.len(), Domain::ALL.len());
    }

    #[test]
    fn part_boundaries_matter() {
        assert_ne!(
            hash_parts(Domain::EqCommit, &[b"ab", b"c"]),
            hash_parts(Domain::EqCommit, &[b"a", b"bc"])
        );
    }

    #[test]
    fn single_bit_flip_changes_half_the_digest() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let trials = 10_000;
        let mut total = 0u64;
        for _ in 0..trials {
            let mut input = [0u8; 32];
            rng.fill(&mut input);
            let a = hash(Domain::EqCommit, &input);
            let bit = rng.random_range(0..256);
            input[bit / 8] ^= 1 << (bit % 8);
            let b = hash(Domain::EqCommit, &input);
            total += a
                .iter()
                .zip(&b)
                .map(|(x, y)| (x ^ y).count_ones() as u64)
                .sum::<u64>();
        }
        let mean = total as f64 / trials as f64;
        // Binomial(256, 1/2) averaged over 10^4 draws: sd of the mean is 0.08.
        assert!((mean - 128.0).abs() < 0.5, "mean flipped bits {mean}");
    }

    #[test]
    fn prg_output_is_balanced() {
        let n = 1_000_000;
        let out = expand(b"seed", n);
        let ones = out.count_ones() as f64;
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((ones - n as f64 / 2.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn prg_prefixes_are_consistent() {
        let long = expand(b"k", 1000);
        let short = expand(b"k", 300);
        assert_eq!(long.slice(0, 300), short);
    }

    #[test]
    fn outputs_have_requested_length() {
        for kappa in [8, 16, 128, 256, 300] {
            assert_eq!(h(Domain::Rot, kappa, &[b"x"]).len(), kappa);
        }
    }

    #[test]
    fn mask_is_an_involution() {
        let m = BitVec::random(517, &mut ChaCha20Rng::seed_from_u64(2));
        let once = mask(Domain::LaotTransfer, 128, &[b"key"], &m);
        assert_ne!(once, m);
        assert_eq!(mask(Domain::LaotTransfer, 128, &[b"key"], &once), m);
    }

    #[test]
    fn counters_track_calls_per_domain() {
        let before = HashCounts::now();
        hash(Domain::LaandU, b"a");
        hash(Domain::LaandU, b"b");
        expand(b"s", 600);
        let diff = HashCounts::now().since(&before);
        assert_eq!(diff.get(Domain::LaandU), 2);
        assert_eq!(diff.get(Domain::Prg), 3);
        assert_eq!(diff.get(Domain::Rot), 0);
    }

    #[test]
    fn accumulator_starts_at_zero_and_depends_on_order() {
        let mut a = MacAccumulator::new(128);
        assert!(a.state().is_zero());
        let m1 = BitVec::ones(128);
        let m2 = BitVec::zeros(128);
        let mut b = a.clone();
        a.absorb(&m1);
        a.absorb(&m2);
        b.absorb(&m2);
        b.absorb(&m1);
        assert_ne!(a.state(), b.state());
        assert_eq!(a.absorbed(), 2);
        a.reset();
        assert!(a.state().is_zero());
    }
}
