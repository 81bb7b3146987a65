//! Information-theoretic MACs on single bits.
//!
//! For a bit `x` owned by one party, that party holds `(x, M_x)` and the
//! other holds `K_x` together with its global key `Delta`, such that
//! `M_x = K_x ^ x * Delta`. Both halves are XOR-homomorphic.

use std::ops::BitXor;

use rand::RngCore;

use crate::bitlinalg::BitVec;
use crate::error::{Abort, Result};
use crate::ro::MacAccumulator;
use crate::transport::{Channel, MsgType};
use crate::wire::{recv_bits, send_bits};

/// The MAC holder's half of an authenticated bit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MacBit {
    pub bit: bool,
    pub mac: BitVec,
}

/// The key holder's half of an authenticated bit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyBit {
    pub key: BitVec,
}

/// A party's global MAC key `Delta`, used for all bits the peer owns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalKey(pub BitVec);

impl GlobalKey {
    pub fn random<R: RngCore + ?Sized>(kappa: usize, rng: &mut R) -> Self {
        GlobalKey(BitVec::random(kappa, rng))
    }

    pub fn kappa(&self) -> usize {
        self.0.len()
    }

    pub fn bits(&self) -> &BitVec {
        &self.0
    }
}

impl MacBit {
    /// Authenticated public constant: the MAC is all zero.
    pub fn constant(bit: bool, kappa: usize) -> Self {
        MacBit {
            bit,
            mac: BitVec::zeros(kappa),
        }
    }

    /// Adds a public constant to the bit.
    pub fn xor_const(&self, b: bool) -> Self {
        MacBit {
            bit: self.bit ^ b,
            mac: self.mac.clone(),
        }
    }

    /// `b * [x]` for a public bit `b`.
    pub fn scale(&self, b: bool) -> Self {
        if b {
            self.clone()
        } else {
            MacBit::constant(false, self.mac.len())
        }
    }
}

impl KeyBit {
    /// Key for a public constant `b`: `b * Delta`.
    pub fn constant(bit: bool, delta: &GlobalKey) -> Self {
        KeyBit {
            key: if bit {
                delta.0.clone()
            } else {
                BitVec::zeros(delta.kappa())
            },
        }
    }

    pub fn xor_const(&self, b: bool, delta: &GlobalKey) -> Self {
        let mut key = self.key.clone();
        key.xor_if(b, &delta.0);
        KeyBit { key }
    }

    pub fn scale(&self, b: bool) -> Self {
        if b {
            self.clone()
        } else {
            KeyBit {
                key: BitVec::zeros(self.key.len()),
            }
        }
    }

    /// The MAC an honest holder of `bit` must present: `K ^ bit * Delta`.
    pub fn expected_mac(&self, bit: bool, delta: &GlobalKey) -> BitVec {
        let mut m = self.key.clone();
        m.xor_if(bit, &delta.0);
        m
    }

    pub fn verify(&self, bit: bool, mac: &BitVec, delta: &GlobalKey) -> bool {
        &self.expected_mac(bit, delta) == mac
    }
}

impl BitXor for &MacBit {
    type Output = MacBit;
    fn bitxor(self, rhs: &MacBit) -> MacBit {
        MacBit {
            bit: self.bit ^ rhs.bit,
            mac: &self.mac ^ &rhs.mac,
        }
    }
}

impl BitXor for &KeyBit {
    type Output = KeyBit;
    fn bitxor(self, rhs: &KeyBit) -> KeyBit {
        KeyBit {
            key: &self.key ^ &rhs.key,
        }
    }
}

/// Deferred MAC checking for revealed bits. The revealing side hashes its
/// MACs into `mine`, the verifying side hashes the MACs it expects into
/// `peer`, and a flush compares the two chains.
#[derive(Clone, Debug)]
pub struct DeferredCheck {
    mine: MacAccumulator,
    peer: MacAccumulator,
}

impl DeferredCheck {
    pub fn new(kappa: usize) -> Self {
        DeferredCheck {
            mine: MacAccumulator::new(kappa),
            peer: MacAccumulator::new(kappa),
        }
    }

    /// Records one of our reveals and returns the bit to send.
    pub fn reveal(&mut self, x: &MacBit) -> bool {
        self.mine.absorb(&x.mac);
        x.bit
    }

    /// Records a bit the peer revealed, under our key.
    pub fn expect(&mut self, bit: bool, key: &KeyBit, delta: &GlobalKey) {
        self.peer.absorb(&key.expected_mac(bit, delta));
    }

    /// Absorbs an arbitrary MAC as if it were ours. Only fault injection uses this.
    pub fn reveal_with_mac(&mut self, bit: bool, mac: &BitVec) -> bool {
        self.mine.absorb(mac);
        bit
    }

    pub fn pending(&self) -> (u64, u64) {
        (self.mine.absorbed(), self.peer.absorbed())
    }

    /// Exchanges chain states and aborts on mismatch. Both accumulators restart.
    pub fn flush<C: Channel + ?Sized>(&mut self, ch: &C, t: MsgType) -> Result<()> {
        send_bits(ch, t, self.mine.state())?;
        let theirs = recv_bits(ch, t, self.peer.state().len())?;
        let ok = &theirs == self.peer.state();
        self.mine.reset();
        self.peer.reset();
        if ok {
            Ok(())
        } else {
            Err(Abort::DeferredMacCheck.into())
        }
    }
}
