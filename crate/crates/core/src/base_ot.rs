//! Seed OTs and their stretching to long messages.
//!
//! The seed OT itself is a pluggable backend. The only backend shipped here,
//! [`InsecureDealerOt`], derives every pad from a seed both parties know, so
//! the receiver could unmask both messages. It exists to exercise the wire
//! protocol and must not be used where the receiver is untrusted.

use rand::RngCore;

use crate::bitlinalg::BitVec;
use crate::error::{Error, Result};
use crate::ro::{expand, hash_parts, Domain};
use crate::transport::{Channel, MsgType};
use crate::wire::{recv_bits, send_bits, split_bits};

/// Number of seed OTs one aBit pipeline run consumes for `key_bits`-bit keys.
pub fn seed_ot_count(key_bits: usize) -> usize {
    2 * labit_tau(key_bits)
}

/// Pair count `tau` of the leaky-bit stage: `ceil(22 * key_bits / 3)`.
pub fn labit_tau(key_bits: usize) -> usize {
    (22 * key_bits).div_ceil(3)
}

/// A 1-out-of-2 OT on equal-length messages.
pub trait SeedOt: Send {
    fn send(&mut self, ch: &dyn Channel, pairs: &[(BitVec, BitVec)]) -> Result<()>;

    fn receive(&mut self, ch: &dyn Channel, choices: &BitVec, len: usize) -> Result<Vec<BitVec>>;
}

/// Trusted-dealer stand-in for a real base OT. Both endpoints hold the same
/// seed and advance a shared batch counter in lockstep.
pub struct InsecureDealerOt {
    seed: [u8; 32],
    batch: u64,
}

impl InsecureDealerOt {
    pub fn new(seed: [u8; 32]) -> Self {
        InsecureDealerOt { seed, batch: 0 }
    }

    fn pad(&self, i: usize, b: bool, len: usize) -> BitVec {
        let key = hash_parts(
            Domain::SeedOt,
            &[&self.seed, &self.batch.to_be_bytes(), &(i as u64).to_be_bytes(), &[b as u8]],
        );
        expand(&key, len)
    }
}

impl SeedOt for InsecureDealerOt {
    fn send(&mut self, ch: &dyn Channel, pairs: &[(BitVec, BitVec)]) -> Result<()> {
        let len = pairs.first().map_or(0, |p| p.0.len());
        let mut out = BitVec::zeros(0);
        for (i, (m0, m1)) in pairs.iter().enumerate() {
            if m0.len() != len || m1.len() != len {
                return Err(Error::LengthMismatch { left: len, right: m0.len().max(m1.len()) });
            }
            out.extend(&(m0 ^ &self.pad(i, false, len)));
            out.extend(&(m1 ^ &self.pad(i, true, len)));
        }
        self.batch += 1;
        send_bits(ch, MsgType::OtDealer, &out)
    }

    fn receive(&mut self, ch: &dyn Channel, choices: &BitVec, len: usize) -> Result<Vec<BitVec>> {
        let all = recv_bits(ch, MsgType::OtDealer, 2 * len * choices.len())?;
        let out = (0..choices.len())
            .map(|i| {
                let c = choices.get(i);
                let start = (2 * i + c as usize) * len;
                &all.slice(start, len) ^ &self.pad(i, c, len)
            })
            .collect();
        self.batch += 1;
        Ok(out)
    }
}

/// Sends long message pairs: seeds of `kappa` bits go through the backend,
/// then each message is masked with the PRG stretch of its seed.
pub fn extended_send<R: RngCore + ?Sized>(
    ch: &dyn Channel,
    backend: &mut dyn SeedOt,
    pairs: &[(BitVec, BitVec)],
    kappa: usize,
    rng: &mut R,
) -> Result<()> {
    let len = pairs.first().map_or(0, |p| p.0.len());
    let seeds: Vec<(BitVec, BitVec)> = pairs
        .iter()
        .map(|_| (BitVec::random(kappa, rng), BitVec::random(kappa, rng)))
        .collect();
    backend.send(ch, &seeds)?;
    let mut masked0 = BitVec::zeros(0);
    let mut masked1 = BitVec::zeros(0);
    for ((m0, m1), (s0, s1)) in pairs.iter().zip(&seeds) {
        if m0.len() != len || m1.len() != len {
            return Err(Error::LengthMismatch { left: len, right: m0.len().max(m1.len()) });
        }
        masked0.extend(&(m0 ^ &expand(&s0.to_bytes(), len)));
        masked1.extend(&(m1 ^ &expand(&s1.to_bytes(), len)));
    }
    send_bits(ch, MsgType::OtMasked0, &masked0)?;
    send_bits(ch, MsgType::OtMasked1, &masked1)
}

/// Receiver side of [`extended_send`].
pub fn extended_receive(
    ch: &dyn Channel,
    backend: &mut dyn SeedOt,
    choices: &BitVec,
    len: usize,
    kappa: usize,
) -> Result<Vec<BitVec>> {
    let seeds = backend.receive(ch, choices, kappa)?;
    let n = choices.len();
    let masked0 = recv_bits(ch, MsgType::OtMasked0, n * len)?;
    let masked1 = recv_bits(ch, MsgType::OtMasked1, n * len)?;
    if len == 0 {
        return Ok(vec![BitVec::zeros(0); n]);
    }
    let (m0, m1) = (split_bits(&masked0, len), split_bits(&masked1, len));
    Ok((0..n)
        .map(|i| {
            let masked = if choices.get(i) { &m1[i] } else { &m0[i] };
            let seed = seeds[i].to_bytes();
            masked ^ &expand(&seed, len)
        })
        .collect())
}
