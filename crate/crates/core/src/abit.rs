//! Authenticated bits from OT.
//!
//! A leaky-bit run authenticates random bits of the OT receiver under a key
//! the OT sender chose, checked pairwise with one equality test. Transposing
//! the result swaps the roles and yields weak aBits whose global key may leak
//! in a few positions; multiplying by a public random matrix compresses that
//! key into a fresh uniform `Delta`.
//!
//! The party that ends up holding the MACs plays the OT sender throughout.

use rand::{Rng, RngCore};

use crate::auth::{GlobalKey, KeyBit, MacBit};
use crate::base_ot::{extended_receive, extended_send, labit_tau, SeedOt};
use crate::bitlinalg::{BitMatrix, BitVec, Pairing};
use crate::eq::eq_check;
use crate::error::{Error, Result};
use crate::transport::{Channel, MsgType};
use crate::wire::{recv_bits, send_bits};

/// Leaky-bit output of the OT sender: the global string and one key per kept pair.
#[derive(Clone, Debug)]
pub struct LabitSenderOut {
    pub gamma: BitVec,
    pub keys: Vec<BitVec>,
}

/// Leaky-bit output of the OT receiver: one bit and one MAC per kept pair.
#[derive(Clone, Debug)]
pub struct LabitReceiverOut {
    pub bits: BitVec,
    pub macs: Vec<BitVec>,
}

/// Deviations a corrupt OT sender can make. `substitutions` replaces the
/// global string in the given OT instances; `guesses` are the sender's
/// guesses of the receiver's choice bit in those instances, folded into its
/// side of the equality test.
#[derive(Clone, Debug, Default)]
pub struct LabitSenderFault {
    pub substitutions: Vec<(usize, BitVec)>,
    pub guesses: Vec<(usize, bool)>,
}

/// Deviations a corrupt OT receiver can make: flip the announced parity for
/// the given positions of the kept-pair order.
#[derive(Clone, Debug, Default)]
pub struct LabitReceiverFault {
    pub flip_parity: Vec<usize>,
}

/// OT-sender side of a leaky-bit run producing `tau` bits of length `ell`.
pub fn labit_send<R: RngCore + ?Sized>(
    ch: &dyn Channel,
    ot: &mut dyn SeedOt,
    tau: usize,
    ell: usize,
    kappa: usize,
    rng: &mut R,
    fault: &LabitSenderFault,
) -> Result<LabitSenderOut> {
    let t = 2 * tau;
    let gamma = BitVec::random(ell, rng);
    let mut pairs = Vec::with_capacity(t);
    for i in 0..t {
        let l = BitVec::random(ell, rng);
        let g = fault
            .substitutions
            .iter()
            .find(|(k, _)| *k == i)
            .map_or(&gamma, |(_, g)| g);
        let l1 = &l ^ g;
        pairs.push((l, l1));
    }
    extended_send(ch, ot, &pairs, kappa, rng)?;
    let keys: Vec<BitVec> = pairs.into_iter().map(|(l, _)| l).collect();

    let pairing = Pairing::from_bytes(&ch.recv(MsgType::LabitPairing)?, t)?;
    let leaders = pairing.leaders();
    let d = recv_bits(ch, MsgType::LabitD, tau)?;

    let mut z = BitVec::zeros(0);
    for (k, &i) in leaders.iter().enumerate() {
        let j = pairing.partner(i);
        let mut zi = &keys[i] ^ &keys[j];
        zi.xor_if(d.get(k), &gamma);
        for &(idx, guess) in &fault.guesses {
            if idx == i || idx == j {
                if let Some((_, g)) = fault.substitutions.iter().find(|(s, _)| *s == idx) {
                    zi.xor_if(guess, &(&gamma ^ g));
                }
            }
        }
        z.extend(&zi);
    }
    eq_check(ch, true, &z, kappa, rng)?;

    let keys = leaders.iter().map(|&i| keys[i].clone()).collect();
    Ok(LabitSenderOut { gamma, keys })
}

/// OT-receiver side of a leaky-bit run.
pub fn labit_receive<R: RngCore + ?Sized>(
    ch: &dyn Channel,
    ot: &mut dyn SeedOt,
    tau: usize,
    ell: usize,
    kappa: usize,
    rng: &mut R,
    fault: &LabitReceiverFault,
) -> Result<LabitReceiverOut> {
    let t = 2 * tau;
    let y = BitVec::random(t, rng);
    let macs = extended_receive(ch, ot, &y, ell, kappa)?;

    let pairing = Pairing::random(t, rng)?;
    ch.send(MsgType::LabitPairing, &pairing.to_bytes())?;
    let leaders = pairing.leaders();
    let mut d = BitVec::zeros(tau);
    for (k, &i) in leaders.iter().enumerate() {
        let flip = fault.flip_parity.contains(&k);
        d.set(k, y.get(i) ^ y.get(pairing.partner(i)) ^ flip);
    }
    send_bits(ch, MsgType::LabitD, &d)?;

    let mut w = BitVec::zeros(0);
    for &i in &leaders {
        w.extend(&(&macs[i] ^ &macs[pairing.partner(i)]));
    }
    eq_check(ch, false, &w, kappa, rng)?;

    Ok(LabitReceiverOut {
        bits: leaders.iter().map(|&i| y.get(i)).collect(),
        macs: leaders.iter().map(|&i| macs[i].clone()).collect(),
    })
}

/// Weak aBits as held by the MAC holder: `ell` bits, each with a `tau`-bit MAC.
#[derive(Clone, Debug)]
pub struct WabitMacSide {
    pub bits: BitVec,
    pub macs: BitMatrix,
}

/// Weak aBits as held by the key holder: a `tau`-bit global key and one key per bit.
#[derive(Clone, Debug)]
pub struct WabitKeySide {
    pub delta: BitVec,
    pub keys: BitMatrix,
}

/// Local transposition on the leaky-bit sender: bit `j` is `gamma[j]`, its
/// MAC is column `j` of the kept keys.
pub fn wabit_from_sender(out: LabitSenderOut) -> Result<WabitMacSide> {
    let macs = BitMatrix::from_rows(&out.keys)?.transpose();
    Ok(WabitMacSide { bits: out.gamma, macs })
}

/// Local transposition on the leaky-bit receiver: the kept bits become the
/// global key, columns of the kept MACs become the keys.
pub fn wabit_from_receiver(out: LabitReceiverOut) -> Result<WabitKeySide> {
    let keys = BitMatrix::from_rows(&out.macs)?.transpose();
    Ok(WabitKeySide { delta: out.bits, keys })
}

/// Key-holder side of privacy amplification to `key_bits`-bit keys.
pub fn amplify_keys<R: Rng + ?Sized>(
    ch: &dyn Channel,
    weak: &WabitKeySide,
    key_bits: usize,
    rng: &mut R,
) -> Result<(GlobalKey, Vec<KeyBit>)> {
    let tau = weak.delta.len();
    let a = BitMatrix::random(key_bits, tau, rng);
    ch.send(MsgType::AmplifyMatrix, &a.to_bytes())?;
    let delta = GlobalKey(a.mul_vec(&weak.delta)?);
    let keys = (0..weak.keys.rows())
        .map(|j| KeyBit { key: a.mul_words(weak.keys.row_words(j)) })
        .collect();
    Ok((delta, keys))
}

/// MAC-holder side of privacy amplification.
pub fn amplify_macs(ch: &dyn Channel, weak: &WabitMacSide, key_bits: usize) -> Result<Vec<MacBit>> {
    let tau = weak.macs.cols();
    let a = BitMatrix::from_bytes(&ch.recv(MsgType::AmplifyMatrix)?, key_bits, tau)?;
    Ok((0..weak.macs.rows())
        .map(|j| MacBit {
            bit: weak.bits.get(j),
            mac: a.mul_words(weak.macs.row_words(j)),
        })
        .collect())
}

/// Produces `count` aBits owned by the caller, with `key_bits`-bit MACs.
pub fn produce_abits_mac<R: RngCore + ?Sized>(
    ch: &dyn Channel,
    ot: &mut dyn SeedOt,
    count: usize,
    key_bits: usize,
    rng: &mut R,
) -> Result<Vec<MacBit>> {
    check_key_bits(key_bits)?;
    let tau = labit_tau(key_bits);
    let out = labit_send(ch, ot, tau, count, key_bits, rng, &LabitSenderFault::default())?;
    let weak = wabit_from_sender(out)?;
    amplify_macs(ch, &weak, key_bits)
}

/// Produces keys for `count` aBits owned by the peer, and the global key
/// born in this run.
pub fn produce_abits_key<R: RngCore + ?Sized>(
    ch: &dyn Channel,
    ot: &mut dyn SeedOt,
    count: usize,
    key_bits: usize,
    rng: &mut R,
) -> Result<(GlobalKey, Vec<KeyBit>)> {
    check_key_bits(key_bits)?;
    let tau = labit_tau(key_bits);
    let out = labit_receive(ch, ot, tau, count, key_bits, rng, &LabitReceiverFault::default())?;
    let weak = wabit_from_receiver(out)?;
    amplify_keys(ch, &weak, key_bits, rng)
}

fn check_key_bits(key_bits: usize) -> Result<()> {
    if key_bits == 0 || key_bits > 4096 {
        return Err(Error::Usage(format!("key length {key_bits} out of range")));
    }
    Ok(())
}
