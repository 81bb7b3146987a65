//! Random OT extension from weak aBits with `ceil(4 * kappa / 3)`-bit keys.
//! The sender's messages are `H(i, K_i)` and `H(i, K_i ^ Delta)`, the
//! receiver's is `H(i, M_i)`.

use rand::RngCore;

use crate::abit::{
    labit_receive, labit_send, wabit_from_receiver, wabit_from_sender, LabitReceiverFault,
    LabitSenderFault,
};
use crate::base_ot::SeedOt;
use crate::bitlinalg::BitVec;
use crate::error::Result;
use crate::ro::{h, Domain};
use crate::transport::{Channel, MsgType};
use crate::wire::{recv_bits, send_bits, split_bits};

/// Key length of the weak aBits behind one random OT.
pub fn rot_tau(kappa: usize) -> usize {
    (4 * kappa).div_ceil(3)
}

/// Sender output: both random messages of every OT.
#[derive(Clone, Debug)]
pub struct RotSenderOut {
    pub m0: Vec<BitVec>,
    pub m1: Vec<BitVec>,
}

/// Receiver output: random choice bits and the chosen messages.
#[derive(Clone, Debug)]
pub struct RotReceiverOut {
    pub choices: BitVec,
    pub messages: Vec<BitVec>,
}

fn tweak_hash(i: usize, v: &[u64], kappa: usize) -> BitVec {
    let bytes: Vec<u8> = v.iter().flat_map(|w| w.to_le_bytes()).collect();
    h(Domain::Rot, kappa, &[&(i as u64).to_be_bytes(), &bytes])
}

/// Sender side: plays the leaky-bit receiver, so it ends up with the keys.
pub fn rot_send<R: RngCore + ?Sized>(
    ch: &dyn Channel,
    ot: &mut dyn SeedOt,
    count: usize,
    kappa: usize,
    rng: &mut R,
) -> Result<RotSenderOut> {
    let out = labit_receive(ch, ot, rot_tau(kappa), count, kappa, rng, &LabitReceiverFault::default())?;
    let weak = wabit_from_receiver(out)?;
    let mut m0 = Vec::with_capacity(count);
    let mut m1 = Vec::with_capacity(count);
    for i in 0..count {
        let k = weak.keys.row(i);
        m0.push(tweak_hash(i, k.words(), kappa));
        m1.push(tweak_hash(i, (&k ^ &weak.delta).words(), kappa));
    }
    Ok(RotSenderOut { m0, m1 })
}

/// Receiver side: plays the leaky-bit sender, so it ends up with the MACs.
pub fn rot_receive<R: RngCore + ?Sized>(
    ch: &dyn Channel,
    ot: &mut dyn SeedOt,
    count: usize,
    kappa: usize,
    rng: &mut R,
) -> Result<RotReceiverOut> {
    let out = labit_send(ch, ot, rot_tau(kappa), count, kappa, rng, &LabitSenderFault::default())?;
    let weak = wabit_from_sender(out)?;
    let messages = (0..count)
        .map(|i| tweak_hash(i, weak.macs.row_words(i), kappa))
        .collect();
    Ok(RotReceiverOut { choices: weak.bits, messages })
}

fn pad_to(x: &BitVec, len: usize) -> BitVec {
    if x.len() == len {
        x.clone()
    } else {
        crate::ro::expand(&x.to_bytes(), len)
    }
}

/// Turns random OTs into chosen-message OTs with random choices.
pub fn chosen_send(ch: &dyn Channel, rot: &RotSenderOut, messages: &[(BitVec, BitVec)]) -> Result<()> {
    let mut c0 = BitVec::zeros(0);
    let mut c1 = BitVec::zeros(0);
    for (i, (a, b)) in messages.iter().enumerate() {
        c0.extend(&(a ^ &pad_to(&rot.m0[i], a.len())));
        c1.extend(&(b ^ &pad_to(&rot.m1[i], b.len())));
    }
    send_bits(ch, MsgType::RotMask0, &c0)?;
    send_bits(ch, MsgType::RotMask1, &c1)
}

/// Receiver side of [`chosen_send`]; every message has `len` bits.
pub fn chosen_receive(ch: &dyn Channel, rot: &RotReceiverOut, len: usize) -> Result<Vec<BitVec>> {
    let n = rot.messages.len();
    let c0 = split_bits(&recv_bits(ch, MsgType::RotMask0, n * len)?, len);
    let c1 = split_bits(&recv_bits(ch, MsgType::RotMask1, n * len)?, len);
    Ok((0..n)
        .map(|i| {
            let c = if rot.choices.get(i) { &c1[i] } else { &c0[i] };
            c ^ &pad_to(&rot.messages[i], len)
        })
        .collect())
}
