//! Authenticated OTs: leaky generation and bucket combining.
//!
//! An aOT is a quadruple of aBits `([x0], [x1])` owned by the sender and
//! `([c], [z])` owned by the receiver with `z = x_c`. The leaky protocol lets
//! a corrupt sender learn the receiver's choice bit with probability 1/2 per
//! instance (at the price of being caught with probability 1/2); combining
//! buckets of leaky quadruples removes that leakage.

use rand::RngCore;

use crate::auth::{DeferredCheck, GlobalKey, KeyBit, MacBit};
use crate::bitlinalg::{BitVec, Permutation};
use crate::eq::eq_check;
use crate::error::{Abort, Error, Result};
use crate::ro::{h, mask, Domain};
use crate::transport::{Channel, MsgType};
use crate::wire::{recv_bits, send_bits, split_bits};

/// The OT sender's view of an aOT.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AotSender {
    pub x0: MacBit,
    pub x1: MacBit,
    pub c: KeyBit,
    pub z: KeyBit,
}

/// The OT receiver's view of an aOT.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AotReceiver {
    pub x0: KeyBit,
    pub x1: KeyBit,
    pub c: MacBit,
    pub z: MacBit,
}

/// Sender deviations: flip the first MAC bit inside the `X1` payload of
/// these instances.
#[derive(Clone, Debug, Default)]
pub struct LaotSenderFault {
    pub garble_x1_mac: Vec<usize>,
}

/// Receiver deviations: announce the complement of `d` in these instances.
#[derive(Clone, Debug, Default)]
pub struct LaotReceiverFault {
    pub flip_d: Vec<usize>,
}

/// Inputs of a leaky OT batch on the sender.
pub struct LaotSenderInput<'a> {
    pub x0: &'a [MacBit],
    pub x1: &'a [MacBit],
    pub c: &'a [KeyBit],
    pub r: &'a [KeyBit],
}

/// Inputs of a leaky OT batch on the receiver.
pub struct LaotReceiverInput<'a> {
    pub x0: &'a [KeyBit],
    pub x1: &'a [KeyBit],
    pub c: &'a [MacBit],
    pub r: &'a [MacBit],
}

fn payload(x: &MacBit, t: &BitVec) -> BitVec {
    let mut p = BitVec::from_bools(&[x.bit]);
    p.extend(&x.mac);
    p.extend(t);
    p
}

fn check_lengths(n: usize, lens: &[usize]) -> Result<()> {
    match lens.iter().find(|&&l| l != n) {
        Some(&l) => Err(Error::LengthMismatch { left: n, right: l }),
        None => Ok(()),
    }
}

/// Sender side of a batch of leaky OTs. `delta` is the sender's global key.
pub fn laot_send<R: RngCore + ?Sized>(
    ch: &dyn Channel,
    input: LaotSenderInput<'_>,
    delta: &GlobalKey,
    rng: &mut R,
    fault: &LaotSenderFault,
) -> Result<Vec<AotSender>> {
    let kappa = delta.kappa();
    let n = input.x0.len();
    check_lengths(n, &[input.x1.len(), input.c.len(), input.r.len()])?;
    let width = 1 + 2 * kappa;

    let t0: Vec<BitVec> = (0..n).map(|_| BitVec::random(kappa, rng)).collect();
    let t1: Vec<BitVec> = (0..n).map(|_| BitVec::random(kappa, rng)).collect();
    let mut out0 = BitVec::zeros(0);
    let mut out1 = BitVec::zeros(0);
    for i in 0..n {
        let (x0, x1) = (&input.x0[i], &input.x1[i]);
        let kc = &input.c[i].key;
        let tx0 = if x0.bit { &t1[i] } else { &t0[i] };
        let tx1 = if x1.bit { &t1[i] } else { &t0[i] };
        let mut p1 = payload(x1, tx1);
        if fault.garble_x1_mac.contains(&i) {
            p1.flip(1);
        }
        out0.extend(&mask(Domain::LaotTransfer, kappa, &[&kc.to_bytes()], &payload(x0, tx0)));
        out1.extend(&mask(Domain::LaotTransfer, kappa, &[&(kc ^ &delta.0).to_bytes()], &p1));
    }
    send_bits(ch, MsgType::LaotX0, &out0)?;
    send_bits(ch, MsgType::LaotX1, &out1)?;
    debug_assert_eq!(out0.len(), n * width);

    let d = recv_bits(ch, MsgType::LaotD, n)?;
    let z: Vec<KeyBit> = (0..n).map(|i| input.r[i].xor_const(d.get(i), delta)).collect();

    let mut i0 = BitVec::zeros(0);
    let mut i1 = BitVec::zeros(0);
    for i in 0..n {
        let kz = &z[i].key;
        i0.extend(&(&h(Domain::LaotRecommit, kappa, &[&kz.to_bytes()]) ^ &t1[i]));
        i1.extend(&(&h(Domain::LaotRecommit, kappa, &[&(kz ^ &delta.0).to_bytes()]) ^ &t0[i]));
    }
    send_bits(ch, MsgType::LaotI0, &i0)?;
    send_bits(ch, MsgType::LaotI1, &i1)?;

    let mut check = BitVec::zeros(0);
    for i in 0..n {
        check.extend(&t0[i]);
        check.extend(&t1[i]);
    }
    eq_check(ch, true, &check, kappa, rng)?;

    Ok((0..n)
        .map(|i| AotSender {
            x0: input.x0[i].clone(),
            x1: input.x1[i].clone(),
            c: input.c[i].clone(),
            z: z[i].clone(),
        })
        .collect())
}

/// Receiver side of a batch of leaky OTs. `delta` is the receiver's global key.
pub fn laot_receive<R: RngCore + ?Sized>(
    ch: &dyn Channel,
    input: LaotReceiverInput<'_>,
    delta: &GlobalKey,
    rng: &mut R,
    fault: &LaotReceiverFault,
) -> Result<Vec<AotReceiver>> {
    let kappa = delta.kappa();
    let n = input.c.len();
    check_lengths(n, &[input.x0.len(), input.x1.len(), input.r.len()])?;
    let width = 1 + 2 * kappa;

    let x0s = split_bits(&recv_bits(ch, MsgType::LaotX0, n * width)?, width);
    let x1s = split_bits(&recv_bits(ch, MsgType::LaotX1, n * width)?, width);
    let mut known_t = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    let mut d = BitVec::zeros(n);
    for i in 0..n {
        let c = &input.c[i];
        let (masked, key) = if c.bit { (&x1s[i], &input.x1[i]) } else { (&x0s[i], &input.x0[i]) };
        let p = mask(Domain::LaotTransfer, kappa, &[&c.mac.to_bytes()], masked);
        let bit = p.get(0);
        if !key.verify(bit, &p.slice(1, kappa), delta) {
            return Err(Abort::MacCheck.into());
        }
        known_t.push(p.slice(1 + kappa, kappa));
        let di = bit ^ input.r[i].bit ^ fault.flip_d.contains(&i);
        d.set(i, di);
        z.push(input.r[i].xor_const(di));
    }
    send_bits(ch, MsgType::LaotD, &d)?;

    let i0 = split_bits(&recv_bits(ch, MsgType::LaotI0, n * kappa)?, kappa);
    let i1 = split_bits(&recv_bits(ch, MsgType::LaotI1, n * kappa)?, kappa);
    let mut check = BitVec::zeros(0);
    for i in 0..n {
        let zi = &z[i];
        let iz = if zi.bit { &i1[i] } else { &i0[i] };
        let other = iz ^ &h(Domain::LaotRecommit, kappa, &[&zi.mac.to_bytes()]);
        let (t0, t1) = if zi.bit { (&other, &known_t[i]) } else { (&known_t[i], &other) };
        check.extend(t0);
        check.extend(t1);
    }
    eq_check(ch, false, &check, kappa, rng)?;

    Ok((0..n)
        .map(|i| AotReceiver {
            x0: input.x0[i].clone(),
            x1: input.x1[i].clone(),
            c: input.c[i].clone(),
            z: z[i].clone(),
        })
        .collect())
}

/// The sender's half of the bit revealed when folding `b` into `a`.
pub fn fold_reveal_sender(a: &AotSender, b: &AotSender) -> MacBit {
    &(&(&a.x0 ^ &a.x1) ^ &b.x0) ^ &b.x1
}

/// The receiver's key for the same revealed bit.
pub fn fold_reveal_receiver(a: &AotReceiver, b: &AotReceiver) -> KeyBit {
    &(&(&a.x0 ^ &a.x1) ^ &b.x0) ^ &b.x1
}

/// Combines two aOTs on the sender given the revealed bit `d`.
pub fn fold_sender(a: &AotSender, b: &AotSender, d: bool) -> AotSender {
    AotSender {
        x0: &a.x0 ^ &b.x0,
        x1: &a.x0 ^ &b.x1,
        c: &a.c ^ &b.c,
        z: &(&a.z ^ &b.z) ^ &a.c.scale(d),
    }
}

/// Combines two aOTs on the receiver given the revealed bit `d`.
pub fn fold_receiver(a: &AotReceiver, b: &AotReceiver, d: bool) -> AotReceiver {
    AotReceiver {
        x0: &a.x0 ^ &b.x0,
        x1: &a.x0 ^ &b.x1,
        c: &a.c ^ &b.c,
        z: &(&a.z ^ &b.z) ^ &a.c.scale(d),
    }
}

fn bucket_shape(total: usize, bucket: usize) -> Result<usize> {
    if bucket == 0 || !total.is_multiple_of(bucket) {
        return Err(Error::Usage(format!("{total} leaky items do not fill buckets of {bucket}")));
    }
    Ok(total / bucket)
}

/// Sender side of combining `bucket * ell` leaky aOTs into `ell` aOTs. The
/// receiver picks the bucket assignment. Reveals go to `check`.
pub fn combine_aots_send(
    ch: &dyn Channel,
    leaky: Vec<AotSender>,
    bucket: usize,
    check: &mut DeferredCheck,
) -> Result<Vec<AotSender>> {
    let ell = bucket_shape(leaky.len(), bucket)?;
    let perm = Permutation::from_bytes(&ch.recv(MsgType::CombPerm)?, leaky.len())?;
    let items = perm.permute(&leaky);
    let mut acc: Vec<AotSender> = (0..ell).map(|j| items[j * bucket].clone()).collect();
    for k in 1..bucket {
        let mut d = BitVec::zeros(ell);
        for j in 0..ell {
            d.set(j, check.reveal(&fold_reveal_sender(&acc[j], &items[j * bucket + k])));
        }
        send_bits(ch, MsgType::CombD, &d)?;
        for j in 0..ell {
            acc[j] = fold_sender(&acc[j], &items[j * bucket + k], d.get(j));
        }
    }
    Ok(acc)
}

/// Receiver side of [`combine_aots_send`]. `delta` is the receiver's global key.
pub fn combine_aots_receive<R: RngCore + ?Sized>(
    ch: &dyn Channel,
    leaky: Vec<AotReceiver>,
    bucket: usize,
    delta: &GlobalKey,
    check: &mut DeferredCheck,
    rng: &mut R,
) -> Result<Vec<AotReceiver>> {
    let ell = bucket_shape(leaky.len(), bucket)?;
    let perm = Permutation::random(leaky.len(), rng);
    ch.send(MsgType::CombPerm, &perm.to_bytes())?;
    let items = perm.permute(&leaky);
    let mut acc: Vec<AotReceiver> = (0..ell).map(|j| items[j * bucket].clone()).collect();
    for k in 1..bucket {
        let d = recv_bits(ch, MsgType::CombD, ell)?;
        for j in 0..ell {
            let next = &items[j * bucket + k];
            check.expect(d.get(j), &fold_reveal_receiver(&acc[j], next), delta);
            acc[j] = fold_receiver(&acc[j], next, d.get(j));
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    struct Keys {
        alice: GlobalKey,
        bob: GlobalKey,
    }

    /// Sender owns bits under Bob's key; receiver owns bits under Alice's key.
    fn auth(bit: bool, holder_delta: &GlobalKey, rng: &mut ChaCha20Rng) -> (MacBit, KeyBit) {
        let key = KeyBit { key: BitVec::random(holder_delta.kappa(), rng) };
        (MacBit { bit, mac: key.expected_mac(bit, holder_delta) }, key)
    }

    fn ideal_aot(x0: bool, x1: bool, c: bool, keys: &Keys, rng: &mut ChaCha20Rng) -> (AotSender, AotReceiver) {
        let z = if c { x1 } else { x0 };
        let (mx0, kx0) = auth(x0, &keys.bob, rng);
        let (mx1, kx1) = auth(x1, &keys.bob, rng);
        let (mc, kc) = auth(c, &keys.alice, rng);
        let (mz, kz) = auth(z, &keys.alice, rng);
        (
            AotSender { x0: mx0, x1: mx1, c: kc, z: kz },
            AotReceiver { x0: kx0, x1: kx1, c: mc, z: mz },
        )
    }

    fn valid(s: &AotSender, r: &AotReceiver, keys: &Keys) -> bool {
        let z = if r.c.bit { s.x1.bit } else { s.x0.bit };
        z == r.z.bit
            && r.x0.verify(s.x0.bit, &s.x0.mac, &keys.bob)
            && r.x1.verify(s.x1.bit, &s.x1.mac, &keys.bob)
            && s.c.verify(r.c.bit, &r.c.mac, &keys.alice)
            && s.z.verify(r.z.bit, &r.z.mac, &keys.alice)
    }

    #[test]
    fn folding_two_valid_aots_is_valid_exhaustively() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let keys = Keys { alice: GlobalKey::random(32, &mut rng), bob: GlobalKey::random(32, &mut rng) };
        for bits in 0u8..64 {
            let b = |i: u8| (bits >> i) & 1 == 1;
            let (s1, r1) = ideal_aot(b(0), b(1), b(2), &keys, &mut rng);
            let (s2, r2) = ideal_aot(b(3), b(4), b(5), &keys, &mut rng);
            let d = fold_reveal_sender(&s1, &s2);
            assert!(fold_reveal_receiver(&r1, &r2).verify(d.bit, &d.mac, &keys.bob));
            let s = fold_sender(&s1, &s2, d.bit);
            let r = fold_receiver(&r1, &r2, d.bit);
            assert!(valid(&s, &r, &keys), "input bits {bits:06b}");
            assert_eq!(r.c.bit, b(2) ^ b(5));
            assert_eq!(s.x0.bit, b(0) ^ b(3));
            assert_eq!(s.x1.bit, b(0) ^ b(4));
        }
    }

    #[test]
    fn laot_and_combiner_produce_valid_aots() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let keys = Keys { alice: GlobalKey::random(64, &mut rng), bob: GlobalKey::random(64, &mut rng) };
        let n = 24;
        let bucket = 3;
        let mut sx0 = vec![];
        let mut sx1 = vec![];
        let mut sc = vec![];
        let mut sr = vec![];
        let mut rx0 = vec![];
        let mut rx1 = vec![];
        let mut rc = vec![];
        let mut rr = vec![];
        for _ in 0..n {
            let (m, k) = auth(rng.random(), &keys.bob, &mut rng);
            sx0.push(m);
            rx0.push(k);
            let (m, k) = auth(rng.random(), &keys.bob, &mut rng);
            sx1.push(m);
            rx1.push(k);
            let (m, k) = auth(rng.random(), &keys.alice, &mut rng);
            rc.push(m);
            sc.push(k);
            let (m, k) = auth(rng.random(), &keys.alice, &mut rng);
            rr.push(m);
            sr.push(k);
        }
        let (ca, cb) = crate::transport::memory_pair();
        let (ka, kb) = (keys.alice.clone(), keys.bob.clone());
        let t = std::thread::spawn(move || {
            let mut rng = ChaCha20Rng::seed_from_u64(3);
            let input = LaotReceiverInput { x0: &rx0, x1: &rx1, c: &rc, r: &rr };
            let leaky = laot_receive(&cb, input, &kb, &mut rng, &Default::default()).unwrap();
            let mut check = DeferredCheck::new(64);
            let out = combine_aots_receive(&cb, leaky, bucket, &kb, &mut check, &mut rng).unwrap();
            check.flush(&cb, MsgType::DealFlush).unwrap();
            out
        });
        let input = LaotSenderInput { x0: &sx0, x1: &sx1, c: &sc, r: &sr };
        let leaky = laot_send(&ca, input, &ka, &mut rng, &Default::default()).unwrap();
        let mut check = DeferredCheck::new(64);
        let out = combine_aots_send(&ca, leaky, bucket, &mut check).unwrap();
        check.flush(&ca, MsgType::DealFlush).unwrap();
        let rout = t.join().unwrap();
        assert_eq!(out.len(), n / bucket);
        for (s, r) in out.iter().zip(&rout) {
            assert!(valid(s, r, &keys));
        }
    }
}
