//! Authenticated AND triples owned by one party.
//!
//! A triple is `([x], [y], [z])` with `z = x & y`, all owned by the same
//! party. The leaky protocol may leak `x` to a corrupt key holder (caught
//! with probability 1/2 per attempt); bucket combining removes the leakage.

use rand::RngCore;

use crate::auth::{DeferredCheck, GlobalKey, KeyBit, MacBit};
use crate::bitlinalg::{BitVec, Permutation};
use crate::eq::eq_check;
use crate::error::{Error, Result};
use crate::ro::{h, Domain};
use crate::transport::{Channel, MsgType};
use crate::wire::{recv_bits, send_bits, split_bits};

/// The owner's view of an aAND triple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AandOwner {
    pub x: MacBit,
    pub y: MacBit,
    pub z: MacBit,
}

/// The key holder's view of an aAND triple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AandPeer {
    pub x: KeyBit,
    pub y: KeyBit,
    pub z: KeyBit,
}

/// Key-holder deviations: XOR an error string into `U` for these instances.
#[derive(Clone, Debug, Default)]
pub struct LaandPeerFault {
    pub tamper_u: Vec<(usize, BitVec)>,
}

fn check_lengths(n: usize, lens: &[usize]) -> Result<()> {
    match lens.iter().find(|&&l| l != n) {
        Some(&l) => Err(Error::LengthMismatch { left: n, right: l }),
        None => Ok(()),
    }
}

/// Owner side of a leaky AND batch over aBits `x`, `y`, `r`.
pub fn laand_owner<R: RngCore + ?Sized>(
    ch: &dyn Channel,
    x: &[MacBit],
    y: &[MacBit],
    r: &[MacBit],
    kappa: usize,
    rng: &mut R,
) -> Result<Vec<AandOwner>> {
    let n = x.len();
    check_lengths(n, &[y.len(), r.len()])?;
    let mut d = BitVec::zeros(n);
    let mut z = Vec::with_capacity(n);
    for i in 0..n {
        let zi = x[i].bit & y[i].bit;
        d.set(i, zi ^ r[i].bit);
        z.push(r[i].xor_const(zi ^ r[i].bit));
    }
    send_bits(ch, MsgType::LaandD, &d)?;

    let u = split_bits(&recv_bits(ch, MsgType::LaandU, n * kappa)?, kappa);
    let mut v = BitVec::zeros(0);
    for i in 0..n {
        let mx = x[i].mac.to_bytes();
        if x[i].bit {
            let myz = (&y[i].mac ^ &z[i].mac).to_bytes();
            v.extend(&(&u[i] ^ &h(Domain::LaandU, kappa, &[&mx, &myz])));
        } else {
            v.extend(&h(Domain::LaandU, kappa, &[&mx, &z[i].mac.to_bytes()]));
        }
    }
    eq_check(ch, true, &v, kappa, rng)?;

    Ok((0..n)
        .map(|i| AandOwner { x: x[i].clone(), y: y[i].clone(), z: z[i].clone() })
        .collect())
}

/// Key-holder side of a leaky AND batch. `delta` is the caller's global key.
pub fn laand_peer<R: RngCore + ?Sized>(
    ch: &dyn Channel,
    x: &[KeyBit],
    y: &[KeyBit],
    r: &[KeyBit],
    delta: &GlobalKey,
    rng: &mut R,
    fault: &LaandPeerFault,
) -> Result<Vec<AandPeer>> {
    let kappa = delta.kappa();
    let n = x.len();
    check_lengths(n, &[y.len(), r.len()])?;
    let d = recv_bits(ch, MsgType::LaandD, n)?;
    let z: Vec<KeyBit> = (0..n).map(|i| r[i].xor_const(d.get(i), delta)).collect();

    let mut u = BitVec::zeros(0);
    let mut expect = BitVec::zeros(0);
    for i in 0..n {
        let kx = &x[i].key;
        let kz = &z[i].key;
        let h0 = h(Domain::LaandU, kappa, &[&kx.to_bytes(), &kz.to_bytes()]);
        let h1 = h(
            Domain::LaandU,
            kappa,
            &[&(kx ^ &delta.0).to_bytes(), &(&y[i].key ^ kz).to_bytes()],
        );
        let mut ui = &h0 ^ &h1;
        for (idx, e) in &fault.tamper_u {
            if *idx == i {
                ui ^= e;
            }
        }
        u.extend(&ui);
        expect.extend(&h0);
    }
    send_bits(ch, MsgType::LaandU, &u)?;
    eq_check(ch, false, &expect, kappa, rng)?;

    Ok((0..n)
        .map(|i| AandPeer { x: x[i].clone(), y: y[i].clone(), z: z[i].clone() })
        .collect())
}

/// The owner's half of the bit revealed when folding `b` into `a`.
pub fn fold_reveal_owner(a: &AandOwner, b: &AandOwner) -> MacBit {
    &a.y ^ &b.y
}

pub fn fold_reveal_peer(a: &AandPeer, b: &AandPeer) -> KeyBit {
    &a.y ^ &b.y
}

/// `x = x1 ^ x2`, `y = y1`, `z = z1 ^ z2 ^ d * x2` with `d = y1 ^ y2`.
pub fn fold_owner(a: &AandOwner, b: &AandOwner, d: bool) -> AandOwner {
    AandOwner {
        x: &a.x ^ &b.x,
        y: a.y.clone(),
        z: &(&a.z ^ &b.z) ^ &b.x.scale(d),
    }
}

pub fn fold_peer(a: &AandPeer, b: &AandPeer, d: bool) -> AandPeer {
    AandPeer {
        x: &a.x ^ &b.x,
        y: a.y.clone(),
        z: &(&a.z ^ &b.z) ^ &b.x.scale(d),
    }
}

fn bucket_shape(total: usize, bucket: usize) -> Result<usize> {
    if bucket == 0 || !total.is_multiple_of(bucket) {
        return Err(Error::Usage(format!("{total} leaky items do not fill buckets of {bucket}")));
    }
    Ok(total / bucket)
}

/// Owner side of combining `bucket * ell` leaky triples. The owner picks the
/// bucket assignment and reveals the folding bits.
pub fn combine_aands_owner<R: RngCore + ?Sized>(
    ch: &dyn Channel,
    leaky: Vec<AandOwner>,
    bucket: usize,
    check: &mut DeferredCheck,
    rng: &mut R,
) -> Result<Vec<AandOwner>> {
    let ell = bucket_shape(leaky.len(), bucket)?;
    let perm = Permutation::random(leaky.len(), rng);
    ch.send(MsgType::CombPerm, &perm.to_bytes())?;
    let items = perm.permute(&leaky);
    let mut acc: Vec<AandOwner> = (0..ell).map(|j| items[j * bucket].clone()).collect();
    for k in 1..bucket {
        let mut d = BitVec::zeros(ell);
        for j in 0..ell {
            d.set(j, check.reveal(&fold_reveal_owner(&acc[j], &items[j * bucket + k])));
        }
        send_bits(ch, MsgType::CombD, &d)?;
        for j in 0..ell {
            acc[j] = fold_owner(&acc[j], &items[j * bucket + k], d.get(j));
        }
    }
    Ok(acc)
}

/// Key-holder side of [`combine_aands_owner`].
pub fn combine_aands_peer(
    ch: &dyn Channel,
    leaky: Vec<AandPeer>,
    bucket: usize,
    delta: &GlobalKey,
    check: &mut DeferredCheck,
) -> Result<Vec<AandPeer>> {
    let ell = bucket_shape(leaky.len(), bucket)?;
    let perm = Permutation::from_bytes(&ch.recv(MsgType::CombPerm)?, leaky.len())?;
    let items = perm.permute(&leaky);
    let mut acc: Vec<AandPeer> = (0..ell).map(|j| items[j * bucket].clone()).collect();
    for k in 1..bucket {
        let d = recv_bits(ch, MsgType::CombD, ell)?;
        for j in 0..ell {
            let next = &items[j * bucket + k];
            check.expect(d.get(j), &fold_reveal_peer(&acc[j], next), delta);
            acc[j] = fold_peer(&acc[j], next, d.get(j));
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn auth(bit: bool, delta: &GlobalKey, rng: &mut ChaCha20Rng) -> (MacBit, KeyBit) {
        let key = KeyBit { key: BitVec::random(delta.kappa(), rng) };
        (MacBit { bit, mac: key.expected_mac(bit, delta) }, key)
    }

    fn triple(x: bool, y: bool, delta: &GlobalKey, rng: &mut ChaCha20Rng) -> (AandOwner, AandPeer) {
        let (mx, kx) = auth(x, delta, rng);
        let (my, ky) = auth(y, delta, rng);
        let (mz, kz) = auth(x & y, delta, rng);
        (AandOwner { x: mx, y: my, z: mz }, AandPeer { x: kx, y: ky, z: kz })
    }

    fn valid(o: &AandOwner, p: &AandPeer, delta: &GlobalKey) -> bool {
        o.z.bit == (o.x.bit & o.y.bit)
            && p.x.verify(o.x.bit, &o.x.mac, delta)
            && p.y.verify(o.y.bit, &o.y.mac, delta)
            && p.z.verify(o.z.bit, &o.z.mac, delta)
    }

    #[test]
    fn folding_two_valid_triples_is_valid_exhaustively() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let delta = GlobalKey::random(32, &mut rng);
        for bits in 0u8..16 {
            let b = |i: u8| (bits >> i) & 1 == 1;
            let (o1, p1) = triple(b(0), b(1), &delta, &mut rng);
            let (o2, p2) = triple(b(2), b(3), &delta, &mut rng);
            let d = fold_reveal_owner(&o1, &o2);
            assert!(fold_reveal_peer(&p1, &p2).verify(d.bit, &d.mac, &delta));
            let o = fold_owner(&o1, &o2, d.bit);
            let p = fold_peer(&p1, &p2, d.bit);
            assert!(valid(&o, &p, &delta), "{bits:04b}");
            assert_eq!(o.x.bit, b(0) ^ b(2));
            assert_eq!(o.y.bit, b(1));
        }
    }

    #[test]
    fn laand_and_combiner_produce_valid_triples() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let delta = GlobalKey::random(128, &mut rng);
        let n = 30;
        let (mut mx, mut my, mut mr, mut kx, mut ky, mut kr) = (vec![], vec![], vec![], vec![], vec![], vec![]);
        for _ in 0..n {
            let (m, k) = auth(rng.random(), &delta, &mut rng);
            mx.push(m);
            kx.push(k);
            let (m, k) = auth(rng.random(), &delta, &mut rng);
            my.push(m);
            ky.push(k);
            let (m, k) = auth(rng.random(), &delta, &mut rng);
            mr.push(m);
            kr.push(k);
        }
        let (ca, cb) = crate::transport::memory_pair();
        let d2 = delta.clone();
        let t = std::thread::spawn(move || {
            let mut rng = ChaCha20Rng::seed_from_u64(3);
            let leaky = laand_peer(&cb, &kx, &ky, &kr, &d2, &mut rng, &Default::default()).unwrap();
            let mut check = DeferredCheck::new(128);
            let out = combine_aands_peer(&cb, leaky, 3, &d2, &mut check).unwrap();
            check.flush(&cb, MsgType::DealFlush).unwrap();
            out
        });
        let leaky = laand_owner(&ca, &mx, &my, &mr, 128, &mut rng).unwrap();
        let mut check = DeferredCheck::new(128);
        let out = combine_aands_owner(&ca, leaky, 3, &mut check, &mut rng).unwrap();
        check.flush(&ca, MsgType::DealFlush).unwrap();
        let pout = t.join().unwrap();
        assert_eq!(out.len(), 10);
        for (o, p) in out.iter().zip(&pout) {
            assert!(valid(o, p, &delta));
        }
    }
}
