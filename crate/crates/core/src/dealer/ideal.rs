//! Trusted local dealer that samples correct material for both parties at
//! once. It is an oracle for tests, not a deployment mode.

use rand::{Rng, RngCore};

use super::store::{delta_commitment, MaterialCounts, MaterialStore};
use crate::aand::{AandOwner, AandPeer};
use crate::aot::{AotReceiver, AotSender};
use crate::auth::{GlobalKey, KeyBit, MacBit};
use crate::bitlinalg::BitVec;
use crate::Role;

fn auth<R: RngCore + ?Sized>(bit: bool, key_holder_delta: &GlobalKey, rng: &mut R) -> (MacBit, KeyBit) {
    let key = KeyBit { key: BitVec::random(key_holder_delta.kappa(), rng) };
    (MacBit { bit, mac: key.expected_mac(bit, key_holder_delta) }, key)
}

/// Samples matching stores for Alice and Bob.
pub fn ideal_stores<R: Rng + ?Sized>(
    kappa: usize,
    psi: usize,
    counts: MaterialCounts,
    session_id: [u8; 16],
    rng: &mut R,
) -> (MaterialStore, MaterialStore) {
    let deltas = [GlobalKey::random(kappa, rng), GlobalKey::random(kappa, rng)];
    let commits = [
        delta_commitment(&session_id, &deltas[0]),
        delta_commitment(&session_id, &deltas[1]),
    ];

    // Index 0 describes Alice's store, 1 Bob's.
    let mut own_abits: [Vec<MacBit>; 2] = Default::default();
    let mut peer_abits: [Vec<KeyBit>; 2] = Default::default();
    let mut own_aands: [Vec<AandOwner>; 2] = Default::default();
    let mut peer_aands: [Vec<AandPeer>; 2] = Default::default();
    let mut aots_send: [Vec<AotSender>; 2] = Default::default();
    let mut aots_recv: [Vec<AotReceiver>; 2] = Default::default();

    for owner in [Role::Alice, Role::Bob] {
        let (o, p) = (owner.index(), owner.peer().index());
        let holder = &deltas[p];
        for _ in 0..counts.abits[o] {
            let (m, k) = auth(rng.random(), holder, rng);
            own_abits[o].push(m);
            peer_abits[p].push(k);
        }
        for _ in 0..counts.aands[o] {
            let (x, y): (bool, bool) = (rng.random(), rng.random());
            let (mx, kx) = auth(x, holder, rng);
            let (my, ky) = auth(y, holder, rng);
            let (mz, kz) = auth(x & y, holder, rng);
            own_aands[o].push(AandOwner { x: mx, y: my, z: mz });
            peer_aands[p].push(AandPeer { x: kx, y: ky, z: kz });
        }
        // `owner` is the OT sender here.
        for _ in 0..counts.aots[o] {
            let (x0, x1, c): (bool, bool, bool) = (rng.random(), rng.random(), rng.random());
            let (mx0, kx0) = auth(x0, holder, rng);
            let (mx1, kx1) = auth(x1, holder, rng);
            let (mc, kc) = auth(c, &deltas[o], rng);
            let (mz, kz) = auth(if c { x1 } else { x0 }, &deltas[o], rng);
            aots_send[o].push(AotSender { x0: mx0, x1: mx1, c: kc, z: kz });
            aots_recv[p].push(AotReceiver { x0: kx0, x1: kx1, c: mc, z: mz });
        }
    }

    let [oa, ob] = own_abits;
    let [pa, pb] = peer_abits;
    let [na, nb] = own_aands;
    let [qa, qb] = peer_aands;
    let [sa, sb] = aots_send;
    let [ra, rb] = aots_recv;
    let [da, db] = deltas;
    (
        MaterialStore::new(Role::Alice, kappa, psi, session_id, da, commits, oa, pa, na, qa, sa, ra),
        MaterialStore::new(Role::Bob, kappa, psi, session_id, db, commits, ob, pb, nb, qb, sb, rb),
    )
}
