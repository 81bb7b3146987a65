//! Preprocessing: produces the authenticated material for both parties and
//! stores it for the online phase.

pub mod ideal;
mod store;

pub use store::{delta_commitment, Consumption, MaterialCounts, MaterialStore, HEADER_LEN};

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use rand::RngCore;

use crate::aand::{combine_aands_owner, combine_aands_peer, laand_owner, laand_peer};
use crate::abit::{produce_abits_key, produce_abits_mac};
use crate::aot::{
    combine_aots_receive, combine_aots_send, laot_receive, laot_send, LaotReceiverInput, LaotSenderInput,
};
use crate::auth::{DeferredCheck, GlobalKey, KeyBit, MacBit};
use crate::base_ot::{seed_ot_count, InsecureDealerOt};
use crate::bucket::bucket_size;
use crate::error::{Error, Phase, Result};
use crate::ro::{hash, Domain, HashCounts};
use crate::transport::{hello, Channel, MsgType, SessionParams};
use crate::Role;

/// Parameters of one dealing session.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DealerConfig {
    pub kappa: usize,
    pub psi: usize,
    /// Final record counts to produce.
    pub counts: MaterialCounts,
    /// Bucket size for both combiners; derived from `psi` when absent.
    pub bucket: Option<usize>,
}

impl DealerConfig {
    pub fn new(kappa: usize, psi: usize, counts: MaterialCounts) -> Self {
        DealerConfig { kappa, psi, counts, bucket: None }
    }

    pub fn with_bucket(mut self, bucket: usize) -> Self {
        self.bucket = Some(bucket);
        self
    }

    fn bucket_for(&self, ell: usize) -> usize {
        self.bucket.unwrap_or_else(|| bucket_size(ell, self.psi))
    }

    /// Bucket sizes `[aOT A->B, aOT B->A]` and `[aAND owned by A, by B]`.
    pub fn buckets(&self) -> ([usize; 2], [usize; 2]) {
        let c = &self.counts;
        (
            [self.bucket_for(c.aots[0]), self.bucket_for(c.aots[1])],
            [self.bucket_for(c.aands[0]), self.bucket_for(c.aands[1])],
        )
    }

    /// Leaky instances produced before combining, same layout as `counts`.
    pub fn leaky_counts(&self) -> MaterialCounts {
        let (bo, ba) = self.buckets();
        let c = &self.counts;
        MaterialCounts {
            abits: self.raw_abits(),
            aands: [ba[0] * c.aands[0], ba[1] * c.aands[1]],
            aots: [bo[0] * c.aots[0], bo[1] * c.aots[1]],
        }
    }

    /// aBits each party must own before any combining: the online aBits,
    /// three per leaky aAND it owns, two per leaky aOT it sends and two per
    /// leaky aOT it receives.
    pub fn raw_abits(&self) -> [usize; 2] {
        let (bo, ba) = self.buckets();
        let c = &self.counts;
        let per = |p: usize| {
            let q = 1 - p;
            c.abits[p] + 3 * ba[p] * c.aands[p] + 2 * bo[p] * c.aots[p] + 2 * bo[q] * c.aots[q]
        };
        [per(0), per(1)]
    }

    fn validate(&self) -> Result<()> {
        if self.kappa == 0 || self.kappa > 4096 {
            return Err(Error::Usage(format!("kappa {} out of range", self.kappa)));
        }
        if self.kappa > u16::MAX as usize || self.psi > u16::MAX as usize {
            return Err(Error::Usage("security parameter too large".into()));
        }
        if self.bucket == Some(0) {
            return Err(Error::Usage("bucket size must be positive".into()));
        }
        Ok(())
    }
}

/// What a dealing run did, for reporting.
#[derive(Debug, Clone)]
pub struct DealReport {
    pub counts: MaterialCounts,
    pub leaky: MaterialCounts,
    pub aot_buckets: [usize; 2],
    pub aand_buckets: [usize; 2],
    /// Seed OTs consumed, both directions together.
    pub seed_ots: usize,
    /// Hash calls made by this party, per domain.
    pub hashes: HashCounts,
    pub bytes_sent: u64,
    pub elapsed: Duration,
}

/// aBits received from the two aBit runs, consumed front to back in an order
/// both parties follow.
struct AbitPool {
    own: VecDeque<MacBit>,
    peer: VecDeque<KeyBit>,
}

impl AbitPool {
    fn own(&mut self, n: usize) -> Vec<MacBit> {
        self.own.drain(..n).collect()
    }

    fn peer(&mut self, n: usize) -> Vec<KeyBit> {
        self.peer.drain(..n).collect()
    }
}

/// Runs the whole preprocessing phase as `role`. On any failure nothing is
/// returned and the error carries the phase it happened in.
pub fn deal<R: RngCore>(
    ch: &dyn Channel,
    role: Role,
    cfg: &DealerConfig,
    session_id: [u8; 16],
    rng: &mut R,
) -> Result<(MaterialStore, DealReport)> {
    cfg.validate()?;
    let start = Instant::now();
    let hashes_before = HashCounts::now();
    let bytes_before = ch.stats().bytes_sent;
    let kappa = cfg.kappa;
    let params = SessionParams { kappa: kappa as u16, psi: cfg.psi as u16, session_id };
    // Bob adopts the session id Alice proposes.
    let session_id = hello(ch, role, &params).map_err(|e| e.in_phase(Phase::Handshake))?.session_id;

    let (aot_b, aand_b) = cfg.buckets();
    let raw = cfg.raw_abits();
    let me = role.index();
    let peer = role.peer().index();
    let c = cfg.counts;

    // aBits owned by Alice first, then by Bob. The key holder of each run
    // learns its global key there.
    let mut ot = InsecureDealerOt::new(hash(Domain::SeedOt, &session_id));
    let mut own = Vec::new();
    let mut delta = None;
    let mut peer_keys = Vec::new();
    for owner in [Role::Alice, Role::Bob] {
        let r = if owner == role {
            produce_abits_mac(ch, &mut ot, raw[owner.index()], kappa, rng).map(|m| own = m)
        } else {
            produce_abits_key(ch, &mut ot, raw[owner.index()], kappa, rng).map(|(d, k)| {
                delta = Some(d);
                peer_keys = k;
            })
        };
        r.map_err(|e| e.in_phase(Phase::Abits))?;
    }
    let delta: GlobalKey = delta.expect("key-holder run always yields a global key");
    let mut pool = AbitPool { own: own.into(), peer: peer_keys.into() };
    let mut check = DeferredCheck::new(kappa);

    // aOTs with Alice as sender, then with Bob as sender.
    let mut aots_send = Vec::new();
    let mut aots_recv = Vec::new();
    for sender in [Role::Alice, Role::Bob] {
        let s = sender.index();
        let n = aot_b[s] * c.aots[s];
        if sender == role {
            let (x0, x1) = (pool.own(n), pool.own(n));
            let (cc, r) = (pool.peer(n), pool.peer(n));
            let input = LaotSenderInput { x0: &x0, x1: &x1, c: &cc, r: &r };
            let leaky = laot_send(ch, input, &delta, rng, &Default::default())
                .map_err(|e| e.in_phase(Phase::LeakyOt))?;
            aots_send = combine_aots_send(ch, leaky, aot_b[s], &mut check)
                .map_err(|e| e.in_phase(Phase::CombineOt))?;
        } else {
            let (x0, x1) = (pool.peer(n), pool.peer(n));
            let (cc, r) = (pool.own(n), pool.own(n));
            let input = LaotReceiverInput { x0: &x0, x1: &x1, c: &cc, r: &r };
            let leaky = laot_receive(ch, input, &delta, rng, &Default::default())
                .map_err(|e| e.in_phase(Phase::LeakyOt))?;
            aots_recv = combine_aots_receive(ch, leaky, aot_b[s], &delta, &mut check, rng)
                .map_err(|e| e.in_phase(Phase::CombineOt))?;
        }
    }

    // aANDs owned by Alice, then by Bob.
    let mut own_aands = Vec::new();
    let mut peer_aands = Vec::new();
    for owner in [Role::Alice, Role::Bob] {
        let o = owner.index();
        let n = aand_b[o] * c.aands[o];
        if owner == role {
            let (x, y, r) = (pool.own(n), pool.own(n), pool.own(n));
            let leaky = laand_owner(ch, &x, &y, &r, kappa, rng).map_err(|e| e.in_phase(Phase::LeakyAnd))?;
            own_aands = combine_aands_owner(ch, leaky, aand_b[o], &mut check, rng)
                .map_err(|e| e.in_phase(Phase::CombineAnd))?;
        } else {
            let (x, y, r) = (pool.peer(n), pool.peer(n), pool.peer(n));
            let leaky = laand_peer(ch, &x, &y, &r, &delta, rng, &Default::default())
                .map_err(|e| e.in_phase(Phase::LeakyAnd))?;
            peer_aands = combine_aands_peer(ch, leaky, aand_b[o], &delta, &mut check)
                .map_err(|e| e.in_phase(Phase::CombineAnd))?;
        }
    }

    let own_abits = pool.own(c.abits[me]);
    let peer_abits = pool.peer(c.abits[peer]);
    debug_assert!(pool.own.is_empty() && pool.peer.is_empty());

    let commits = (|| -> Result<[[u8; 32]; 2]> {
        check.flush(ch, MsgType::DealFlush)?;
        let mine = delta_commitment(&session_id, &delta);
        ch.send(MsgType::DeltaCommit, &mine)?;
        let theirs: [u8; 32] = ch
            .recv(MsgType::DeltaCommit)?
            .try_into()
            .map_err(|_| Error::Malformed("global key commitment must be 32 bytes".into()))?;
        let mut commits = [[0u8; 32]; 2];
        commits[me] = mine;
        commits[peer] = theirs;
        Ok(commits)
    })()
    .map_err(|e| e.in_phase(Phase::Flush))?;

    let store = MaterialStore::new(
        role,
        kappa,
        cfg.psi,
        session_id,
        delta,
        commits,
        own_abits,
        peer_abits,
        own_aands,
        peer_aands,
        aots_send,
        aots_recv,
    );
    let report = DealReport {
        counts: c,
        leaky: cfg.leaky_counts(),
        aot_buckets: aot_b,
        aand_buckets: aand_b,
        seed_ots: 2 * seed_ot_count(kappa),
        hashes: HashCounts::now().since(&hashes_before),
        bytes_sent: ch.stats().bytes_sent - bytes_before,
        elapsed: start.elapsed(),
    };
    Ok((store, report))
}

/// Full-scan consistency check of two stores from the same session: every
/// MAC must equal key XOR bit times the holder's global key, and the
/// triples and OTs must satisfy their relations. Returns the first problem.
pub fn verify_pair(alice: &MaterialStore, bob: &MaterialStore) -> std::result::Result<(), String> {
    if alice.role != Role::Alice || bob.role != Role::Bob {
        return Err("stores must be Alice's and Bob's".into());
    }
    if alice.session_commitment() != bob.session_commitment() {
        return Err("session commitments differ".into());
    }
    let stores = [alice, bob];
    for o in 0..2 {
        let (own, other) = (stores[o], stores[1 - o]);
        let d = &other.delta;
        let ok = |m: &MacBit, k: &KeyBit| k.verify(m.bit, &m.mac, d);
        if own.own_abits.len() != other.peer_abits.len() {
            return Err(format!("aBit count mismatch for owner {o}"));
        }
        for (i, (m, k)) in own.own_abits.iter().zip(&other.peer_abits).enumerate() {
            if !ok(m, k) {
                return Err(format!("aBit {i} of owner {o} has a bad MAC"));
            }
        }
        if own.own_aands.len() != other.peer_aands.len() {
            return Err(format!("aAND count mismatch for owner {o}"));
        }
        for (i, (t, k)) in own.own_aands.iter().zip(&other.peer_aands).enumerate() {
            if !(ok(&t.x, &k.x) && ok(&t.y, &k.y) && ok(&t.z, &k.z)) {
                return Err(format!("aAND {i} of owner {o} has a bad MAC"));
            }
            if t.z.bit != (t.x.bit & t.y.bit) {
                return Err(format!("aAND {i} of owner {o} is not a product"));
            }
        }
        if own.aots_send.len() != other.aots_recv.len() {
            return Err(format!("aOT count mismatch for sender {o}"));
        }
        for (i, (s, r)) in own.aots_send.iter().zip(&other.aots_recv).enumerate() {
            let sender_ok = ok(&s.x0, &r.x0) && ok(&s.x1, &r.x1);
            let recv_ok = s.c.verify(r.c.bit, &r.c.mac, &own.delta) && s.z.verify(r.z.bit, &r.z.mac, &own.delta);
            if !(sender_ok && recv_ok) {
                return Err(format!("aOT {i} of sender {o} has a bad MAC"));
            }
            let chosen = if r.c.bit { s.x1.bit } else { s.x0.bit };
            if r.z.bit != chosen {
                return Err(format!("aOT {i} of sender {o} delivered the wrong message"));
            }
        }
    }
    Ok(())
}
