//! Online phase: evaluates a circuit on authenticated XOR shares using the
//! dealt material.
//!
//! Every wire holds an [`AuthShare`]. XOR and INV are local. An AND gate
//! consumes one aAND and one aOT per party and one aBit per party; its
//! reveals are batched per chunk in two rounds and MAC-checked lazily. Each
//! output round flushes the accumulated MAC check before any share leaves.

use std::ops::BitXor;
use std::time::{Duration, Instant};

use crate::auth::{DeferredCheck, GlobalKey, KeyBit, MacBit};
use crate::bitlinalg::BitVec;
use crate::circuit::{Circuit, GateKind, OutputTo, DEFAULT_CHUNK};
use crate::dealer::{Consumption, MaterialStore};
use crate::error::{Abort, CircuitError, Phase, Result};
use crate::transport::{Channel, MsgType};
use crate::wire::{recv_bits, send_bits};
use crate::Role;

/// One party's half of an authenticated XOR sharing: its own share bit with
/// MAC, and its key on the peer's share bit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuthShare {
    pub mine: MacBit,
    pub peer: KeyBit,
}

impl AuthShare {
    /// Sharing of a public constant: Alice holds the value, Bob holds zero.
    pub fn constant(c: bool, role: Role, delta: &GlobalKey) -> Self {
        let kappa = delta.kappa();
        match role {
            Role::Alice => AuthShare { mine: MacBit::constant(c, kappa), peer: KeyBit::constant(false, delta) },
            Role::Bob => AuthShare { mine: MacBit::constant(false, kappa), peer: KeyBit::constant(c, delta) },
        }
    }

    /// Adds a public constant. Alice flips her share; Bob shifts his key.
    pub fn xor_const(&self, c: bool, role: Role, delta: &GlobalKey) -> Self {
        match role {
            Role::Alice => AuthShare { mine: self.mine.xor_const(c), peer: self.peer.clone() },
            Role::Bob => AuthShare { mine: self.mine.clone(), peer: self.peer.xor_const(c, delta) },
        }
    }
}

impl BitXor for &AuthShare {
    type Output = AuthShare;
    fn bitxor(self, rhs: &AuthShare) -> AuthShare {
        AuthShare { mine: &self.mine ^ &rhs.mine, peer: &self.peer ^ &rhs.peer }
    }
}

/// A deviation to inject at one of our reveal sites, counted from zero in
/// the order reveals are made.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Send the complement of the bit with the honest MAC.
    FlipBit,
    /// Send the honest bit with the first MAC bit flipped.
    FlipMac,
    /// Send the complement of the bit with `guess` XORed into the MAC.
    Forge(BitVec),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FaultPlan {
    pub at: Option<(usize, Fault)>,
}

impl FaultPlan {
    pub fn none() -> Self {
        FaultPlan::default()
    }

    pub fn at(site: usize, fault: Fault) -> Self {
        FaultPlan { at: Some((site, fault)) }
    }
}

#[derive(Clone, Debug)]
pub struct EvalOptions {
    pub chunk: usize,
    pub fault: FaultPlan,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { chunk: DEFAULT_CHUNK, fault: FaultPlan::none() }
    }
}

#[derive(Clone, Debug, Default)]
pub struct EvalStats {
    pub and_gates: usize,
    /// AND batches, each costing two announcement rounds.
    pub batches: usize,
    /// Share bits we revealed inside AND gates (five per gate).
    pub announced_bits: usize,
    /// Reveal sites we used, including output reveals.
    pub reveal_sites: usize,
    pub output_rounds: usize,
    pub bytes_sent: u64,
    pub bytes_received: u64,
    pub consumed: Consumption,
    pub elapsed: Duration,
}

impl EvalStats {
    pub fn gates_per_second(&self, gates: usize) -> f64 {
        gates as f64 / self.elapsed.as_secs_f64().max(1e-9)
    }
}

#[derive(Clone, Debug)]
pub struct EvalOutput {
    /// Output bits we learned, in wire order.
    pub outputs: BitVec,
    /// Output positions (0-based among all outputs) of `outputs`.
    pub indices: Vec<usize>,
    pub stats: EvalStats,
}

/// Material for one AND gate, taken when the gate is queued.
struct AndMaterial {
    own_and: crate::aand::AandOwner,
    peer_and: crate::aand::AandPeer,
    send: crate::aot::AotSender,
    recv: crate::aot::AotReceiver,
    own_r: MacBit,
    peer_r: KeyBit,
}

/// An online session between the two parties over one channel.
pub struct Session<'a, C: Channel + ?Sized> {
    ch: &'a C,
    role: Role,
    store: &'a mut MaterialStore,
    delta: GlobalKey,
    check: DeferredCheck,
    fault: FaultPlan,
    stats: EvalStats,
}

impl<'a, C: Channel + ?Sized> Session<'a, C> {
    pub fn new(ch: &'a C, store: &'a mut MaterialStore, fault: FaultPlan) -> Self {
        let delta = store.delta().clone();
        Session {
            ch,
            role: store.role(),
            check: DeferredCheck::new(store.kappa()),
            store,
            delta,
            fault,
            stats: EvalStats::default(),
        }
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn delta(&self) -> &GlobalKey {
        &self.delta
    }

    pub fn stats(&self) -> &EvalStats {
        &self.stats
    }

    /// Checks that both stores come from the same dealing session.
    pub fn handshake(&mut self) -> Result<()> {
        self.store.handshake(self.ch)
    }

    fn reveal(&mut self, x: &MacBit) -> (bool, BitVec) {
        let site = self.stats.reveal_sites;
        self.stats.reveal_sites += 1;
        match &self.fault.at {
            Some((s, f)) if *s == site => match f {
                Fault::FlipBit => (!x.bit, x.mac.clone()),
                Fault::FlipMac => {
                    let mut m = x.mac.clone();
                    m.flip(0);
                    (x.bit, m)
                }
                Fault::Forge(guess) => (!x.bit, &x.mac ^ guess),
            },
            _ => (x.bit, x.mac.clone()),
        }
    }

    /// Reveals a bit we own, deferring its MAC check.
    fn reveal_deferred(&mut self, x: &MacBit) -> bool {
        let (bit, mac) = self.reveal(x);
        self.check.reveal_with_mac(bit, &mac)
    }

    /// Shares inputs: we supply `mine`, the peer supplies `peer_count` bits.
    /// Returns our inputs' shares and the peer's, in that order.
    pub fn inputs(&mut self, mine: &BitVec, peer_count: usize) -> Result<(Vec<AuthShare>, Vec<AuthShare>)> {
        let masks: Vec<MacBit> = (0..mine.len()).map(|_| self.store.take_own_abit()).collect::<Result<_>>()?;
        let peer_masks: Vec<KeyBit> = (0..peer_count).map(|_| self.store.take_peer_abit()).collect::<Result<_>>()?;
        let announced: BitVec = masks.iter().zip(mine.iter()).map(|(m, x)| m.bit ^ x).collect();
        send_bits(self.ch, MsgType::RtAnnounceBatch, &announced)?;
        let theirs = recv_bits(self.ch, MsgType::RtAnnounceBatch, peer_count)?;
        let kappa = self.delta.kappa();
        let own = masks
            .into_iter()
            .zip(announced.iter())
            .map(|(m, a)| AuthShare { mine: m, peer: KeyBit::constant(a, &self.delta) })
            .collect();
        let peer = peer_masks
            .into_iter()
            .zip(theirs.iter())
            .map(|(k, a)| AuthShare { mine: MacBit::constant(a, kappa), peer: k })
            .collect();
        Ok((own, peer))
    }

    /// A sharing of a uniformly random bit nobody knows.
    pub fn rand_share(&mut self) -> Result<AuthShare> {
        Ok(AuthShare { mine: self.store.take_own_abit()?, peer: self.store.take_peer_abit()? })
    }

    fn take_and_material(&mut self) -> Result<AndMaterial> {
        Ok(AndMaterial {
            own_and: self.store.take_own_aand()?,
            peer_and: self.store.take_peer_aand()?,
            send: self.store.take_aot_send()?,
            recv: self.store.take_aot_recv()?,
            own_r: self.store.take_own_abit()?,
            peer_r: self.store.take_peer_abit()?,
        })
    }

    /// Multiplies a batch of shared pairs in two announcement rounds.
    pub fn and_batch(&mut self, pairs: &[(AuthShare, AuthShare)]) -> Result<Vec<AuthShare>> {
        let mats: Vec<AndMaterial> = pairs.iter().map(|_| self.take_and_material()).collect::<Result<_>>()?;
        self.and_with(pairs, &mats)
    }

    fn and_with(&mut self, pairs: &[(AuthShare, AuthShare)], mats: &[AndMaterial]) -> Result<Vec<AuthShare>> {
        let n = pairs.len();
        if n == 0 {
            return Ok(Vec::new());
        }
        // Round 1: local-product masks, our receiver bit d, our sender bit f.
        let mut round1 = BitVec::zeros(4 * n);
        for (i, ((x, y), m)) in pairs.iter().zip(mats).enumerate() {
            let vals = [
                &m.own_and.x ^ &x.mine,
                &m.own_and.y ^ &y.mine,
                &m.recv.c ^ &y.mine,
                &(&m.send.x0 ^ &m.send.x1) ^ &x.mine,
            ];
            for (k, v) in vals.iter().enumerate() {
                let b = self.reveal_deferred(v);
                round1.set(4 * i + k, b);
            }
        }
        send_bits(self.ch, MsgType::RtAnnounceBatch, &round1)?;
        let peer1 = recv_bits(self.ch, MsgType::RtAnnounceBatch, 4 * n)?;
        for (i, ((x, y), m)) in pairs.iter().zip(mats).enumerate() {
            let keys = [
                &m.peer_and.x ^ &x.peer,
                &m.peer_and.y ^ &y.peer,
                &m.send.c ^ &y.peer,
                &(&m.recv.x0 ^ &m.recv.x1) ^ &x.peer,
            ];
            for (k, key) in keys.iter().enumerate() {
                self.check.expect(peer1.get(4 * i + k), key, &self.delta);
            }
        }

        // Round 2: our sender bit g, which depends on the peer's d.
        let mut round2 = BitVec::zeros(n);
        for (i, ((x, _), m)) in pairs.iter().zip(mats).enumerate() {
            let d_peer = peer1.get(4 * i + 2);
            let g = &(&m.own_r ^ &m.send.x0) ^ &x.mine.scale(d_peer);
            let b = self.reveal_deferred(&g);
            round2.set(i, b);
        }
        send_bits(self.ch, MsgType::RtRevealBatch, &round2)?;
        let peer2 = recv_bits(self.ch, MsgType::RtRevealBatch, n)?;

        let mut out = Vec::with_capacity(n);
        for (i, ((x, y), m)) in pairs.iter().zip(mats).enumerate() {
            let at = |v: &BitVec, k: usize| v.get(4 * i + k);
            let d_mine = at(&round1, 2);
            let g_peer = peer2.get(i);
            let g_key = &(&m.peer_r ^ &m.recv.x0) ^ &x.peer.scale(d_mine);
            self.check.expect(g_peer, &g_key, &self.delta);

            // Our local product x_me * y_me, owned by us.
            let (f, g) = (at(&round1, 0), at(&round1, 1));
            let xy_me = (&(&m.own_and.z ^ &y.mine.scale(f)) ^ &x.mine.scale(g)).xor_const(f & g);
            // The peer's local product, under our key.
            let (fp, gp) = (at(&peer1, 0), at(&peer1, 1));
            let xy_peer =
                (&(&m.peer_and.z ^ &y.peer.scale(fp)) ^ &x.peer.scale(gp)).xor_const(fp & gp, &self.delta);
            // Cross terms: our output of the OT the peer sends, and the
            // peer's output of the OT we send.
            let s_me = (&m.recv.z ^ &m.recv.c.scale(at(&peer1, 3))).xor_const(g_peer);
            let s_peer = (&m.send.z ^ &m.send.c.scale(at(&round1, 3))).xor_const(round2.get(i), &self.delta);

            out.push(AuthShare {
                mine: &(&m.own_r ^ &s_me) ^ &xy_me,
                peer: &(&m.peer_r ^ &s_peer) ^ &xy_peer,
            });
        }
        self.stats.and_gates += n;
        self.stats.batches += 1;
        self.stats.announced_bits += 5 * n;
        Ok(out)
    }

    /// Flushes the deferred MAC check.
    pub fn flush_check(&mut self) -> Result<()> {
        self.check.flush(self.ch, MsgType::RtAccFlush)
    }

    /// One output round: flushes the MAC check, then each party sends its
    /// share and MAC for every output the peer should learn. Returns the
    /// outputs we learned, `None` where the output is not ours.
    pub fn outputs(&mut self, shares: &[(AuthShare, OutputTo)]) -> Result<Vec<Option<bool>>> {
        self.flush_check()?;
        self.stats.output_rounds += 1;
        let kappa = self.delta.kappa();
        let peer = self.role.peer();
        let mut payload = BitVec::zeros(0);
        for (s, to) in shares {
            if to.includes(peer) {
                let (bit, mac) = self.reveal(&s.mine);
                payload.push(bit);
                payload.extend(&mac);
            }
        }
        send_bits(self.ch, MsgType::RtOutput, &payload)?;
        let n_mine = shares.iter().filter(|(_, to)| to.includes(self.role)).count();
        let theirs = recv_bits(self.ch, MsgType::RtOutput, n_mine * (1 + kappa))?;
        let mut k = 0;
        let mut out = Vec::with_capacity(shares.len());
        for (s, to) in shares {
            if !to.includes(self.role) {
                out.push(None);
                continue;
            }
            let bit = theirs.get(k * (1 + kappa));
            let mac = theirs.slice(k * (1 + kappa) + 1, kappa);
            k += 1;
            if !s.peer.verify(bit, &mac, &self.delta) {
                return Err(Abort::MacCheck.into());
            }
            out.push(Some(s.mine.bit ^ bit));
        }
        Ok(out)
    }

    fn run(&mut self, circuit: &Circuit, input: &BitVec, chunk: usize) -> Result<(BitVec, Vec<usize>)> {
        let h = &circuit.header;
        let (me, peer) = (self.role.index(), self.role.peer().index());
        if input.len() != h.inputs[me] {
            return Err(CircuitError::InputLength { party: self.role, expected: h.inputs[me], got: input.len() }.into());
        }
        let mut wires: Vec<Option<AuthShare>> = vec![None; h.n_wires];
        let (own, theirs) = self.inputs(input, h.inputs[peer])?;
        let (mut own, mut theirs) = (own.into_iter(), theirs.into_iter());
        for role in [Role::Alice, Role::Bob] {
            let src = if role == self.role { &mut own } else { &mut theirs };
            let start = h.first_input(role);
            for (w, s) in (start..start + h.inputs[role.index()]).zip(src) {
                wires[w] = Some(s);
            }
        }

        let mut pending: Vec<bool> = vec![false; h.n_wires];
        let mut queue: Vec<(u32, AuthShare, AuthShare, AndMaterial)> = Vec::new();
        for gates in circuit.chunks(chunk) {
            for g in gates {
                if g.in_wires().iter().any(|&w| pending[w as usize]) {
                    self.flush_ands(&mut queue, &mut wires, &mut pending)?;
                }
                let get = |w: u32| -> Result<&AuthShare> {
                    wires[w as usize]
                        .as_ref()
                        .ok_or_else(|| CircuitError::UndefinedWire { gate: 0, wire: w as usize }.into())
                };
                let a = get(g.inputs[0])?;
                let value = match g.kind {
                    GateKind::Xor => Some(a ^ get(g.inputs[1])?),
                    GateKind::Inv => Some(a.xor_const(true, self.role, &self.delta)),
                    GateKind::Eqw => Some(a.clone()),
                    GateKind::And => {
                        let (x, y) = (a.clone(), get(g.inputs[1])?.clone());
                        let mat = self.take_and_material()?;
                        queue.push((g.out, x, y, mat));
                        pending[g.out as usize] = true;
                        None
                    }
                };
                if value.is_some() {
                    wires[g.out as usize] = value;
                }
            }
            self.flush_ands(&mut queue, &mut wires, &mut pending)?;
        }

        let first = h.first_output();
        let shares: Vec<(AuthShare, OutputTo)> = (0..h.n_outputs())
            .map(|k| {
                let s = wires[first + k]
                    .clone()
                    .ok_or(CircuitError::UndefinedWire { gate: circuit.gates.len(), wire: first + k })?;
                Ok((s, h.output_to[k]))
            })
            .collect::<Result<_>>()?;
        let learned = self.outputs(&shares)?;
        let mut bits = BitVec::zeros(0);
        let mut indices = Vec::new();
        for (k, b) in learned.into_iter().enumerate() {
            if let Some(b) = b {
                bits.push(b);
                indices.push(k);
            }
        }
        Ok((bits, indices))
    }

    fn flush_ands(
        &mut self,
        queue: &mut Vec<(u32, AuthShare, AuthShare, AndMaterial)>,
        wires: &mut [Option<AuthShare>],
        pending: &mut [bool],
    ) -> Result<()> {
        if queue.is_empty() {
            return Ok(());
        }
        let items = std::mem::take(queue);
        let (meta, mats): (Vec<_>, Vec<_>) = items.into_iter().map(|(o, x, y, m)| ((o, (x, y)), m)).unzip();
        let (outs, pairs): (Vec<u32>, Vec<_>) = meta.into_iter().unzip();
        let results = self.and_with(&pairs, &mats)?;
        for (o, s) in outs.into_iter().zip(results) {
            pending[o as usize] = false;
            wires[o as usize] = Some(s);
        }
        Ok(())
    }
}

/// Evaluates `circuit` as `store.role()` with our input bits `input`. On any
/// error the channel is closed.
pub fn evaluate<C: Channel + ?Sized>(
    ch: &C,
    circuit: &Circuit,
    input: &BitVec,
    store: &mut MaterialStore,
    opts: &EvalOptions,
) -> Result<EvalOutput> {
    let start = Instant::now();
    let before = ch.stats();
    let consumed_before = store.consumed();
    let mut session = Session::new(ch, store, opts.fault.clone());
    let result = session
        .handshake()
        .map_err(|e| e.in_phase(Phase::Handshake))
        .and_then(|_| session.run(circuit, input, opts.chunk).map_err(|e| e.in_phase(Phase::Online)));
    let mut stats = session.stats.clone();
    let (outputs, indices) = match result {
        Ok(v) => v,
        Err(e) => {
            ch.close();
            return Err(e);
        }
    };
    let after = ch.stats();
    let consumed = store.consumed();
    stats.bytes_sent = after.bytes_sent - before.bytes_sent;
    stats.bytes_received = after.bytes_received - before.bytes_received;
    stats.consumed = diff(&consumed, &consumed_before);
    stats.elapsed = start.elapsed();
    Ok(EvalOutput { outputs, indices, stats })
}

fn diff(a: &Consumption, b: &Consumption) -> Consumption {
    let sub = |x: [usize; 2], y: [usize; 2]| [x[0] - y[0], x[1] - y[1]];
    Consumption { abits: sub(a.abits, b.abits), aands: sub(a.aands, b.aands), aots: sub(a.aots, b.aots) }
}
