use std::io::{Read, Write};
use std::path::Path;

use crate::aand::{AandOwner, AandPeer};
use crate::aot::{AotReceiver, AotSender};
use crate::auth::{GlobalKey, KeyBit, MacBit};
use crate::bitlinalg::BitVec;
use crate::error::{Abort, Error, MaterialKind, Result};
use crate::ro::{hash_parts, Digest, Domain};
use crate::transport::{Channel, MsgType};
use crate::Role;

const MAGIC: &[u8; 8] = b"TINYOTMS";
const VERSION: u16 = 1;
/// Size of the fixed file header.
pub const HEADER_LEN: usize = 64;

/// Record counts, indexed by owning party (aBits, aANDs) or by OT sender (aOTs).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MaterialCounts {
    pub abits: [usize; 2],
    pub aands: [usize; 2],
    pub aots: [usize; 2],
}

impl MaterialCounts {
    /// What evaluating a circuit consumes: per AND gate one aBit, one aAND
    /// and one aOT in each direction for each party; one aBit per input bit.
    pub fn for_circuit(and_gates: usize, inputs_alice: usize, inputs_bob: usize) -> Self {
        MaterialCounts {
            abits: [and_gates + inputs_alice, and_gates + inputs_bob],
            aands: [and_gates, and_gates],
            aots: [and_gates, and_gates],
        }
    }

    fn canonical(&self) -> [u64; 6] {
        [
            self.abits[0] as u64,
            self.abits[1] as u64,
            self.aands[0] as u64,
            self.aands[1] as u64,
            self.aots[0] as u64,
            self.aots[1] as u64,
        ]
    }
}

/// Commitment to a party's global key, bound to the session.
pub fn delta_commitment(session_id: &[u8; 16], delta: &GlobalKey) -> Digest {
    hash_parts(Domain::DeltaCommit, &[session_id, &delta.0.to_bytes()])
}

/// One party's preprocessed material with consumption cursors.
#[derive(Clone, Debug)]
pub struct MaterialStore {
    pub(crate) role: Role,
    pub(crate) kappa: usize,
    pub(crate) psi: usize,
    pub(crate) session_id: [u8; 16],
    pub(crate) delta: GlobalKey,
    pub(crate) delta_commits: [Digest; 2],
    pub(crate) own_abits: Vec<MacBit>,
    pub(crate) peer_abits: Vec<KeyBit>,
    pub(crate) own_aands: Vec<AandOwner>,
    pub(crate) peer_aands: Vec<AandPeer>,
    pub(crate) aots_send: Vec<AotSender>,
    pub(crate) aots_recv: Vec<AotReceiver>,
    cursors: [usize; 6],
}

/// Records consumed so far, in the same layout as [`MaterialCounts`].
pub type Consumption = MaterialCounts;

macro_rules! take {
    ($name:ident, $field:ident, $idx:expr, $ty:ty, $kind:expr) => {
        pub fn $name(&mut self) -> Result<$ty> {
            let i = self.cursors[$idx];
            let item = self.$field.get(i).cloned().ok_or(Error::OutOfMaterial($kind))?;
            self.cursors[$idx] += 1;
            Ok(item)
        }
    };
}

impl MaterialStore {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        role: Role,
        kappa: usize,
        psi: usize,
        session_id: [u8; 16],
        delta: GlobalKey,
        delta_commits: [Digest; 2],
        own_abits: Vec<MacBit>,
        peer_abits: Vec<KeyBit>,
        own_aands: Vec<AandOwner>,
        peer_aands: Vec<AandPeer>,
        aots_send: Vec<AotSender>,
        aots_recv: Vec<AotReceiver>,
    ) -> Self {
        MaterialStore {
            role,
            kappa,
            psi,
            session_id,
            delta,
            delta_commits,
            own_abits,
            peer_abits,
            own_aands,
            peer_aands,
            aots_send,
            aots_recv,
            cursors: [0; 6],
        }
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn psi(&self) -> usize {
        self.psi
    }

    pub fn session_id(&self) -> [u8; 16] {
        self.session_id
    }

    /// Our global key, used to verify bits the peer owns.
    pub fn delta(&self) -> &GlobalKey {
        &self.delta
    }

    take!(take_own_abit, own_abits, 0, MacBit, MaterialKind::Abit);
    take!(take_peer_abit, peer_abits, 1, KeyBit, MaterialKind::Abit);
    take!(take_own_aand, own_aands, 2, AandOwner, MaterialKind::Aand);
    take!(take_peer_aand, peer_aands, 3, AandPeer, MaterialKind::Aand);
    take!(take_aot_send, aots_send, 4, AotSender, MaterialKind::Aot);
    take!(take_aot_recv, aots_recv, 5, AotReceiver, MaterialKind::Aot);

    /// Record totals in party-indexed layout.
    pub fn counts(&self) -> MaterialCounts {
        self.by_party([
            self.own_abits.len(),
            self.peer_abits.len(),
            self.own_aands.len(),
            self.peer_aands.len(),
            self.aots_send.len(),
            self.aots_recv.len(),
        ])
    }

    /// Records consumed so far in party-indexed layout.
    pub fn consumed(&self) -> Consumption {
        self.by_party(self.cursors)
    }

    fn by_party(&self, v: [usize; 6]) -> MaterialCounts {
        let (me, peer) = (self.role.index(), self.role.peer().index());
        let mut c = MaterialCounts::default();
        c.abits[me] = v[0];
        c.abits[peer] = v[1];
        c.aands[me] = v[2];
        c.aands[peer] = v[3];
        c.aots[me] = v[4];
        c.aots[peer] = v[5];
        c
    }

    /// Commitment binding the session id and key commitments to the counts.
    pub fn session_commitment(&self) -> Digest {
        let counts: Vec<u8> = self
            .counts()
            .canonical()
            .iter()
            .flat_map(|c| c.to_le_bytes())
            .collect();
        hash_parts(
            Domain::Store,
            &[&self.session_id, &self.delta_commits[0], &self.delta_commits[1], &counts],
        )
    }

    /// Checks that our own key matches the commitment recorded at dealing time.
    pub fn verify_integrity(&self) -> Result<()> {
        if delta_commitment(&self.session_id, &self.delta) != self.delta_commits[self.role.index()] {
            return Err(Abort::Handshake("global key does not match its commitment".into()).into());
        }
        Ok(())
    }

    /// Online-phase handshake: both stores must come from the same dealing
    /// session, with opposite roles.
    pub fn handshake<C: Channel + ?Sized>(&self, ch: &C) -> Result<()> {
        self.verify_integrity()?;
        let mine = self.handshake_bytes();
        ch.send(MsgType::RtHandshake, &mine)?;
        let theirs = ch.recv(MsgType::RtHandshake)?;
        if theirs.len() != mine.len() {
            return Err(Error::Malformed("handshake length".into()));
        }
        if theirs[0] != self.role.peer().index() as u8 {
            return Err(Abort::Handshake("both stores claim the same role".into()).into());
        }
        if theirs[1..] != mine[1..] {
            return Err(Abort::Handshake("material stores come from different sessions".into()).into());
        }
        Ok(())
    }

    fn handshake_bytes(&self) -> Vec<u8> {
        let mut out = vec![self.role.index() as u8];
        out.extend_from_slice(&(self.kappa as u16).to_be_bytes());
        out.extend_from_slice(&(self.psi as u16).to_be_bytes());
        out.extend_from_slice(&self.session_id);
        out.extend_from_slice(&self.session_commitment());
        out
    }

    fn header(&self) -> [u8; HEADER_LEN] {
        let mut h = [0u8; HEADER_LEN];
        h[..8].copy_from_slice(MAGIC);
        h[8..10].copy_from_slice(&VERSION.to_le_bytes());
        h[10] = self.role.index() as u8;
        h[12..14].copy_from_slice(&(self.kappa as u16).to_le_bytes());
        h[14..16].copy_from_slice(&(self.psi as u16).to_le_bytes());
        h[16..32].copy_from_slice(&self.session_id);
        h[32..64].copy_from_slice(&self.session_commitment());
        h
    }

    /// Serializes header and records. Deterministic for identical contents.
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(&self.header())?;
        let own_counts = [
            self.own_abits.len(),
            self.peer_abits.len(),
            self.own_aands.len(),
            self.peer_aands.len(),
            self.aots_send.len(),
            self.aots_recv.len(),
        ];
        for c in own_counts {
            w.write_all(&(c as u64).to_le_bytes())?;
        }
        w.write_all(&self.delta_commits[0])?;
        w.write_all(&self.delta_commits[1])?;
        w.write_all(&self.delta.0.to_bytes())?;

        let mut sec = BitVec::zeros(0);
        let put_mac = |s: &mut BitVec, m: &MacBit| {
            s.push(m.bit);
            s.extend(&m.mac);
        };
        self.own_abits.iter().for_each(|m| put_mac(&mut sec, m));
        flush_section(w, &mut sec)?;
        self.peer_abits.iter().for_each(|k| sec.extend(&k.key));
        flush_section(w, &mut sec)?;
        for t in &self.own_aands {
            put_mac(&mut sec, &t.x);
            put_mac(&mut sec, &t.y);
            put_mac(&mut sec, &t.z);
        }
        flush_section(w, &mut sec)?;
        for t in &self.peer_aands {
            sec.extend(&t.x.key);
            sec.extend(&t.y.key);
            sec.extend(&t.z.key);
        }
        flush_section(w, &mut sec)?;
        for q in &self.aots_send {
            put_mac(&mut sec, &q.x0);
            put_mac(&mut sec, &q.x1);
            sec.extend(&q.c.key);
            sec.extend(&q.z.key);
        }
        flush_section(w, &mut sec)?;
        for q in &self.aots_recv {
            sec.extend(&q.x0.key);
            sec.extend(&q.x1.key);
            put_mac(&mut sec, &q.c);
            put_mac(&mut sec, &q.z);
        }
        flush_section(w, &mut sec)?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut h = [0u8; HEADER_LEN];
        r.read_exact(&mut h)?;
        if &h[..8] != MAGIC {
            return Err(Error::Malformed("not a material store".into()));
        }
        let version = u16::from_le_bytes([h[8], h[9]]);
        if version != VERSION {
            return Err(Error::Malformed(format!("unsupported store version {version}")));
        }
        let role = match h[10] {
            0 => Role::Alice,
            1 => Role::Bob,
            other => return Err(Error::Malformed(format!("bad role byte {other}"))),
        };
        let kappa = u16::from_le_bytes([h[12], h[13]]) as usize;
        let psi = u16::from_le_bytes([h[14], h[15]]) as usize;
        let mut session_id = [0u8; 16];
        session_id.copy_from_slice(&h[16..32]);
        if kappa == 0 {
            return Err(Error::Malformed("kappa is zero".into()));
        }

        let mut counts = [0usize; 6];
        for c in &mut counts {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            *c = usize::try_from(u64::from_le_bytes(b))
                .map_err(|_| Error::Malformed("record count".into()))?;
        }
        let mut delta_commits = [[0u8; 32]; 2];
        r.read_exact(&mut delta_commits[0])?;
        r.read_exact(&mut delta_commits[1])?;
        let mut db = vec![0u8; kappa.div_ceil(8)];
        r.read_exact(&mut db)?;
        let delta = GlobalKey(BitVec::from_bytes(&db, kappa)?);

        let mut reader = SectionReader { r, kappa };
        let mut s = reader.section(counts[0] * (1 + kappa))?;
        let own_abits = (0..counts[0]).map(|_| s.mac()).collect();
        let mut s = reader.section(counts[1] * kappa)?;
        let peer_abits = (0..counts[1]).map(|_| s.key()).collect();
        let mut s = reader.section(counts[2] * 3 * (1 + kappa))?;
        let own_aands = (0..counts[2])
            .map(|_| AandOwner { x: s.mac(), y: s.mac(), z: s.mac() })
            .collect();
        let mut s = reader.section(counts[3] * 3 * kappa)?;
        let peer_aands = (0..counts[3])
            .map(|_| AandPeer { x: s.key(), y: s.key(), z: s.key() })
            .collect();
        let mut s = reader.section(counts[4] * (2 + 4 * kappa))?;
        let aots_send = (0..counts[4])
            .map(|_| AotSender { x0: s.mac(), x1: s.mac(), c: s.key(), z: s.key() })
            .collect();
        let mut s = reader.section(counts[5] * (2 + 4 * kappa))?;
        let aots_recv = (0..counts[5])
            .map(|_| AotReceiver { x0: s.key(), x1: s.key(), c: s.mac(), z: s.mac() })
            .collect();
        let mut rest = [0u8; 1];
        if reader.r.read(&mut rest)? != 0 {
            return Err(Error::Malformed("trailing bytes after records".into()));
        }

        let store = MaterialStore::new(
            role,
            kappa,
            psi,
            session_id,
            delta,
            delta_commits,
            own_abits,
            peer_abits,
            own_aands,
            peer_aands,
            aots_send,
            aots_recv,
        );
        if store.session_commitment()[..] != h[32..64] {
            return Err(Abort::Handshake("store header commitment does not match its contents".into()).into());
        }
        Ok(store)
    }

    /// Writes to `path`, refusing to overwrite unless `force` is set.
    pub fn save(&self, path: &Path, force: bool) -> Result<()> {
        if path.exists() && !force {
            return Err(Error::Usage(format!("{} exists; pass --force to overwrite", path.display())));
        }
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut r)
    }
}

fn flush_section<W: Write>(w: &mut W, sec: &mut BitVec) -> Result<()> {
    w.write_all(&sec.to_bytes())?;
    *sec = BitVec::zeros(0);
    Ok(())
}

struct SectionReader<'a, R> {
    r: &'a mut R,
    kappa: usize,
}

impl<R: Read> SectionReader<'_, R> {
    fn section(&mut self, bits: usize) -> Result<Cursor> {
        let mut buf = vec![0u8; bits.div_ceil(8)];
        self.r.read_exact(&mut buf)?;
        Ok(Cursor { bits: BitVec::from_bytes(&buf, bits)?, pos: 0, kappa: self.kappa })
    }
}

struct Cursor {
    bits: BitVec,
    pos: usize,
    kappa: usize,
}

impl Cursor {
    fn key(&mut self) -> KeyBit {
        let key = self.bits.slice(self.pos, self.kappa);
        self.pos += self.kappa;
        KeyBit { key }
    }

    fn mac(&mut self) -> MacBit {
        let bit = self.bits.get(self.pos);
        self.pos += 1;
        MacBit { bit, mac: self.key().key }
    }
}
