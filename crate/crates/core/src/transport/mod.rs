//! Framed, typed, ordered message transport between the two parties.
//!
//! Wire frame: one type byte, a 4-byte big-endian payload length, then the payload.

mod memory;
mod tcp;

use std::io::{self, Read, Write};

pub use memory::{memory_pair, MemoryChannel};
pub use tcp::TcpChannel;

use crate::error::{Abort, Error, Result};
use crate::Role;

/// Upper bound on a single payload.
pub const MAX_PAYLOAD: usize = 1 << 30;

/// Protocol version carried in the session hello.
pub const PROTOCOL_VERSION: u16 = 1;

macro_rules! msg_types {
    ($($name:ident = $code:literal,)*) => {
        /// Message type tags. Every frame carries one.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        #[repr(u8)]
        pub enum MsgType { $($name = $code,)* }

        impl TryFrom<u8> for MsgType {
            type Error = TransportError;
            fn try_from(v: u8) -> Result<Self, TransportError> {
                match v {
                    $($code => Ok(MsgType::$name),)*
                    other => Err(TransportError::UnknownType(other)),
                }
            }
        }
    };
}

msg_types! {
    Hello = 0x01,
    EqCommit = 0x10,
    EqValue = 0x11,
    EqOpen = 0x12,
    OtDealer = 0x20,
    OtMasked0 = 0x21,
    OtMasked1 = 0x22,
    LabitPairing = 0x30,
    LabitD = 0x31,
    AmplifyMatrix = 0x32,
    RotMask0 = 0x38,
    RotMask1 = 0x39,
    LaotX0 = 0x40,
    LaotX1 = 0x41,
    LaotD = 0x42,
    LaotI0 = 0x43,
    LaotI1 = 0x44,
    CombPerm = 0x50,
    CombD = 0x51,
    LaandD = 0x60,
    LaandU = 0x61,
    DealFlush = 0x70,
    DeltaCommit = 0x71,
    RtHandshake = 0x80,
    RtAnnounceBatch = 0x81,
    RtRevealBatch = 0x82,
    RtAccFlush = 0x83,
    RtOutput = 0x84,
}

/// Transport-level failures.
#[derive(Debug, thiserror::Error)]
pub enum TransportError {
    #[error("channel closed")]
    Closed,
    #[error("timed out waiting for {0:?}")]
    Timeout(MsgType),
    #[error("expected message {expected:?}, got {got:?}")]
    UnexpectedType { expected: MsgType, got: MsgType },
    #[error("unknown message type 0x{0:02x}")]
    UnknownType(u8),
    #[error("payload of {0} bytes exceeds the frame limit")]
    FrameTooLarge(usize),
    #[error("socket: {0}")]
    Io(#[from] io::Error),
}

/// Byte and message counters for one endpoint.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChannelStats {
    pub messages_sent: u64,
    pub bytes_sent: u64,
    pub messages_received: u64,
    pub bytes_received: u64,
}

/// Reliable ordered duplex channel. Sending and receiving may happen from
/// different threads, but each direction must be used by one thread at a time.
pub trait Channel: Send + Sync {
    fn send(&self, msg_type: MsgType, payload: &[u8]) -> Result<(), TransportError>;

    /// Receives the next frame, failing if its type is not `expected`.
    fn recv(&self, expected: MsgType) -> Result<Vec<u8>, TransportError>;

    fn close(&self);

    fn stats(&self) -> ChannelStats;
}

impl<C: Channel + ?Sized> Channel for &C {
    fn send(&self, msg_type: MsgType, payload: &[u8]) -> Result<(), TransportError> {
        (**self).send(msg_type, payload)
    }
    fn recv(&self, expected: MsgType) -> Result<Vec<u8>, TransportError> {
        (**self).recv(expected)
    }
    fn close(&self) {
        (**self).close()
    }
    fn stats(&self) -> ChannelStats {
        (**self).stats()
    }
}

/// Bytes a frame with this payload occupies on the wire.
pub fn frame_len(payload_len: usize) -> u64 {
    5 + payload_len as u64
}

pub fn write_frame<W: Write>(w: &mut W, msg_type: MsgType, payload: &[u8]) -> Result<(), TransportError> {
    if payload.len() > MAX_PAYLOAD {
        return Err(TransportError::FrameTooLarge(payload.len()));
    }
    w.write_all(&[msg_type as u8])?;
    w.write_all(&(payload.len() as u32).to_be_bytes())?;
    w.write_all(payload)?;
    Ok(())
}

pub fn read_frame<R: Read>(r: &mut R) -> Result<(MsgType, Vec<u8>), TransportError> {
    let mut head = [0u8; 5];
    r.read_exact(&mut head).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => TransportError::Closed,
        _ => TransportError::Io(e),
    })?;
    let msg_type = MsgType::try_from(head[0])?;
    let len = u32::from_be_bytes([head[1], head[2], head[3], head[4]]) as usize;
    if len > MAX_PAYLOAD {
        return Err(TransportError::FrameTooLarge(len));
    }
    let mut payload = vec![0u8; len];
    r.read_exact(&mut payload).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => TransportError::Closed,
        _ => TransportError::Io(e),
    })?;
    Ok((msg_type, payload))
}

/// Parameters both parties must agree on before any protocol traffic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionParams {
    pub kappa: u16,
    pub psi: u16,
    pub session_id: [u8; 16],
}

impl SessionParams {
    fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(22);
        out.extend_from_slice(&PROTOCOL_VERSION.to_be_bytes());
        out.extend_from_slice(&self.kappa.to_be_bytes());
        out.extend_from_slice(&self.psi.to_be_bytes());
        out.extend_from_slice(&self.session_id);
        out
    }

    fn decode(bytes: &[u8]) -> Result<(u16, SessionParams)> {
        if bytes.len() != 22 {
            return Err(Error::Malformed("hello must be 22 bytes".into()));
        }
        let version = u16::from_be_bytes([bytes[0], bytes[1]]);
        let mut session_id = [0u8; 16];
        session_id.copy_from_slice(&bytes[6..]);
        Ok((
            version,
            SessionParams {
                kappa: u16::from_be_bytes([bytes[2], bytes[3]]),
                psi: u16::from_be_bytes([bytes[4], bytes[5]]),
                session_id,
            },
        ))
    }
}

/// Exchanges hellos. Alice proposes the session id and Bob echoes it back;
/// any disagreement on the session parameters aborts.
pub fn hello<C: Channel + ?Sized>(ch: &C, role: Role, params: &SessionParams) -> Result<SessionParams> {
    let check = |version: u16, got: &SessionParams, check_id: bool| -> Result<()> {
        if version != PROTOCOL_VERSION {
            return Err(Abort::Handshake(format!("protocol version {version}")).into());
        }
        if got.kappa != params.kappa || got.psi != params.psi {
            return Err(Abort::Handshake(format!(
                "peer uses kappa={} psi={}, we use kappa={} psi={}",
                got.kappa, got.psi, params.kappa, params.psi
            ))
            .into());
        }
        if check_id && got.session_id != params.session_id {
            return Err(Abort::Handshake("session id".into()).into());
        }
        Ok(())
    };
    match role {
        Role::Alice => {
            ch.send(MsgType::Hello, &params.encode())?;
            let (version, got) = SessionParams::decode(&ch.recv(MsgType::Hello)?)?;
            check(version, &got, true)?;
            Ok(*params)
        }
        Role::Bob => {
            let (version, got) = SessionParams::decode(&ch.recv(MsgType::Hello)?)?;
            check(version, &got, false)?;
            ch.send(MsgType::Hello, &got.encode())?;
            Ok(got)
        }
    }
}
