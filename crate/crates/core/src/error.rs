use std::fmt;

use crate::transport::TransportError;

/// Result alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure a party can observe.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("bit length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("malformed encoding: {0}")]
    Malformed(String),
    #[error("transport: {0}")]
    Transport(#[from] TransportError),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("abort: {0}")]
    Abort(#[from] Abort),
    #[error("{phase} phase: {source}")]
    Phase {
        phase: Phase,
        #[source]
        source: Box<Error>,
    },
    #[error("out of material: no {0} records left")]
    OutOfMaterial(MaterialKind),
    #[error("circuit: {0}")]
    Circuit(#[from] CircuitError),
    #[error("invalid parameter: {0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Strips phase wrappers and returns the innermost error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Phase { source, .. } => source.root(),
            other => other,
        }
    }

    /// True when the failure is a detected deviation by the peer.
    pub fn is_abort(&self) -> bool {
        matches!(self.root(), Error::Abort(_))
    }

    pub(crate) fn in_phase(self, phase: Phase) -> Error {
        Error::Phase {
            phase,
            source: Box::new(self),
        }
    }
}

/// Reasons a party aborts after catching the peer deviating.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Abort {
    #[error("equality check failed")]
    EqualityCheck,
    #[error("MAC check failed on a revealed bit")]
    MacCheck,
    #[error("deferred MAC accumulator mismatch")]
    DeferredMacCheck,
    #[error("handshake mismatch: {0}")]
    Handshake(String),
}

/// Dealer phases, attached to errors raised while dealing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Handshake,
    Abits,
    LeakyOt,
    CombineOt,
    LeakyAnd,
    CombineAnd,
    Flush,
    Online,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Phase::Handshake => "handshake",
            Phase::Abits => "aBit",
            Phase::LeakyOt => "leaky OT",
            Phase::CombineOt => "OT combining",
            Phase::LeakyAnd => "leaky AND",
            Phase::CombineAnd => "AND combining",
            Phase::Flush => "MAC flush",
            Phase::Online => "online",
        };
        f.write_str(name)
    }
}

/// Kinds of preprocessed records in a material store.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaterialKind {
    Abit,
    Aand,
    Aot,
}

impl fmt::Display for MaterialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaterialKind::Abit => "aBit",
            MaterialKind::Aand => "aAND",
            MaterialKind::Aot => "aOT",
        })
    }
}

/// Bristol circuit parse and validation failures.
#[derive(Debug, thiserror::Error)]
pub enum CircuitError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("gate {gate}: wire {wire} out of range (circuit has {wires} wires)")]
    WireOutOfRange {
        gate: usize,
        wire: usize,
        wires: usize,
    },
    #[error("gate {gate}: wire {wire} read before it is defined")]
    UndefinedWire { gate: usize, wire: usize },
    #[error("gate {gate}: wire {wire} assigned twice")]
    Reassigned { gate: usize, wire: usize },
    #[error("expected {expected} input bits for {party}, got {got}")]
    InputLength {
        party: crate::Role,
        expected: usize,
        got: usize,
    },
    #[error("unsupported circuit shape: {0}")]
    Unsupported(String),
}
