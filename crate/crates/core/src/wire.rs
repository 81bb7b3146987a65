use crate::bitlinalg::BitVec;
use crate::error::{Error, Result};
use crate::transport::{Channel, MsgType};

/// Encodes a bit vector as a 4-byte big-endian bit count and packed bytes.
pub(crate) fn encode_bits(v: &BitVec) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + v.len().div_ceil(8));
    out.extend_from_slice(&(v.len() as u32).to_be_bytes());
    out.extend_from_slice(&v.to_bytes());
    out
}

pub(crate) fn decode_bits(bytes: &[u8], expected: usize) -> Result<BitVec> {
    if bytes.len() < 4 {
        return Err(Error::Malformed("bit vector header truncated".into()));
    }
    let len = u32::from_be_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]) as usize;
    if len != expected {
        return Err(Error::Protocol(format!(
            "expected {expected} bits, peer sent {len}"
        )));
    }
    BitVec::from_bytes(&bytes[4..], len)
}

pub(crate) fn send_bits<C: Channel + ?Sized>(ch: &C, t: MsgType, v: &BitVec) -> Result<()> {
    ch.send(t, &encode_bits(v))?;
    Ok(())
}

pub(crate) fn recv_bits<C: Channel + ?Sized>(ch: &C, t: MsgType, expected: usize) -> Result<BitVec> {
    decode_bits(&ch.recv(t)?, expected)
}

/// Splits a concatenation into `count` chunks of `width` bits.
pub(crate) fn split_bits(v: &BitVec, width: usize) -> Vec<BitVec> {
    debug_assert_eq!(v.len() % width.max(1), 0);
    (0..v.len() / width.max(1))
        .map(|i| v.slice(i * width, width))
        .collect()
}
