//! Commit-then-open equality test between two strings.
//!
//! The committer sends `c = H(x || r)`, learns `y`, then opens `(x, r)`.
//! Both sides output `x == y`; the responder additionally checks the opening.
//! On a mismatch each side has seen the other's string.

use rand::RngCore;

use crate::bitlinalg::BitVec;
use crate::error::{Abort, Error, Result};
use crate::ro::{h, Domain};
use crate::transport::{Channel, MsgType};
use crate::wire::{decode_bits, encode_bits, recv_bits, send_bits};

/// The commitment `H(x || r)` truncated to `kappa` bits.
pub fn commitment(x: &BitVec, r: &BitVec, kappa: usize) -> BitVec {
    h(Domain::EqCommit, kappa, &[&encode_bits(x), &r.to_bytes()])
}

/// Committer side. Returns whether the strings matched.
pub fn eq_commit_side<C, R>(ch: &C, x: &BitVec, kappa: usize, rng: &mut R) -> Result<bool>
where
    C: Channel + ?Sized,
    R: RngCore + ?Sized,
{
    let r = BitVec::random(kappa, rng);
    send_bits(ch, MsgType::EqCommit, &commitment(x, &r, kappa))?;
    let y = recv_bits(ch, MsgType::EqValue, x.len())?;
    let mut open = encode_bits(x);
    open.extend_from_slice(&encode_bits(&r));
    ch.send(MsgType::EqOpen, &open)?;
    Ok(&y == x)
}

/// Responder side. Returns whether the opening is valid and the strings matched.
pub fn eq_respond_side<C: Channel + ?Sized>(ch: &C, y: &BitVec, kappa: usize) -> Result<bool> {
    let c = recv_bits(ch, MsgType::EqCommit, kappa)?;
    send_bits(ch, MsgType::EqValue, y)?;
    let open = ch.recv(MsgType::EqOpen)?;
    let xlen = y.len().div_ceil(8) + 4;
    if open.len() < xlen {
        return Err(Error::Malformed("EQ opening truncated".into()));
    }
    let x = decode_bits(&open[..xlen], y.len())?;
    let r = decode_bits(&open[xlen..], kappa)?;
    Ok(commitment(&x, &r, kappa) == c && &x == y)
}

/// Runs one side of the equality box and turns a mismatch into an abort.
pub fn eq_check<C, R>(ch: &C, committer: bool, v: &BitVec, kappa: usize, rng: &mut R) -> Result<()>
where
    C: Channel + ?Sized,
    R: RngCore + ?Sized,
{
    let same = if committer {
        eq_commit_side(ch, v, kappa, rng)?
    } else {
        eq_respond_side(ch, v, kappa)?
    };
    if same {
        Ok(())
    } else {
        Err(Abort::EqualityCheck.into())
    }
}
