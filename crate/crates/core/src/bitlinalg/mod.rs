//! GF(2) vectors and matrices with transposition and permutation helpers.

mod bitvec;
mod matrix;
mod perm;

pub use bitvec::{random_bit, BitVec};
pub use matrix::{transpose_bits, BitMatrix};
pub use perm::{Pairing, Permutation};
