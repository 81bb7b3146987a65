//! Actively secure two-party computation of Boolean circuits in the
//! preprocessing model. An offline dealer protocol produces authenticated
//! material from OT extension; an online phase evaluates a Bristol circuit on
//! XOR-shared, MAC-authenticated wires.
#![deny(unsafe_code)]

pub mod aand;
pub mod abit;
pub mod aot;
pub mod auth;
pub mod base_ot;
pub mod bitlinalg;
pub mod bucket;
pub mod circuit;
pub mod dealer;
pub mod eq;
pub mod error;
pub mod leakage;
pub mod ro;
pub mod rot;
pub mod runtime;
pub mod transport;
mod wire;

use std::fmt;
use std::str::FromStr;

pub use error::{Abort, Error, Result};

/// One of the two parties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Alice,
    Bob,
}

impl Role {
    pub fn peer(self) -> Role {
        match self {
            Role::Alice => Role::Bob,
            Role::Bob => Role::Alice,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Role::Alice => 0,
            Role::Bob => 1,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Alice => "alice",
            Role::Bob => "bob",
        })
    }
}

impl FromStr for Role {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "alice" | "a" => Ok(Role::Alice),
            "bob" | "b" => Ok(Role::Bob),
            other => Err(Error::Usage(format!("unknown role {other:?}"))),
        }
    }
}
