//! Infinite oracle sequences standing in for the set `A`.
//!
//! Every oracle here is computable. The construction's hypothesis asks for a
//! nonrecursive `A`, which no finite program can supply; these are desk-scale
//! stand-ins. Descriptor syntax:
//!
//! ```text
//! periodic:<bits>             repeat <bits> forever
//! seed:<u64>                  ChaCha8 keystream bits for the seed
//! prefix:<bits>:<descriptor>  <bits> first, then the fallback at the same index
//! ```

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::bits::{Bit, BitString};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("unknown oracle kind in descriptor {0:?} (expected periodic:, seed: or prefix:)")]
    UnknownKind(String),
    #[error("periodic pattern must be a non-empty string over {{0,1}}, got {0:?}")]
    BadPattern(String),
    #[error("seed must be an unsigned 64-bit integer, got {0:?}")]
    BadSeed(String),
    #[error("prefix descriptor needs the form prefix:<bits>:<fallback>, got {0:?}")]
    BadPrefix(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Oracle {
    Periodic(BitString),
    Seeded(u64),
    Prefix { head: BitString, fallback: Box<Oracle> },
}

impl Oracle {
    pub fn periodic(pattern: &str) -> Result<Oracle, OracleError> {
        let bits: BitString = pattern
            .parse()
            .map_err(|_| OracleError::BadPattern(pattern.to_string()))?;
        if bits.is_empty() {
            return Err(OracleError::BadPattern(pattern.to_string()));
        }
        Ok(Oracle::Periodic(bits))
    }

    /// The `n`th bit. Total and deterministic.
    pub fn bit(&self, n: u64) -> Bit {
        match self {
            Oracle::Periodic(pattern) => {
                let i = (n % pattern.len() as u64) as usize;
                pattern.get(i).expect("index reduced modulo pattern length")
            }
            Oracle::Seeded(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_word_pos(u128::from(n / 32));
                let word = rng.next_u32();
                Bit::from((word >> (n % 32)) & 1 == 1)
            }
            Oracle::Prefix { head, fallback } => match usize::try_from(n).ok().and_then(|i| head.get(i)) {
                Some(b) => b,
                None => fallback.bit(n),
            },
        }
    }

    /// `A↾n`
    pub fn prefix(&self, n: u64) -> BitString {
        (0..n).map(|i| self.bit(i)).collect()
    }

    pub fn description(&self) -> String {
        self.to_string()
    }
}

/// Looks up `A(n)`; same `(oracle, n)` always yields the same bit.
pub fn oracle_bit(oracle: &Oracle, n: u64) -> Bit {
    oracle.bit(n)
}

impl FromStr for Oracle {
    type Err = OracleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| OracleError::UnknownKind(s.to_string()))?;
        match kind {
            "periodic" => Oracle::periodic(rest),
            "seed" => rest
                .parse()
                .map(Oracle::Seeded)
                .map_err(|_| OracleError::BadSeed(rest.to_string())),
            "prefix" => {
                let (head, fallback) = rest
                    .split_once(':')
                    .ok_or_else(|| OracleError::BadPrefix(s.to_string()))?;
                let head = head.parse().map_err(|_| OracleError::BadPrefix(s.to_string()))?;
                Ok(Oracle::Prefix {
                    head,
                    fallback: Box::new(fallback.parse()?),
                })
            }
            _ => Err(OracleError::UnknownKind(s.to_string())),
        }
    }
}

impl fmt::Display for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Oracle::Periodic(p) => write!(f, "periodic:{p}"),
            Oracle::Seeded(seed) => write!(f, "seed:{seed}"),
            Oracle::Prefix { head, fallback } => write!(f, "prefix:{head}:{fallback}"),
        }
    }
}
