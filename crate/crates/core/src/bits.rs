//! Binary digits and finite binary strings.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub const BOTH: [Bit; 2] = [Bit::Zero, Bit::One];

    pub fn complement(self) -> Bit {
        match self {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Bit::Zero => 0,
            Bit::One => 1,
        }
    }

    pub fn from_char(c: char) -> Option<Bit> {
        match c {
            '0' => Some(Bit::Zero),
            '1' => Some(Bit::One),
            _ => None,
        }
    }
}

impl From<bool> for Bit {
    fn from(b: bool) -> Self {
        if b {
            Bit::One
        } else {
            Bit::Zero
        }
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid character {found:?} at position {position} in bit string")]
pub struct ParseBitsError {
    pub position: usize,
    pub found: char,
}

/// A finite binary string. The empty string is the root of the betting tree.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    bits: Vec<Bit>,
}

impl BitString {
    pub fn empty() -> Self {
        BitString { bits: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<Bit> {
        self.bits.get(i).copied()
    }

    pub fn push(&mut self, bit: Bit) {
        self.bits.push(bit);
    }

    /// `self ⌢ bit` as a new string.
    pub fn child(&self, bit: Bit) -> BitString {
        let mut bits = Vec::with_capacity(self.bits.len() + 1);
        bits.extend_from_slice(&self.bits);
        bits.push(bit);
        BitString { bits }
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        BitString { bits }
    }

    /// The restriction to the first `n` bits; `None` when `n > len`.
    pub fn restrict(&self, n: usize) -> Option<BitString> {
        (n <= self.bits.len()).then(|| BitString {
            bits: self.bits[..n].to_vec(),
        })
    }

    /// Bits from position `n` onward; `None` when `n > len`.
    pub fn suffix_from(&self, n: usize) -> Option<BitString> {
        (n <= self.bits.len()).then(|| BitString {
            bits: self.bits[n..].to_vec(),
        })
    }

    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        other.bits.starts_with(&self.bits)
    }

    pub fn iter(&self) -> impl Iterator<Item = Bit> + '_ {
        self.bits.iter().copied()
    }

    pub fn as_slice(&self) -> &[Bit] {
        &self.bits
    }

    /// Every string of length exactly `len`, in lexicographic order.
    pub fn all_of_length(len: usize) -> impl Iterator<Item = BitString> {
        assert!(len < 64, "enumeration length {len} too large");
        (0u64..(1u64 << len)).map(move |code| (0..len).map(|i| Bit::from((code >> (len - 1 - i)) & 1 == 1)).collect())
    }
}

impl FromIterator<Bit> for BitString {
    fn from_iter<I: IntoIterator<Item = Bit>>(iter: I) -> Self {
        BitString {
            bits: iter.into_iter().collect(),
        }
    }
}

impl From<Vec<Bit>> for BitString {
    fn from(bits: Vec<Bit>) -> Self {
        BitString { bits }
    }
}

impl FromStr for BitString {
    type Err = ParseBitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .enumerate()
            .map(|(position, c)| Bit::from_char(c).ok_or(ParseBitsError { position, found: c }))
            .collect()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}
