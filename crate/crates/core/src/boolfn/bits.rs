use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A fixed-length string of bits. Position 1 is the leftmost character of
/// the textual form and the most significant bit of [`BitString::to_index`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        BitString(bits)
    }

    /// The `len`-bit string whose big-endian value is `index`.
    pub fn from_index(index: usize, len: usize) -> Self {
        BitString((0..len).map(|k| (index >> (len - 1 - k)) & 1 == 1).collect())
    }

    pub fn to_index(&self) -> usize {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    /// Every string of length `len` in lexicographic order.
    pub fn all(len: usize) -> impl Iterator<Item = BitString> {
        (0..1usize << len).map(move |i| BitString::from_index(i, len))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Bit at a 1-based position.
    pub fn bit(&self, position: usize) -> Result<bool> {
        if position == 0 || position > self.0.len() {
            return Err(Error::IndexOutOfRange {
                index: position,
                len: self.0.len(),
            });
        }
        Ok(self.0[position - 1])
    }

    /// The substring covering 0-based positions `start..start + len`.
    pub fn slice(&self, start: usize, len: usize) -> BitString {
        BitString(self.0[start..start + len].to_vec())
    }

    pub fn complement(&self) -> BitString {
        BitString(self.0.iter().map(|b| !b).collect())
    }

    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a BitString>) -> BitString {
        BitString(parts.into_iter().flat_map(|p| p.0.iter().copied()).collect())
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::BitString(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}
