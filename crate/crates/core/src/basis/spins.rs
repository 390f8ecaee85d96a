use std::fmt;

use crate::error::{Error, Result};

/// Configuration of `n` two-level atoms on a ring; bit `j-1` set means site
/// `j` (1-based) is in the Rydberg state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinString {
    bits: u64,
    n: u8,
}

impl SpinString {
    pub fn from_bits(bits: u64, n: usize) -> Self {
        debug_assert!(n <= 64);
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        Self { bits: bits & mask, n: n as u8 }
    }

    pub fn all_down(n: usize) -> Self {
        Self::from_bits(0, n)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.n as usize
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Occupation of site `j` (1-based, taken modulo the ring length).
    pub fn is_up(&self, site: usize) -> bool {
        let j = (site + self.len() - 1) % self.len();
        self.bits >> j & 1 == 1
    }

    pub fn flipped(&self, site: usize) -> Self {
        let j = (site + self.len() - 1) % self.len();
        Self { bits: self.bits ^ (1u64 << j), n: self.n }
    }

    pub fn excitations(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Number of ring bonds `(j, j+1)` with both atoms excited.
    pub fn adjacent_pairs(&self) -> usize {
        (1..=self.len()).filter(|&j| self.is_up(j) && self.is_up(j + 1)).count()
    }

    /// Number of ring bonds separating an excited from a ground-state atom.
    pub fn domain_walls(&self) -> usize {
        (1..=self.len()).filter(|&j| self.is_up(j) != self.is_up(j + 1)).count()
    }

    /// Occupations `⟨n_j⟩ ∈ {0,1}` in site order.
    pub fn occupations(&self) -> impl Iterator<Item = bool> + '_ {
        (1..=self.len()).map(|j| self.is_up(j))
    }

    /// Parses `↑`/`↓`, `u`/`d` or `1`/`0` characters.
    pub fn parse(s: &str) -> Result<Self> {
        let mut bits = 0u64;
        let mut n = 0usize;
        for ch in s.chars() {
            let up = match ch {
                '↑' | 'u' | 'U' | '1' => true,
                '↓' | 'd' | 'D' | '0' => false,
                c if c.is_whitespace() => continue,
                _ => {
                    return Err(Error::NotInSector { spins: s.to_string(), reason: "unrecognised spin symbol" })
                }
            };
            if n == 64 {
                return Err(Error::OutOfRange { what: "spin string length", value: 65, lo: 1, hi: 64 });
            }
            if up {
                bits |= 1 << n;
            }
            n += 1;
        }
        Ok(Self::from_bits(bits, n))
    }
}

impl fmt::Display for SpinString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for up in self.occupations() {
            f.write_str(if up { "↑" } else { "↓" })?;
        }
        Ok(())
    }
}
