//! Coordinate subsets as bitmasks.
//!
//! Coordinates are zero-based in the API (`0..d`); the text forms used by the
//! CLI and reports are one-based.

use std::fmt;

use crate::error::{Error, Result};
use crate::MAX_DIM;

/// A subset of `{0, .., d-1}` stored as a bitmask, `d <= 32`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Subset(u32);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub const fn from_bits(bits: u32) -> Self {
        Subset(bits)
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    /// `{0, .., d-1}`.
    pub fn full(d: usize) -> Self {
        debug_assert!(d <= 32);
        if d == 32 {
            Subset(u32::MAX)
        } else {
            Subset((1u32 << d) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        Subset(1 << i)
    }

    /// Builds a subset from zero-based indices, rejecting duplicates and indices `>= d`.
    pub fn from_indices(indices: &[usize], d: usize) -> Result<Self> {
        let mut bits = 0u32;
        for &i in indices {
            if i >= d {
                return Err(Error::InvalidSubset(format!(
                    "index {} out of range for dimension {d}",
                    i + 1
                )));
            }
            if bits & (1 << i) != 0 {
                return Err(Error::InvalidSubset(format!("index {} repeated", i + 1)));
            }
            bits |= 1 << i;
        }
        Ok(Subset(bits))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    pub fn intersection(self, other: Subset) -> Subset {
        Subset(self.0 & other.0)
    }

    pub fn difference(self, other: Subset) -> Subset {
        Subset(self.0 & !other.0)
    }

    pub fn is_disjoint(self, other: Subset) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    /// Complement within `{0, .., d-1}`.
    pub fn complement(self, d: usize) -> Subset {
        Subset(!self.0 & Subset::full(d).0)
    }

    /// Zero-based members in increasing order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// Every subset of `self`, the empty set included.
    pub fn subsets(self) -> Submasks {
        Submasks {
            mask: self.0,
            next: Some(self.0),
        }
    }

    pub fn max_index(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(31 - self.0.leading_zeros() as usize)
        }
    }

    pub(crate) fn check_within(self, d: usize) -> Result<()> {
        match self.max_index() {
            Some(m) if m >= d => Err(Error::InvalidSubset(format!(
                "index {} out of range for dimension {d}",
                m + 1
            ))),
            _ => Ok(()),
        }
    }
}

/// Iterator over the submasks of a mask, in decreasing numeric order.
#[derive(Debug, Clone)]
pub struct Submasks {
    mask: u32,
    next: Option<u32>,
}

impl Iterator for Submasks {
    type Item = Subset;

    fn next(&mut self) -> Option<Subset> {
        let cur = self.next?;
        self.next = if cur == 0 {
            None
        } else {
            Some((cur - 1) & self.mask)
        };
        Some(Subset(cur))
    }
}

/// One-based, e.g. `{1,3}`.
impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.indices().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        f.write_str("}")
    }
}

/// Parses a one-based list such as `1,3` or `{1,3}`.
pub fn parse_one_based(text: &str, d: usize) -> Result<Subset> {
    let trimmed = text.trim().trim_start_matches('{').trim_end_matches('}');
    let mut indices = Vec::new();
    for part in trimmed.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let k: usize = part
            .parse()
            .map_err(|_| Error::InvalidSubset(format!("`{part}` is not a coordinate index")))?;
        if k == 0 {
            return Err(Error::InvalidSubset(
                "coordinates are numbered from 1".into(),
            ));
        }
        indices.push(k - 1);
    }
    Subset::from_indices(&indices, d)
}

pub(crate) fn check_dim(d: usize) -> Result<()> {
    if d > MAX_DIM {
        Err(Error::DimensionTooLarge(d))
    } else {
        Ok(())
    }
}
