//! Cayley-space points and trilateration sign signatures.

use serde::{Deserialize, Serialize};
use std::fmt;

/// A point of the Cayley chart: the pinned active lengths followed by the
/// free parameter lengths, packed into one six-slot array (`q` active
/// entries, `6 - q` free entries; unused slots stay zero when `q = 6`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CayleyPoint {
    coords: [f64; 6],
    q: usize,
}

impl CayleyPoint {
    pub fn new(active: &[f64], free: &[f64]) -> Self {
        assert!(active.len() + free.len() <= 6, "at most six coordinates");
        assert_eq!(active.len() + free.len(), 6usize.min(active.len() + free.len()));
        let mut coords = [0.0; 6];
        coords[..active.len()].copy_from_slice(active);
        coords[active.len()..active.len() + free.len()].copy_from_slice(free);
        CayleyPoint { coords, q: active.len() }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn free_len(&self) -> usize {
        6 - self.q
    }

    pub fn active(&self) -> &[f64] {
        &self.coords[..self.q]
    }

    pub fn free(&self) -> &[f64] {
        &self.coords[self.q..6]
    }

    pub fn coords(&self) -> &[f64; 6] {
        &self.coords
    }

    /// Linear interpolation towards `other` (same chart assumed).
    pub fn lerp(&self, other: &CayleyPoint, t: f64) -> CayleyPoint {
        debug_assert_eq!(self.q, other.q);
        let mut coords = [0.0; 6];
        for i in 0..6 {
            coords[i] = self.coords[i] + t * (other.coords[i] - self.coords[i]);
        }
        CayleyPoint { coords, q: self.q }
    }
}

/// One sign per trilaterated vertex, in insertion order.  Bit set means the
/// vertex takes the negative-orientation solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FlipSignature {
    bits: u32,
    len: usize,
}

impl FlipSignature {
    pub fn new(bits: u32, len: usize) -> Self {
        assert!(len < 32);
        FlipSignature { bits: bits & ((1u32 << len) - 1), len }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Sign of bit `k`: `true` means negative orientation.
    pub fn negative(&self, k: usize) -> bool {
        self.bits & (1 << k) != 0
    }
}

impl fmt::Display for FlipSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Lowest bit (first trilaterated vertex) printed first.
        for k in 0..self.len {
            write!(f, "{}", if self.negative(k) { '1' } else { '0' })?;
        }
        Ok(())
    }
}
