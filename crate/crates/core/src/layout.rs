//! Candidate grid, binary layout descriptors and cyclic shifts.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Regular grid of candidate slots along the array axis.
///
/// Lengths are in wavelengths throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    num_slots: usize,
    spacing: f64,
}

impl GridSpec {
    pub fn new(num_slots: usize, spacing: f64) -> Result<Self> {
        if num_slots < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 slots, got {num_slots}"
            )));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "spacing must be positive, got {spacing}"
            )));
        }
        Ok(Self { num_slots, spacing })
    }

    /// Half-wavelength grid, the usual choice.
    pub fn half_wavelength(num_slots: usize) -> Result<Self> {
        Self::new(num_slots, 0.5)
    }

    pub fn num_slots(&self) -> usize {
        self.num_slots
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Position of slot `p`, centred on the origin.
    pub fn position(&self, p: usize) -> f64 {
        (p as f64 - (self.num_slots as f64 - 1.0) / 2.0) * self.spacing
    }

    /// Direction cosine of the `k`-th pattern sample, before wrapping.
    pub fn sample_direction(&self, k: usize) -> f64 {
        k as f64 / (self.num_slots as f64 * self.spacing)
    }
}

pub fn candidate_positions(grid: &GridSpec) -> Vec<f64> {
    (0..grid.num_slots()).map(|p| grid.position(p)).collect()
}

/// Occupancy of every grid slot (`true` = element present).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct ThinningSequence {
    bits: Vec<bool>,
}

impl ThinningSequence {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        Self {
            bits: bits.iter().map(|&b| b != 0).collect(),
        }
    }

    /// Parses a string of `0`/`1` characters, ignoring whitespace.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidConfig(format!(
                    "unexpected character {other:?} in layout string"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn filled(len: usize) -> Self {
        Self {
            bits: vec![true; len],
        }
    }

    pub fn empty(len: usize) -> Self {
        Self {
            bits: vec![false; len],
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn bits_mut(&mut self) -> &mut [bool] {
        &mut self.bits
    }

    pub fn get(&self, p: usize) -> bool {
        self.bits[p]
    }

    pub fn set(&mut self, p: usize, value: bool) {
        self.bits[p] = value;
    }

    /// Number of active elements.
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn to_u8(&self) -> Vec<u8> {
        self.bits.iter().map(|&b| b as u8).collect()
    }

    /// Mirror image, slot `p` ↦ slot `P-1-p`.
    pub fn reversed(&self) -> Self {
        Self {
            bits: self.bits.iter().rev().copied().collect(),
        }
    }

    pub(crate) fn require_active(&self) -> Result<usize> {
        match self.count() {
            0 => Err(Error::EmptyLayout),
            n => Ok(n),
        }
    }
}

impl fmt::Debug for ThinningSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ThinningSequence({self})")
    }
}

impl fmt::Display for ThinningSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl TryFrom<Vec<u8>> for ThinningSequence {
    type Error = String;

    fn try_from(v: Vec<u8>) -> std::result::Result<Self, String> {
        if let Some(bad) = v.iter().find(|&&b| b > 1) {
            return Err(format!("layout entries must be 0 or 1, got {bad}"));
        }
        Ok(Self::from_bits(&v))
    }
}

impl From<ThinningSequence> for Vec<u8> {
    fn from(s: ThinningSequence) -> Self {
        s.to_u8()
    }
}

/// Rotates the layout so that output slot `p` holds input slot `(p + shift) mod P`.
pub fn cyclic_shift(seq: &ThinningSequence, shift: usize) -> Result<ThinningSequence> {
    let len = seq.len();
    if shift >= len {
        return Err(Error::ShiftOutOfRange { shift, len });
    }
    let mut bits = seq.bits.clone();
    bits.rotate_left(shift);
    Ok(ThinningSequence { bits })
}

pub fn hamming_distance(a: &ThinningSequence, b: &ThinningSequence) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.bits.iter().zip(&b.bits).filter(|(x, y)| x != y).count())
}
