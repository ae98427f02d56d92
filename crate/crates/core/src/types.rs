//! Shared numeric types and the project-wide LLR convention.
//!
//! An LLR is `ln P(bit = 0) / P(bit = 1)`: positive values favour `0`.

use serde::{Deserialize, Serialize};

use crate::error::{FecError, Result};

/// Default saturation applied to channel LLRs at ingestion.
pub const DEFAULT_LLR_LIMIT: f64 = 20.0;

/// A single bit, always `0` or `1`.
pub type Bit = u8;

/// A finite, saturated log-likelihood ratio.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct Llr(f64);

impl Llr {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn hard_bit(self) -> Bit {
        hard_bit(self.0)
    }
}

impl From<Llr> for f64 {
    fn from(l: Llr) -> f64 {
        l.0
    }
}

/// Saturates `x` into `[-limit, limit]`. Infinities saturate; NaN is rejected.
pub fn clamp_llr(x: f64, limit: f64) -> Result<Llr> {
    if !limit.is_finite() || limit <= 0.0 {
        return Err(FecError::invalid("limit", "saturation limit must be a positive finite number"));
    }
    if x.is_nan() {
        return Err(FecError::NonFiniteLlr { index: 0 });
    }
    Ok(Llr(x.clamp(-limit, limit)))
}

/// Clamps a whole LLR sequence, reporting the index of the first NaN.
pub fn ingest_llrs(xs: &[f64], limit: f64) -> Result<Vec<f64>> {
    xs.iter()
        .enumerate()
        .map(|(index, &x)| match clamp_llr(x, limit) {
            Ok(l) => Ok(l.value()),
            Err(FecError::NonFiniteLlr { .. }) => Err(FecError::NonFiniteLlr { index }),
            Err(e) => Err(e),
        })
        .collect()
}

/// Decoder entry check: every value must be finite.
pub fn check_finite(xs: &[f64]) -> Result<()> {
    match xs.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(FecError::NonFiniteLlr { index }),
        None => Ok(()),
    }
}

#[inline]
pub fn hard_bit(llr: f64) -> Bit {
    (llr < 0.0) as Bit
}

/// BPSK mapping used everywhere: bit 0 -> +1, bit 1 -> -1.
#[inline]
pub fn bpsk(bit: Bit) -> f64 {
    if bit == 0 {
        1.0
    } else {
        -1.0
    }
}

/// An uncoded double-binary symbol `(A, B)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Couple {
    pub a: Bit,
    pub b: Bit,
}

impl Couple {
    pub fn new(a: Bit, b: Bit) -> Self {
        debug_assert!(a <= 1 && b <= 1);
        Couple { a, b }
    }

    /// Symbol index `u = 2A + B`, so `01` means `A=0, B=1`.
    pub fn value(self) -> usize {
        ((self.a << 1) | self.b) as usize
    }

    pub fn from_value(u: usize) -> Self {
        Couple { a: ((u >> 1) & 1) as Bit, b: (u & 1) as Bit }
    }

    pub fn swapped(self) -> Self {
        Couple { a: self.b, b: self.a }
    }
}

/// Packs a flat bit sequence into couples `(b[2i], b[2i+1])`.
pub fn bits_to_couples(bits: &[Bit]) -> Result<Vec<Couple>> {
    if !bits.len().is_multiple_of(2) {
        return Err(FecError::LengthMismatch {
            what: "bit sequence (must be even for couples)",
            expected: bits.len() + 1,
            got: bits.len(),
        });
    }
    Ok(bits.chunks_exact(2).map(|c| Couple::new(c[0], c[1])).collect())
}

pub fn couples_to_bits(couples: &[Couple]) -> Vec<Bit> {
    couples.iter().flat_map(|c| [c.a, c.b]).collect()
}

pub fn count_bit_errors(a: &[Bit], b: &[Bit]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}
