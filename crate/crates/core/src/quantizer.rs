//! Uniform scalar quantization of prediction residuals.
//!
//! Residuals are quantized with step `2ε` into 65535 regular bins. Raw value
//! `65535` is reserved for outliers, whose sample is stored verbatim. All
//! quantizer arithmetic runs in `f64`; the reconstruction is rounded to `f32`
//! exactly once.

use crate::error::{Error, Result};

/// Largest representable signed bin index.
pub const MAX_INDEX: i32 = 32767;
const RAW_OFFSET: i32 = 32767;

/// A 16-bit quantizer output: either a signed bin in `[-32767, 32767]` or the
/// outlier marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BinIndex(u16);

impl BinIndex {
    pub const OUTLIER: BinIndex = BinIndex(u16::MAX);
    pub const ZERO: BinIndex = BinIndex(RAW_OFFSET as u16);

    pub fn from_signed(index: i32) -> Option<Self> {
        if (-MAX_INDEX..=MAX_INDEX).contains(&index) {
            Some(BinIndex((index + RAW_OFFSET) as u16))
        } else {
            None
        }
    }

    pub fn from_raw(raw: u16) -> Self {
        BinIndex(raw)
    }

    pub fn raw(self) -> u16 {
        self.0
    }

    pub fn is_outlier(self) -> bool {
        self == Self::OUTLIER
    }

    /// The signed bin, or `None` for the outlier marker.
    pub fn signed(self) -> Option<i32> {
        (!self.is_outlier()).then(|| self.0 as i32 - RAW_OFFSET)
    }
}

/// Quantizes `delta` with step `2 * epsilon`.
///
/// The index is `floor(delta / (2ε) + 0.5)`, nudged by one bin if rounding of
/// the quotient left `|index * 2ε - delta| > ε`. Never fails: non-finite or
/// out-of-range residuals map to [`BinIndex::OUTLIER`].
pub fn quantize(delta: f64, epsilon: f64) -> BinIndex {
    if !delta.is_finite() {
        return BinIndex::OUTLIER;
    }
    let step = 2.0 * epsilon;
    let q = (delta / step + 0.5).floor();
    if q.abs() > (MAX_INDEX + 1) as f64 {
        return BinIndex::OUTLIER;
    }
    let mut index = q as i32;
    let err = delta - index as f64 * step;
    if err > epsilon {
        index += 1;
    } else if err < -epsilon {
        index -= 1;
    }
    if (delta - index as f64 * step).abs() > epsilon {
        return BinIndex::OUTLIER;
    }
    BinIndex::from_signed(index).unwrap_or(BinIndex::OUTLIER)
}

/// The 64-bit residual represented by a regular bin.
pub fn dequantize(index: BinIndex, epsilon: f64) -> Result<f64> {
    let signed = index.signed().ok_or(Error::OutlierDequantized)?;
    Ok(signed as f64 * (2.0 * epsilon))
}

/// Reconstruction `prediction + index * 2ε`, rounded once to `f32`.
pub fn reconstruct(prediction: f32, signed_index: i32, epsilon: f64) -> f32 {
    (prediction as f64 + signed_index as f64 * (2.0 * epsilon)) as f32
}

/// Result of quantizing one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub index: BinIndex,
    pub reconstructed: f32,
}

/// Quantizes one sample against its prediction.
///
/// If the `f32` rounding of the reconstruction breaks the bound, the adjacent
/// bin on the other side of the sample is tried. Falls back to the outlier
/// bin (reconstruction = the sample itself) when the sample is non-finite,
/// the residual does not fit, or neither bin reconstructs within bound.
pub fn encode_step(sample: f32, prediction: f32, epsilon: f64) -> Step {
    let outlier = Step {
        index: BinIndex::OUTLIER,
        reconstructed: sample,
    };
    if !sample.is_finite() || !prediction.is_finite() {
        return outlier;
    }
    let index = quantize(sample as f64 - prediction as f64, epsilon);
    let Some(signed) = index.signed() else {
        return outlier;
    };
    let within = |r: f32| r.is_finite() && (r as f64 - sample as f64).abs() <= epsilon;
    let reconstructed = reconstruct(prediction, signed, epsilon);
    if within(reconstructed) {
        return Step {
            index,
            reconstructed,
        };
    }
    let other = if reconstructed as f64 > sample as f64 {
        signed - 1
    } else {
        signed + 1
    };
    match BinIndex::from_signed(other) {
        Some(index) if within(reconstruct(prediction, other, epsilon)) => Step {
            index,
            reconstructed: reconstruct(prediction, other, epsilon),
        },
        _ => outlier,
    }
}
