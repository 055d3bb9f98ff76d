//! Causal predictors.
//!
//! A predictor only ever sees reconstructed samples, so the encoder and the
//! decoder evolve identical state. For every timestep the codec calls
//! [`Predictor::predict`] and then [`Predictor::update`] once per variable, in
//! variable order.

mod history;
mod last_value;
mod nlms;
pub mod nn;

pub use history::History;
pub use last_value::LastValuePredictor;
pub use nlms::NlmsPredictor;
pub use nn::{Activation, BatchNorm, Layer, NnPredictor, NnWeights};

pub trait Predictor {
    /// Prediction for variable `var` at the current timestep. Always finite.
    fn predict(&mut self, var: usize) -> f32;

    /// Feeds the reconstruction of variable `var` at the current timestep.
    /// Non-finite reconstructions are replaced by the previous window value.
    fn update(&mut self, var: usize, reconstructed: f32);

    /// Hash of the complete mutable state, for encoder/decoder symmetry checks.
    fn digest(&self) -> u64;
}

/// FNV-1a over 32-bit words.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Fnv(u64);

impl Fnv {
    pub(crate) fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    pub(crate) fn word(&mut self, w: u32) {
        for b in w.to_le_bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }

    pub(crate) fn floats(&mut self, xs: &[f32]) {
        for x in xs {
            self.word(x.to_bits());
        }
    }

    pub(crate) fn finish(self) -> u64 {
        self.0
    }
}

/// Sequential `f32` dot product, left to right, no fused multiply-add.
#[inline]
pub(crate) fn dot(a: &[f32], b: &[f32]) -> f32 {
    let mut acc = 0.0f32;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}
