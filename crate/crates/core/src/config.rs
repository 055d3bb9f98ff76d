use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const DEFAULT_WINDOW: usize = 32;
pub const DEFAULT_NLMS_MU: f32 = 0.5;
pub const DEFAULT_NLMS_REG: f32 = 1.0;

/// Compression method, stored as the predictor tag of a container.
///
/// `CriticalAperture` is not a predictor; it selects the point-dropping
/// baseline pipeline instead of predict/quantize/code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PredictorId {
    LastValue,
    Nlms,
    Nn,
    CriticalAperture,
}

impl PredictorId {
    pub fn tag(self) -> u8 {
        match self {
            PredictorId::LastValue => 0,
            PredictorId::Nlms => 1,
            PredictorId::Nn => 2,
            PredictorId::CriticalAperture => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        Ok(match tag {
            0 => PredictorId::LastValue,
            1 => PredictorId::Nlms,
            2 => PredictorId::Nn,
            3 => PredictorId::CriticalAperture,
            other => return Err(Error::Format(format!("unknown predictor tag {other}"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            PredictorId::LastValue => "last_value",
            PredictorId::Nlms => "nlms",
            PredictorId::Nn => "nn",
            PredictorId::CriticalAperture => "ca",
        }
    }
}

impl fmt::Display for PredictorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PredictorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "last" | "last_value" => Ok(PredictorId::LastValue),
            "nlms" => Ok(PredictorId::Nlms),
            "nn" => Ok(PredictorId::Nn),
            "ca" => Ok(PredictorId::CriticalAperture),
            other => Err(Error::InvalidConfig(format!("unknown predictor '{other}'"))),
        }
    }
}

/// Backend used for the lossless stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum EntropyCodecId {
    /// Bytes copied verbatim. Useful as an ablation baseline.
    Stored,
    /// Adaptive order-1 range coder over each byte plane.
    #[default]
    RangeOrder1,
}

impl EntropyCodecId {
    pub fn tag(self) -> u8 {
        match self {
            EntropyCodecId::Stored => 0,
            EntropyCodecId::RangeOrder1 => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(EntropyCodecId::Stored),
            1 => Ok(EntropyCodecId::RangeOrder1),
            other => Err(Error::UnsupportedCodec(other)),
        }
    }
}

impl FromStr for EntropyCodecId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stored" | "none" => Ok(EntropyCodecId::Stored),
            "rc" | "range" | "range_o1" => Ok(EntropyCodecId::RangeOrder1),
            other => Err(Error::InvalidConfig(format!(
                "unknown entropy codec '{other}'"
            ))),
        }
    }
}

/// Everything the encoder needs to know besides the data itself.
#[derive(Debug, Clone, PartialEq)]
pub struct CodecConfig {
    /// Maximum absolute reconstruction error, in data units.
    pub epsilon: f64,
    pub window_k: usize,
    pub predictor: PredictorId,
    /// Predict each variable from the other variables too.
    pub multivariate: bool,
    pub entropy: EntropyCodecId,
    pub nlms_mu: f32,
    pub nlms_reg: f32,
    pub nn_weight_path: Option<PathBuf>,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-2,
            window_k: DEFAULT_WINDOW,
            predictor: PredictorId::Nlms,
            multivariate: false,
            entropy: EntropyCodecId::default(),
            nlms_mu: DEFAULT_NLMS_MU,
            nlms_reg: DEFAULT_NLMS_REG,
            nn_weight_path: None,
        }
    }
}

impl CodecConfig {
    pub fn new(epsilon: f64, predictor: PredictorId) -> Self {
        Self {
            epsilon,
            predictor,
            ..Self::default()
        }
    }

    pub fn with_window(mut self, k: usize) -> Self {
        self.window_k = k;
        self
    }

    pub fn with_multivariate(mut self, on: bool) -> Self {
        self.multivariate = on;
        self
    }

    pub fn with_entropy(mut self, entropy: EntropyCodecId) -> Self {
        self.entropy = entropy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon == 0.0 {
            return Err(Error::InvalidConfig(
                "maximum error 0 requests lossless compression; use a lossless tool instead".into(),
            ));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "maximum error must be a positive finite number, got {}",
                self.epsilon
            )));
        }
        if self.window_k == 0 || self.window_k > u32::MAX as usize {
            return Err(Error::InvalidConfig(
                "window size must be at least 1".into(),
            ));
        }
        if self.predictor == PredictorId::Nlms {
            if !(self.nlms_mu.is_finite() && self.nlms_mu > 0.0) {
                return Err(Error::InvalidConfig(
                    "NLMS step size must be positive".into(),
                ));
            }
            if !(self.nlms_reg.is_finite() && self.nlms_reg > 0.0) {
                return Err(Error::InvalidConfig(
                    "NLMS regularizer must be positive".into(),
                ));
            }
        }
        if self.predictor == PredictorId::Nn && self.nn_weight_path.is_none() {
            return Err(Error::InvalidConfig(
                "the nn predictor needs a weight file".into(),
            ));
        }
        if self.multivariate
            && matches!(
                self.predictor,
                PredictorId::Nn | PredictorId::CriticalAperture
            )
        {
            return Err(Error::InvalidConfig(format!(
                "multivariate mode is not available for the {} predictor",
                self.predictor
            )));
        }
        Ok(())
    }
}
