//! Frozen feed-forward network predictor and its weight file format.
//!
//! Weight files are produced by an external training pipeline. Layout, all
//! little-endian:
//!
//! ```text
//! magic  "LFNN"
//! u8     format version (1)
//! u32    layer count
//! per layer:
//!   u32  input dim
//!   u32  output dim
//!   u8   activation (0 = none, 1 = relu)
//!   u8   batch norm present (0 / 1)
//!   f32  weights[output][input], row-major
//!   f32  bias[output]
//!   if batch norm:
//!     f32 gamma[output], beta[output], running_mean[output], running_var[output]
//!     f32 bn_epsilon
//! u32    CRC-32 of every preceding byte
//! ```
//!
//! Each layer computes `act(bn(W x + b))`, with batch norm in inference mode.
//! Training should add uniform noise of roughly the quantization step to the
//! inputs so the network sees reconstruction-like windows.

use std::fs;
use std::path::Path;

use super::{dot, Fnv, History, Predictor};
use crate::container::{ByteReader, ByteWriter};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"LFNN";
const VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    None,
    Relu,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm {
    pub gamma: Vec<f32>,
    pub beta: Vec<f32>,
    pub running_mean: Vec<f32>,
    pub running_var: Vec<f32>,
    pub epsilon: f32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub input_dim: usize,
    pub output_dim: usize,
    /// `output_dim` rows of `input_dim` weights.
    pub weights: Vec<f32>,
    pub bias: Vec<f32>,
    pub batch_norm: Option<BatchNorm>,
    pub activation: Activation,
}

impl Layer {
    /// A layer with all parameters zero and no batch norm.
    pub fn zeros(input_dim: usize, output_dim: usize, activation: Activation) -> Self {
        Self {
            input_dim,
            output_dim,
            weights: vec![0.0; input_dim * output_dim],
            bias: vec![0.0; output_dim],
            batch_norm: None,
            activation,
        }
    }

    fn forward(&self, input: &[f32], out: &mut Vec<f32>) {
        out.clear();
        for (row, &b) in self.weights.chunks_exact(self.input_dim).zip(&self.bias) {
            let mut y = dot(row, input) + b;
            if let Some(bn) = &self.batch_norm {
                let o = out.len();
                y = (y - bn.running_mean[o]) / (bn.running_var[o] + bn.epsilon).sqrt()
                    * bn.gamma[o]
                    + bn.beta[o];
            }
            if self.activation == Activation::Relu && y < 0.0 {
                y = 0.0;
            }
            out.push(y);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NnWeights {
    pub layers: Vec<Layer>,
}

impl NnWeights {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        let w = Self { layers };
        w.validate()?;
        Ok(w)
    }

    /// Zero-initialized fully connected stack with ReLU on every hidden layer,
    /// e.g. `&[32, 32, 128, 128, 128, 128, 1]`.
    pub fn zeros(dims: &[usize]) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::WeightFile("need at least one layer".into()));
        }
        let last = dims.len() - 2;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, d)| {
                let act = if i == last {
                    Activation::None
                } else {
                    Activation::Relu
                };
                Layer::zeros(d[0], d[1], act)
            })
            .collect();
        Self::new(layers)
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::WeightFile(m));
        if self.layers.is_empty() {
            return bad("network has no layers".into());
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.input_dim == 0 || l.output_dim == 0 {
                return bad(format!("layer {i} has an empty dimension"));
            }
            if l.weights.len() != l.input_dim * l.output_dim || l.bias.len() != l.output_dim {
                return bad(format!("layer {i} parameter sizes do not match its dims"));
            }
            if let Some(bn) = &l.batch_norm {
                let n = l.output_dim;
                if [&bn.gamma, &bn.beta, &bn.running_mean, &bn.running_var]
                    .iter()
                    .any(|v| v.len() != n)
                {
                    return bad(format!("layer {i} batch norm sizes do not match"));
                }
            }
            if i > 0 && self.layers[i - 1].output_dim != l.input_dim {
                return bad(format!("layer {i} input does not chain to layer {}", i - 1));
            }
        }
        if self.layers.last().unwrap().output_dim != 1 {
            return bad("final layer must have one output".into());
        }
        Ok(())
    }

    /// Forward pass over one input window.
    pub fn forward(&self, input: &[f32]) -> f32 {
        let mut a = Vec::new();
        let mut b = Vec::new();
        self.forward_with(input, &mut a, &mut b)
    }

    fn forward_with(&self, input: &[f32], a: &mut Vec<f32>, b: &mut Vec<f32>) -> f32 {
        self.layers[0].forward(input, a);
        for layer in &self.layers[1..] {
            layer.forward(a, b);
            std::mem::swap(a, b);
        }
        a[0]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.bytes(MAGIC);
        w.u8(VERSION);
        w.u32(self.layers.len() as u32);
        for l in &self.layers {
            w.u32(l.input_dim as u32);
            w.u32(l.output_dim as u32);
            w.u8(match l.activation {
                Activation::None => 0,
                Activation::Relu => 1,
            });
            w.u8(l.batch_norm.is_some() as u8);
            w.f32s(&l.weights);
            w.f32s(&l.bias);
            if let Some(bn) = &l.batch_norm {
                w.f32s(&bn.gamma);
                w.f32s(&bn.beta);
                w.f32s(&bn.running_mean);
                w.f32s(&bn.running_var);
                w.f32s(&[bn.epsilon]);
            }
        }
        w.finish_with_crc()
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        let corrupt = |e: Error| Error::WeightFile(e.to_string());
        let body = crate::container::check_crc(data).map_err(corrupt)?;
        let mut r = ByteReader::new(body);
        if r.take(4).map_err(corrupt)? != MAGIC {
            return Err(Error::WeightFile("bad magic".into()));
        }
        let version = r.u8().map_err(corrupt)?;
        if version != VERSION {
            return Err(Error::WeightFile(format!("unsupported version {version}")));
        }
        let count = r.u32().map_err(corrupt)? as usize;
        let mut layers = Vec::new();
        for _ in 0..count {
            let input_dim = r.u32().map_err(corrupt)? as usize;
            let output_dim = r.u32().map_err(corrupt)? as usize;
            let activation = match r.u8().map_err(corrupt)? {
                0 => Activation::None,
                1 => Activation::Relu,
                t => return Err(Error::WeightFile(format!("unknown activation {t}"))),
            };
            let has_bn = r.u8().map_err(corrupt)? != 0;
            let n_weights = input_dim
                .checked_mul(output_dim)
                .ok_or_else(|| Error::WeightFile("layer too large".into()))?;
            let weights = r.f32s(n_weights).map_err(corrupt)?;
            let bias = r.f32s(output_dim).map_err(corrupt)?;
            let batch_norm = if has_bn {
                Some(BatchNorm {
                    gamma: r.f32s(output_dim).map_err(corrupt)?,
                    beta: r.f32s(output_dim).map_err(corrupt)?,
                    running_mean: r.f32s(output_dim).map_err(corrupt)?,
                    running_var: r.f32s(output_dim).map_err(corrupt)?,
                    epsilon: r.f32s(1).map_err(corrupt)?[0],
                })
            } else {
                None
            };
            layers.push(Layer {
                input_dim,
                output_dim,
                weights,
                bias,
                batch_norm,
                activation,
            });
        }
        if !r.is_empty() {
            return Err(Error::WeightFile("trailing bytes after last layer".into()));
        }
        Self::new(layers)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }
}

/// Univariate predictor running a frozen network over the last `k`
/// reconstructions. No online training.
#[derive(Debug, Clone)]
pub struct NnPredictor {
    net: NnWeights,
    history: History,
    k: usize,
    steps: u64,
    a: Vec<f32>,
    b: Vec<f32>,
}

impl NnPredictor {
    pub fn new(net: NnWeights, k: usize) -> Result<Self> {
        net.validate()?;
        if net.input_dim() != k {
            return Err(Error::InvalidConfig(format!(
                "network expects a window of {} but the window size is {k}",
                net.input_dim()
            )));
        }
        Ok(Self {
            net,
            history: History::new(k),
            k,
            steps: 0,
            a: Vec::new(),
            b: Vec::new(),
        })
    }
}

impl Predictor for NnPredictor {
    fn predict(&mut self, _var: usize) -> f32 {
        let last = self.history.last();
        if self.steps < self.k as u64 {
            return last;
        }
        let window = self.history.latest(self.k);
        let y = self.net.forward_with(window, &mut self.a, &mut self.b);
        if y.is_finite() {
            y
        } else {
            last
        }
    }

    fn update(&mut self, _var: usize, reconstructed: f32) {
        let stored = if reconstructed.is_finite() {
            reconstructed
        } else {
            self.history.last()
        };
        self.history.push(stored);
        self.steps += 1;
    }

    fn digest(&self) -> u64 {
        let mut h = Fnv::new();
        h.floats(self.history.latest(self.k));
        h.word(self.steps as u32);
        h.word((self.steps >> 32) as u32);
        h.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_last(k: usize) -> NnWeights {
        let mut l = Layer::zeros(k, 1, Activation::None);
        l.weights[k - 1] = 1.0;
        NnWeights::new(vec![l]).unwrap()
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = NnWeights::zeros(&[32, 32, 128, 128, 128, 128, 1]).unwrap();
        let window: Vec<f32> = (0..32).map(|i| i as f32 * 0.3 - 2.0).collect();
        assert_eq!(net.forward(&window), 0.0);
    }

    #[test]
    fn identity_row_is_last_value_predictor() {
        let mut p = NnPredictor::new(identity_last(4), 4).unwrap();
        let mut last = super::super::LastValuePredictor::new(1);
        for t in 0..50 {
            let x = (t as f32 * 0.37).cos() * 10.0;
            assert_eq!(p.predict(0).to_bits(), last.predict(0).to_bits());
            p.update(0, x);
            last.update(0, x);
        }
    }

    #[test]
    fn two_layer_network_matches_straight_line_evaluation() {
        // 4 -> 2 (relu, batch norm) -> 1, window [1, 0, 0, 0].
        let l1 = Layer {
            input_dim: 4,
            output_dim: 2,
            weights: vec![0.5, -1.0, 2.0, 0.25, -1.5, 0.75, 0.0, 1.0],
            bias: vec![0.1, 0.2],
            batch_norm: Some(BatchNorm {
                gamma: vec![2.0, 0.5],
                beta: vec![-0.25, 0.125],
                running_mean: vec![0.5, -1.0],
                running_var: vec![3.0, 0.75],
                epsilon: 1.0,
            }),
            activation: Activation::Relu,
        };
        let l2 = Layer {
            input_dim: 2,
            output_dim: 1,
            weights: vec![1.5, -2.0],
            bias: vec![0.3],
            batch_norm: None,
            activation: Activation::None,
        };
        let net = NnWeights::new(vec![l1, l2]).unwrap();
        // Hidden 0: 0.5 + 0.1 = 0.6 -> (0.6 - 0.5) / 2 * 2 - 0.25 = -0.15 -> relu 0.
        // Hidden 1: -1.5 + 0.2 = -1.3 -> (-1.3 + 1) / sqrt(1.75) * 0.5 + 0.125.
        let h1 = (-0.3f64 / 1.75f64.sqrt()) * 0.5 + 0.125;
        let expected = 0.0 * 1.5 - 2.0 * h1 + 0.3;
        let got = net.forward(&[1.0, 0.0, 0.0, 0.0]) as f64;
        assert!((got - expected).abs() < 1e-6, "{got} vs {expected}");
    }

    #[test]
    fn file_roundtrip_and_corruption() {
        let mut net = NnWeights::zeros(&[8, 4, 1]).unwrap();
        net.layers[0].weights[3] = 1.5;
        net.layers[0].batch_norm = Some(BatchNorm {
            gamma: vec![1.0; 4],
            beta: vec![0.0; 4],
            running_mean: vec![0.5; 4],
            running_var: vec![2.0; 4],
            epsilon: 1e-3,
        });
        let bytes = net.to_bytes();
        assert_eq!(NnWeights::from_bytes(&bytes).unwrap(), net);
        for i in 0..bytes.len() {
            let mut bad = bytes.clone();
            bad[i] ^= 0x01;
            assert!(NnWeights::from_bytes(&bad).is_err(), "flip at {i} accepted");
        }
        assert!(NnWeights::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn rejects_bad_shapes() {
        let l1 = Layer::zeros(4, 3, Activation::Relu);
        let l2 = Layer::zeros(2, 1, Activation::None);
        assert!(NnWeights::new(vec![l1, l2]).is_err());
        assert!(NnWeights::new(vec![Layer::zeros(4, 2, Activation::None)]).is_err());
        assert!(NnPredictor::new(identity_last(4), 8).is_err());
    }
}
