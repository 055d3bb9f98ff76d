#![allow(dead_code)]

use lfzr::container::Payload;
use lfzr::entropy::{entropy_decode, EncodedPlanes};
use lfzr::quantizer::BinIndex;
use lfzr::{CompressedContainer, TimeSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_walk(rng: &mut impl Rng, n: usize, step: f64) -> Vec<f32> {
    let normal = Normal::new(0.0, step).unwrap();
    let mut x = 0.0f64;
    (0..n)
        .map(|_| {
            x += normal.sample(rng);
            x as f32
        })
        .collect()
}

pub fn sine_noise(rng: &mut impl Rng, n: usize, noise: f64) -> Vec<f32> {
    let normal = Normal::new(0.0, noise).unwrap();
    let freq = rng.gen_range(0.005..0.1);
    let amp = rng.gen_range(0.5..20.0);
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    (0..n)
        .map(|t| (amp * (freq * t as f64 + phase).sin() + normal.sample(rng)) as f32)
        .collect()
}

/// Random walk with occasional Cauchy-sized jumps, some of them huge.
pub fn heavy_jumps(rng: &mut impl Rng, n: usize) -> Vec<f32> {
    let cauchy = Cauchy::new(0.0f64, 1.0).unwrap();
    let normal = Normal::new(0.0, 0.05).unwrap();
    let mut x = 0.0f64;
    (0..n)
        .map(|_| {
            x += normal.sample(rng);
            if rng.gen_bool(0.02) {
                x += cauchy.sample(rng).clamp(-1e7, 1e7);
            }
            x as f32
        })
        .collect()
}

pub fn constant(rng: &mut impl Rng, n: usize) -> Vec<f32> {
    vec![rng.gen_range(-1e3f32..1e3); n]
}

/// A random walk with NaN, +inf and -inf sprinkled in.
pub fn with_non_finite(rng: &mut impl Rng, n: usize) -> Vec<f32> {
    let mut v = random_walk(rng, n, 0.1);
    for x in v.iter_mut() {
        match rng.gen_range(0..40) {
            0 => *x = f32::NAN,
            1 => *x = f32::INFINITY,
            2 => *x = f32::NEG_INFINITY,
            _ => {}
        }
    }
    v
}

/// Quasi-periodic pulse train resembling a photoplethysmogram sampled at
/// 64 Hz: drifting heart rate and amplitude, baseline wander, sensor noise.
pub fn ppg_like(rng: &mut impl Rng, n: usize) -> Vec<f32> {
    let noise = Normal::new(0.0, 0.3).unwrap();
    let mut phase = 0.0f64;
    let mut rate = 1.2f64;
    let mut amp = 40.0f64;
    let mut out = Vec::with_capacity(n);
    for t in 0..n {
        rate = (rate + rng.gen_range(-0.002..0.002)).clamp(0.8, 2.0);
        amp = (amp + rng.gen_range(-0.05..0.05)).clamp(20.0, 80.0);
        phase += rate / 64.0;
        let p = phase.fract();
        let systolic = (-((p - 0.2) / 0.07).powi(2)).exp();
        let dicrotic = 0.35 * (-((p - 0.55) / 0.09).powi(2)).exp();
        let wander = 5.0 * (t as f64 / 64.0 * 0.05).sin();
        out.push((amp * (systolic + dicrotic) + wander + noise.sample(rng)) as f32);
    }
    out
}

pub fn max_abs_err(a: &TimeSeries, b: &TimeSeries) -> f64 {
    assert_eq!(a.values().len(), b.values().len());
    a.values()
        .iter()
        .zip(b.values())
        .map(|(&x, &y)| {
            if x.is_finite() {
                let e = (x as f64 - y as f64).abs();
                if e.is_nan() {
                    f64::INFINITY
                } else {
                    e
                }
            } else if x.to_bits() == y.to_bits() {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

/// Signed bin indices per variable (`None` = outlier), read back from a container.
pub fn bin_indices(c: &CompressedContainer) -> Vec<Vec<Option<i32>>> {
    let n = c.header.n as usize;
    c.payloads
        .iter()
        .map(|p| {
            let Payload::Predictive { low, high, .. } = p else {
                panic!("not a predictive container")
            };
            let planes = EncodedPlanes {
                low: low.clone(),
                high: high.clone(),
            };
            entropy_decode(&planes, n, c.header.entropy)
                .unwrap()
                .join()
                .unwrap()
                .into_iter()
                .map(|raw| BinIndex::from_raw(raw).signed())
                .collect()
        })
        .collect()
}

/// Straightforward NLMS predictor in `f64`, written without reference to the
/// library: window of the last `k` values (zero padded), weights start at
/// zero, update `w += mu * e * x / (reg + |x|^2)`. During the first `k` steps
/// the previous value is emitted instead of the filter output.
pub struct ReferenceNlms {
    k: usize,
    mu: f64,
    reg: f64,
    w: Vec<f64>,
    past: Vec<f64>,
}

impl ReferenceNlms {
    pub fn new(k: usize, mu: f64, reg: f64) -> Self {
        Self {
            k,
            mu,
            reg,
            w: vec![0.0; k],
            past: Vec::new(),
        }
    }

    fn window(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.k];
        let m = self.past.len().min(self.k);
        x[self.k - m..].copy_from_slice(&self.past[self.past.len() - m..]);
        x
    }

    /// Returns `(emitted prediction, raw filter output)`.
    pub fn predict(&self) -> (f64, f64) {
        let x = self.window();
        let y: f64 = self.w.iter().zip(&x).map(|(a, b)| a * b).sum();
        let emitted = if self.past.len() < self.k {
            self.past.last().copied().unwrap_or(0.0)
        } else {
            y
        };
        (emitted, y)
    }

    pub fn observe(&mut self, value: f64, filter_out: f64) {
        let x = self.window();
        let energy: f64 = x.iter().map(|v| v * v).sum();
        let g = self.mu * (value - filter_out) / (self.reg + energy);
        for (w, xi) in self.w.iter_mut().zip(&x) {
            *w += g * xi;
        }
        self.past.push(value);
    }
}

/// Runs the reference predictor through the quantize/reconstruct loop and
/// returns the bin index sequence.
pub fn reference_indices(x: &[f32], eps: f64, k: usize, mu: f64, reg: f64) -> Vec<i64> {
    let mut p = ReferenceNlms::new(k, mu, reg);
    x.iter()
        .map(|&v| {
            let (y, raw) = p.predict();
            let idx = ((v as f64 - y) / (2.0 * eps)).round() as i64;
            let recon = y + idx as f64 * 2.0 * eps;
            p.observe(recon, raw);
            idx
        })
        .collect()
}

/// Small random fully connected network with a batch-norm layer, used where
/// any fixed set of weights will do.
pub fn random_net(rng: &mut impl Rng, k: usize) -> lfzr::predictor::NnWeights {
    use lfzr::predictor::{Activation, BatchNorm, Layer, NnWeights};
    let dims = [k, 16, 8, 1];
    let mut layers = Vec::new();
    for (i, d) in dims.windows(2).enumerate() {
        let act = if i + 2 == dims.len() {
            Activation::None
        } else {
            Activation::Relu
        };
        let mut layer = Layer::zeros(d[0], d[1], act);
        let scale = (1.0 / d[0] as f32).sqrt();
        for w in layer.weights.iter_mut() {
            *w = rng.gen_range(-scale..scale);
        }
        for b in layer.bias.iter_mut() {
            *b = rng.gen_range(-0.1..0.1);
        }
        if i == 0 {
            layer.batch_norm = Some(BatchNorm {
                gamma: (0..d[1]).map(|_| rng.gen_range(0.5..1.5)).collect(),
                beta: (0..d[1]).map(|_| rng.gen_range(-0.1..0.1)).collect(),
                running_mean: (0..d[1]).map(|_| rng.gen_range(-0.5..0.5)).collect(),
                running_var: (0..d[1]).map(|_| rng.gen_range(0.5..2.0)).collect(),
                epsilon: 1e-3,
            });
        }
        layers.push(layer);
    }
    NnWeights::new(layers).unwrap()
}
