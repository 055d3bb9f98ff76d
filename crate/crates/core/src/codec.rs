//! Encode and decode loops tying predictor, quantizer and entropy stage together.

use crate::ca;
use crate::config::{CodecConfig, PredictorId};
use crate::container::{CompressedContainer, Header, Payload};
use crate::entropy::{entropy_decode, entropy_encode, EncodedPlanes, SymbolPlanes};
use crate::error::{Error, Result};
use crate::predictor::{LastValuePredictor, NlmsPredictor, NnPredictor, NnWeights, Predictor};
use crate::quantizer::{encode_step, reconstruct, BinIndex};
use crate::series::TimeSeries;

/// Called after every `update` with `(timestep, variable, predictor)`.
pub type Probe<'a> = dyn FnMut(usize, usize, &dyn Predictor) + 'a;

/// Predictor construction parameters shared by encoder and decoder.
enum PredictorSpec {
    LastValue,
    Nlms { k: usize, mu: f32, reg: f32 },
    Nn { k: usize, net: NnWeights },
}

impl PredictorSpec {
    fn from_config(config: &CodecConfig) -> Result<Self> {
        Ok(match config.predictor {
            PredictorId::LastValue => PredictorSpec::LastValue,
            PredictorId::Nlms => PredictorSpec::Nlms {
                k: config.window_k,
                mu: config.nlms_mu,
                reg: config.nlms_reg,
            },
            PredictorId::Nn => {
                let path = config.nn_weight_path.as_ref().ok_or_else(|| {
                    Error::InvalidConfig("the nn predictor needs a weight file".into())
                })?;
                let net = NnWeights::load(path)?;
                let spec = PredictorSpec::Nn {
                    k: config.window_k,
                    net,
                };
                // Surface a window/network mismatch before touching the data.
                spec.build(1)?;
                spec
            }
            PredictorId::CriticalAperture => unreachable!("aperture has no predictor"),
        })
    }

    fn from_header(header: &Header) -> Result<Self> {
        let k = header.window_k as usize;
        Ok(match header.predictor {
            PredictorId::LastValue => PredictorSpec::LastValue,
            PredictorId::Nlms => {
                let p = &header.params;
                if p.len() != 8 {
                    return Err(Error::Format("NLMS parameter blob must be 8 bytes".into()));
                }
                let mu = f32::from_le_bytes(p[0..4].try_into().unwrap());
                let reg = f32::from_le_bytes(p[4..8].try_into().unwrap());
                PredictorSpec::Nlms { k, mu, reg }
            }
            PredictorId::Nn => PredictorSpec::Nn {
                k,
                net: NnWeights::from_bytes(&header.params)?,
            },
            PredictorId::CriticalAperture => unreachable!("aperture has no predictor"),
        })
    }

    fn params(&self) -> Vec<u8> {
        match self {
            PredictorSpec::LastValue => Vec::new(),
            PredictorSpec::Nlms { mu, reg, .. } => {
                let mut v = mu.to_le_bytes().to_vec();
                v.extend_from_slice(&reg.to_le_bytes());
                v
            }
            PredictorSpec::Nn { net, .. } => net.to_bytes(),
        }
    }

    fn build(&self, vars: usize) -> Result<Box<dyn Predictor>> {
        Ok(match self {
            PredictorSpec::LastValue => Box::new(LastValuePredictor::new(vars)),
            PredictorSpec::Nlms { k, mu, reg } => Box::new(NlmsPredictor::new(*k, vars, *mu, *reg)),
            PredictorSpec::Nn { k, net } => {
                if vars != 1 {
                    return Err(Error::Format("nn predictor is univariate only".into()));
                }
                Box::new(NnPredictor::new(net.clone(), *k)?)
            }
        })
    }
}

/// Runs the causal loop. In multivariate mode one predictor sees all
/// variables, timestep-major; otherwise each variable gets its own predictor.
fn drive(
    n: usize,
    vars: usize,
    multivariate: bool,
    spec: &PredictorSpec,
    mut step: impl FnMut(usize, usize, f32) -> Result<f32>,
    probe: &mut Probe<'_>,
) -> Result<()> {
    if multivariate {
        let mut p = spec.build(vars)?;
        for t in 0..n {
            for j in 0..vars {
                let y = p.predict(j);
                let xhat = step(t, j, y)?;
                p.update(j, xhat);
                probe(t, j, p.as_ref());
            }
        }
    } else {
        for j in 0..vars {
            let mut p = spec.build(1)?;
            for t in 0..n {
                let y = p.predict(0);
                let xhat = step(t, j, y)?;
                p.update(0, xhat);
                probe(t, j, p.as_ref());
            }
        }
    }
    Ok(())
}

fn header_for(series: &TimeSeries, config: &CodecConfig, params: Vec<u8>) -> Result<Header> {
    let vars =
        u32::try_from(series.vars()).map_err(|_| Error::Shape("too many variables".into()))?;
    Ok(Header {
        epsilon: config.epsilon,
        window_k: config.window_k as u32,
        predictor: config.predictor,
        multivariate: config.multivariate && series.vars() > 1,
        vars,
        n: series.len() as u64,
        entropy: config.entropy,
        params,
    })
}

/// Compresses `series`, guaranteeing `|x - x̂| <= epsilon` for every finite sample.
pub fn encode(series: &TimeSeries, config: &CodecConfig) -> Result<CompressedContainer> {
    encode_traced(series, config, &mut |_, _, _| {}).map(|(c, _)| c)
}

/// Like [`encode`], also returning the encoder-side reconstruction.
pub fn encode_traced(
    series: &TimeSeries,
    config: &CodecConfig,
    probe: &mut Probe<'_>,
) -> Result<(CompressedContainer, TimeSeries)> {
    config.validate()?;
    if config.predictor == PredictorId::CriticalAperture {
        let header = header_for(series, config, Vec::new())?;
        let (payloads, recon) = ca::encode_payloads(series, config.epsilon, config.entropy)?;
        return Ok((CompressedContainer { header, payloads }, recon));
    }

    let spec = PredictorSpec::from_config(config)?;
    let header = header_for(series, config, spec.params())?;
    let (n, vars) = (series.len(), series.vars());
    let eps = config.epsilon;
    let mut symbols = vec![Vec::with_capacity(n); vars];
    let mut outliers = vec![Vec::new(); vars];
    let mut recon = vec![0.0f32; n * vars];

    drive(
        n,
        vars,
        header.multivariate,
        &spec,
        |t, j, y| {
            let x = series.get(t, j);
            let s = encode_step(x, y, eps);
            symbols[j].push(s.index.raw());
            if s.index.is_outlier() {
                outliers[j].push(x);
            }
            recon[t * vars + j] = s.reconstructed;
            Ok(s.reconstructed)
        },
        probe,
    )?;

    let payloads = symbols
        .iter()
        .zip(outliers)
        .map(|(syms, outliers)| {
            let EncodedPlanes { low, high } =
                entropy_encode(&SymbolPlanes::split(syms), config.entropy);
            Payload::Predictive {
                low,
                high,
                outliers,
            }
        })
        .collect();
    Ok((
        CompressedContainer { header, payloads },
        TimeSeries::new(recon, vars)?,
    ))
}

pub fn decode(container: &CompressedContainer) -> Result<TimeSeries> {
    decode_traced(container, &mut |_, _, _| {})
}

pub fn decode_traced(container: &CompressedContainer, probe: &mut Probe<'_>) -> Result<TimeSeries> {
    let h = &container.header;
    let vars = h.vars as usize;
    let n = usize::try_from(h.n).map_err(|_| Error::Format("timestep count too large".into()))?;
    if container.payloads.len() != vars {
        return Err(Error::Corrupt(
            "payload count differs from variable count".into(),
        ));
    }
    if h.predictor == PredictorId::CriticalAperture {
        return ca::decode_payloads(&container.payloads, n, h.entropy);
    }

    let spec = PredictorSpec::from_header(h)?;
    let mut symbols = Vec::with_capacity(vars);
    let mut outliers = Vec::with_capacity(vars);
    for p in &container.payloads {
        let Payload::Predictive {
            low,
            high,
            outliers: o,
        } = p
        else {
            return Err(Error::Corrupt(
                "aperture payload in a predictive container".into(),
            ));
        };
        let encoded = EncodedPlanes {
            low: low.clone(),
            high: high.clone(),
        };
        symbols.push(entropy_decode(&encoded, n, h.entropy)?.join()?);
        outliers.push(o.iter());
    }
    let total = n
        .checked_mul(vars)
        .ok_or_else(|| Error::Format("series too large".into()))?;
    let mut recon = vec![0.0f32; total];
    let eps = h.epsilon;

    drive(
        n,
        vars,
        h.multivariate && vars > 1,
        &spec,
        |t, j, y| {
            let xhat = match BinIndex::from_raw(symbols[j][t]).signed() {
                Some(i) => reconstruct(y, i, eps),
                None => *outliers[j].next().ok_or_else(|| {
                    Error::Corrupt("more outlier bins than stored outliers".into())
                })?,
            };
            recon[t * vars + j] = xhat;
            Ok(xhat)
        },
        probe,
    )?;
    if outliers.iter_mut().any(|o| o.next().is_some()) {
        return Err(Error::Corrupt("stored outliers left unused".into()));
    }
    TimeSeries::new(recon, vars)
}

/// Encodes straight to container bytes.
pub fn compress(series: &TimeSeries, config: &CodecConfig) -> Result<Vec<u8>> {
    Ok(encode(series, config)?.to_bytes())
}

/// Parses and decodes container bytes.
pub fn decompress(bytes: &[u8]) -> Result<TimeSeries> {
    decode(&CompressedContainer::from_bytes(bytes)?)
}
