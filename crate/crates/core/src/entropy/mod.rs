//! Lossless stage applied to the quantized index stream.
//!
//! The 16-bit raw indices are split into a low-byte plane and a high-byte
//! plane. Each plane is coded independently by the selected backend.

mod range_coder;

pub use range_coder::{Order1Decoder, Order1Encoder, Order1Model, INCREMENT, RESCALE_LIMIT};

use crate::config::EntropyCodecId;
use crate::container::{ByteReader, ByteWriter};
use crate::error::{Error, Result};

const MODE_CODED: u8 = 0;
const MODE_VERBATIM: u8 = 1;

/// The two byte planes of a `u16` symbol stream.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SymbolPlanes {
    pub low: Vec<u8>,
    pub high: Vec<u8>,
}

impl SymbolPlanes {
    pub fn split(symbols: &[u16]) -> Self {
        Self {
            low: symbols.iter().map(|&s| s as u8).collect(),
            high: symbols.iter().map(|&s| (s >> 8) as u8).collect(),
        }
    }

    pub fn join(&self) -> Result<Vec<u16>> {
        if self.low.len() != self.high.len() {
            return Err(Error::Corrupt("byte planes differ in length".into()));
        }
        Ok(self
            .low
            .iter()
            .zip(&self.high)
            .map(|(&l, &h)| (h as u16) << 8 | l as u16)
            .collect())
    }

    pub fn len(&self) -> usize {
        self.low.len()
    }

    pub fn is_empty(&self) -> bool {
        self.low.is_empty()
    }
}

/// Coded planes, low first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedPlanes {
    pub low: Vec<u8>,
    pub high: Vec<u8>,
}

impl EncodedPlanes {
    /// `u64 len || low || u64 len || high`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.sized(&self.low);
        w.sized(&self.high);
        w.into_inner()
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(data);
        let low = r.sized()?.to_vec();
        let high = r.sized()?.to_vec();
        if !r.is_empty() {
            return Err(Error::Corrupt("trailing bytes after the high plane".into()));
        }
        Ok(Self { low, high })
    }

    pub fn coded_len(&self) -> usize {
        self.low.len() + self.high.len()
    }
}

/// Codes one byte stream. The range coder output falls back to a verbatim
/// copy, behind a one-byte mode tag, whenever coding would expand the data.
pub fn encode_bytes(data: &[u8], codec: EntropyCodecId) -> Vec<u8> {
    match codec {
        EntropyCodecId::Stored => data.to_vec(),
        EntropyCodecId::RangeOrder1 => {
            let mut enc = Order1Encoder::new();
            for &b in data {
                enc.encode(b);
            }
            let coded = enc.finish();
            let mut out = Vec::with_capacity(1 + coded.len().min(data.len()));
            if coded.len() < data.len() {
                out.push(MODE_CODED);
                out.extend_from_slice(&coded);
            } else {
                out.push(MODE_VERBATIM);
                out.extend_from_slice(data);
            }
            out
        }
    }
}

/// Inverse of [`encode_bytes`]; `count` is the number of bytes to produce.
pub fn decode_bytes(data: &[u8], count: usize, codec: EntropyCodecId) -> Result<Vec<u8>> {
    let verbatim = |body: &[u8]| {
        if body.len() != count {
            return Err(if body.len() < count {
                Error::Truncated(format!(
                    "expected {count} stored bytes, found {}",
                    body.len()
                ))
            } else {
                Error::Corrupt(format!(
                    "expected {count} stored bytes, found {}",
                    body.len()
                ))
            });
        }
        Ok(body.to_vec())
    };
    match codec {
        EntropyCodecId::Stored => verbatim(data),
        EntropyCodecId::RangeOrder1 => {
            let (&mode, body) = data
                .split_first()
                .ok_or_else(|| Error::Truncated("missing plane mode byte".into()))?;
            match mode {
                MODE_VERBATIM => verbatim(body),
                MODE_CODED => {
                    let mut dec = Order1Decoder::new(body)?;
                    let mut out = Vec::with_capacity(count);
                    for _ in 0..count {
                        out.push(dec.decode()?);
                    }
                    dec.finish()?;
                    Ok(out)
                }
                other => Err(Error::Corrupt(format!("unknown plane mode {other}"))),
            }
        }
    }
}

pub fn entropy_encode(planes: &SymbolPlanes, codec: EntropyCodecId) -> EncodedPlanes {
    EncodedPlanes {
        low: encode_bytes(&planes.low, codec),
        high: encode_bytes(&planes.high, codec),
    }
}

pub fn entropy_decode(
    encoded: &EncodedPlanes,
    count: usize,
    codec: EntropyCodecId,
) -> Result<SymbolPlanes> {
    Ok(SymbolPlanes {
        low: decode_bytes(&encoded.low, count, codec)?,
        high: decode_bytes(&encoded.high, count, codec)?,
    })
}
