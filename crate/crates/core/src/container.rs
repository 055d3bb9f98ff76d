//! On-disk container format.
//!
//! ```text
//! "LFZR"  magic
//! u8      format version (1)
//! f64     epsilon
//! u32     window size k
//! u8      predictor tag (0 last value, 1 nlms, 2 nn, 3 critical aperture)
//! u8      multivariate flag
//! u32     variable count v
//! u64     timestep count n
//! u8      entropy codec id
//! u32     predictor parameter blob length, then the blob
//! v payloads, variable 0 first
//! u32     CRC-32 of every preceding byte
//! ```
//!
//! A predictive payload is `u64 len || low plane`, `u64 len || high plane`,
//! `u64 outlier count`, then the outlier samples as raw `f32` bits. An
//! aperture payload is `u64 retained`, `u64 index bytes`, then the coded index
//! and value streams, each as `u64 len || bytes`. Everything is little-endian
//! with no padding.

use crate::config::{EntropyCodecId, PredictorId};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"LFZR";
pub const FORMAT_VERSION: u8 = 1;

#[derive(Debug, Default)]
pub(crate) struct ByteWriter {
    buf: Vec<u8>,
}

impl ByteWriter {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub(crate) fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub(crate) fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub(crate) fn f64(&mut self, v: f64) {
        self.u64(v.to_bits());
    }

    pub(crate) fn f32s(&mut self, vs: &[f32]) {
        for v in vs {
            self.u32(v.to_bits());
        }
    }

    pub(crate) fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }

    pub(crate) fn sized(&mut self, b: &[u8]) {
        self.u64(b.len() as u64);
        self.bytes(b);
    }

    pub(crate) fn into_inner(self) -> Vec<u8> {
        self.buf
    }

    pub(crate) fn finish_with_crc(mut self) -> Vec<u8> {
        let crc = crc32fast::hash(&self.buf);
        self.u32(crc);
        self.buf
    }
}

pub(crate) struct ByteReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    pub(crate) fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    pub(crate) fn remaining(&self) -> usize {
        self.data.len() - self.pos
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.remaining() == 0
    }

    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if n > self.remaining() {
            return Err(Error::Truncated(format!(
                "needed {n} bytes at offset {}, {} left",
                self.pos,
                self.remaining()
            )));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub(crate) fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub(crate) fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }

    /// A count that must be backed by at least `count * unit` remaining bytes.
    pub(crate) fn count(&mut self, unit: usize) -> Result<usize> {
        let n = self.u64()?;
        match usize::try_from(n).ok().and_then(|n| n.checked_mul(unit)) {
            Some(bytes) if bytes <= self.remaining() => Ok(n as usize),
            _ => Err(Error::Truncated(format!("length {n} exceeds the stream"))),
        }
    }

    pub(crate) fn f32s(&mut self, n: usize) -> Result<Vec<f32>> {
        let bytes = self.take(
            n.checked_mul(4)
                .ok_or_else(|| Error::Truncated("float count overflows".into()))?,
        )?;
        Ok(bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    pub(crate) fn sized(&mut self) -> Result<&'a [u8]> {
        let n = self.count(1)?;
        self.take(n)
    }
}

/// Splits off and verifies the trailing CRC-32, returning the body.
pub(crate) fn check_crc(data: &[u8]) -> Result<&[u8]> {
    if data.len() < 4 {
        return Err(Error::Truncated("stream shorter than its checksum".into()));
    }
    let (body, tail) = data.split_at(data.len() - 4);
    let stored = u32::from_le_bytes(tail.try_into().unwrap());
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(Error::Checksum { stored, computed });
    }
    Ok(body)
}

/// Decode-side configuration carried in every container.
#[derive(Debug, Clone, PartialEq)]
pub struct Header {
    pub epsilon: f64,
    pub window_k: u32,
    pub predictor: PredictorId,
    pub multivariate: bool,
    pub vars: u32,
    pub n: u64,
    pub entropy: EntropyCodecId,
    /// NLMS: `mu` and `reg` as `f32` bits. NN: the full weight file.
    pub params: Vec<u8>,
}

/// Coded data for one variable.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Predictive {
        low: Vec<u8>,
        high: Vec<u8>,
        outliers: Vec<f32>,
    },
    Aperture {
        retained: u64,
        index_bytes: u64,
        indices: Vec<u8>,
        values: Vec<u8>,
    },
}

/// A parsed or freshly encoded container.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedContainer {
    pub header: Header,
    pub payloads: Vec<Payload>,
}

impl CompressedContainer {
    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.header;
        let mut w = ByteWriter::new();
        w.bytes(MAGIC);
        w.u8(FORMAT_VERSION);
        w.f64(h.epsilon);
        w.u32(h.window_k);
        w.u8(h.predictor.tag());
        w.u8(h.multivariate as u8);
        w.u32(h.vars);
        w.u64(h.n);
        w.u8(h.entropy.tag());
        w.u32(h.params.len() as u32);
        w.bytes(&h.params);
        for p in &self.payloads {
            match p {
                Payload::Predictive {
                    low,
                    high,
                    outliers,
                } => {
                    w.sized(low);
                    w.sized(high);
                    w.u64(outliers.len() as u64);
                    w.f32s(outliers);
                }
                Payload::Aperture {
                    retained,
                    index_bytes,
                    indices,
                    values,
                } => {
                    w.u64(*retained);
                    w.u64(*index_bytes);
                    w.sized(indices);
                    w.sized(values);
                }
            }
        }
        w.finish_with_crc()
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        if data.len() < MAGIC.len() + 1 {
            return Err(Error::Truncated(
                "container shorter than its preamble".into(),
            ));
        }
        if &data[..4] != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        if data[4] != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {}", data[4])));
        }
        let body = check_crc(data)?;
        let mut r = ByteReader::new(&body[5..]);
        let epsilon = r.f64()?;
        let window_k = r.u32()?;
        let predictor = PredictorId::from_tag(r.u8()?)?;
        let multivariate = match r.u8()? {
            0 => false,
            1 => true,
            other => return Err(Error::Format(format!("bad multivariate flag {other}"))),
        };
        let vars = r.u32()?;
        let n = r.u64()?;
        let entropy = EntropyCodecId::from_tag(r.u8()?)?;
        let params_len = r.u32()? as usize;
        let params = r.take(params_len)?.to_vec();
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::Format(format!("invalid epsilon {epsilon}")));
        }
        if vars == 0 || window_k == 0 {
            return Err(Error::Format("zero variables or zero window".into()));
        }
        let mut payloads = Vec::new();
        for _ in 0..vars {
            let p = if predictor == PredictorId::CriticalAperture {
                let retained = r.u64()?;
                let index_bytes = r.u64()?;
                Payload::Aperture {
                    retained,
                    index_bytes,
                    indices: r.sized()?.to_vec(),
                    values: r.sized()?.to_vec(),
                }
            } else {
                let low = r.sized()?.to_vec();
                let high = r.sized()?.to_vec();
                let count = r.count(4)?;
                Payload::Predictive {
                    low,
                    high,
                    outliers: r.f32s(count)?,
                }
            };
            payloads.push(p);
        }
        if !r.is_empty() {
            return Err(Error::Corrupt(format!(
                "{} trailing bytes after the last payload",
                r.remaining()
            )));
        }
        Ok(Self {
            header: Header {
                epsilon,
                window_k,
                predictor,
                multivariate,
                vars,
                n,
                entropy,
                params,
            },
            payloads,
        })
    }
}
