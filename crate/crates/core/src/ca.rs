//! Critical Aperture baseline: keep a subset of samples so that linear
//! interpolation between kept samples stays within `epsilon` everywhere.
//!
//! From each anchor the compressor scans forward while maintaining the
//! corridor of line slopes that keeps every intermediate sample within
//! `epsilon`. An endpoint is admissible when the slope to its exact value lies
//! in the corridor built from the samples before it (edges count as inside).
//! Once the corridor is empty no further endpoint can be admissible, and the
//! furthest admissible endpoint becomes the next anchor.

use crate::config::EntropyCodecId;
use crate::container::Payload;
use crate::entropy::{decode_bytes, encode_bytes};
use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// A kept sample, stored exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetainedPoint {
    pub index: u64,
    pub value: f32,
}

/// Value at timestep `t` on the line between two kept samples.
pub fn interpolate(a: RetainedPoint, b: RetainedPoint, t: u64) -> f32 {
    let frac = (t - a.index) as f64 / (b.index - a.index) as f64;
    let (va, vb) = (a.value as f64, b.value as f64);
    (va + (vb - va) * frac) as f32
}

fn segment_ok(values: &[f32], anchor: usize, end: usize, epsilon: f64) -> bool {
    let a = RetainedPoint {
        index: anchor as u64,
        value: values[anchor],
    };
    let b = RetainedPoint {
        index: end as u64,
        value: values[end],
    };
    (anchor + 1..end).all(|t| {
        let y = interpolate(a, b, t as u64) as f64;
        (y - values[t] as f64).abs() <= epsilon
    })
}

/// Furthest admissible endpoint after `anchor` within `values[..end]`.
fn next_anchor(values: &[f32], anchor: usize, end: usize, epsilon: f64) -> usize {
    let xa = values[anchor] as f64;
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    let mut candidates = Vec::new();
    for (cand, &v) in values.iter().enumerate().take(end).skip(anchor + 1) {
        let dt = (cand - anchor) as f64;
        let x = v as f64;
        let slope = (x - xa) / dt;
        if lo <= slope && slope <= hi {
            candidates.push(cand);
        }
        lo = lo.max((x - epsilon - xa) / dt);
        hi = hi.min((x + epsilon - xa) / dt);
        if lo > hi {
            break;
        }
    }
    // The slope test runs in f64; the f32 rounding of the interpolant gets the final say.
    candidates
        .into_iter()
        .rev()
        .find(|&c| segment_ok(values, anchor, c, epsilon))
        .unwrap_or(anchor + 1)
}

/// Selects the samples to keep. Non-finite samples are always kept and
/// split the series into independently compressed runs.
pub fn ca_compress(values: &[f32], epsilon: f64) -> Vec<RetainedPoint> {
    let mut out = Vec::new();
    let keep = |out: &mut Vec<RetainedPoint>, i: usize| {
        out.push(RetainedPoint {
            index: i as u64,
            value: values[i],
        })
    };
    let mut start = 0;
    while start < values.len() {
        if !values[start].is_finite() {
            keep(&mut out, start);
            start += 1;
            continue;
        }
        let end = values[start..]
            .iter()
            .position(|v| !v.is_finite())
            .map_or(values.len(), |p| start + p);
        let mut anchor = start;
        keep(&mut out, anchor);
        while anchor + 1 < end {
            anchor = next_anchor(values, anchor, end, epsilon);
            keep(&mut out, anchor);
        }
        start = end;
    }
    out
}

/// Rebuilds `n` samples by linear interpolation between kept samples. A gap
/// next to a non-finite kept sample is rejected, since nothing can be
/// interpolated from it.
pub fn ca_decompress(points: &[RetainedPoint], n: usize) -> Result<Vec<f32>> {
    if n == 0 {
        return if points.is_empty() {
            Ok(Vec::new())
        } else {
            Err(Error::Corrupt("kept samples for an empty series".into()))
        };
    }
    let first = points
        .first()
        .ok_or_else(|| Error::Corrupt("no kept samples".into()))?;
    let last = points.last().unwrap();
    if first.index != 0 || last.index != n as u64 - 1 {
        return Err(Error::Corrupt(
            "kept samples do not cover the series".into(),
        ));
    }
    let mut out = Vec::with_capacity(n);
    out.push(first.value);
    for pair in points.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b.index <= a.index {
            return Err(Error::Corrupt("kept sample indices not increasing".into()));
        }
        if b.index > a.index + 1 && !(a.value.is_finite() && b.value.is_finite()) {
            return Err(Error::Corrupt(
                "gap next to a non-finite kept sample".into(),
            ));
        }
        for t in a.index + 1..b.index {
            out.push(interpolate(a, b, t));
        }
        out.push(b.value);
    }
    Ok(out)
}

fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        out.push(v as u8 | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

fn get_varint(data: &[u8], pos: &mut usize) -> Result<u64> {
    let mut v = 0u64;
    for shift in (0..64).step_by(7) {
        let b = *data
            .get(*pos)
            .ok_or_else(|| Error::Truncated("index stream ended inside a varint".into()))?;
        *pos += 1;
        v |= ((b & 0x7f) as u64) << shift;
        if b & 0x80 == 0 {
            return Ok(v);
        }
    }
    Err(Error::Corrupt("varint longer than 64 bits".into()))
}

/// Serializes kept samples: delta-coded varint indices and byte-transposed
/// `f32` values, each run through the entropy stage.
pub fn encode_points(points: &[RetainedPoint], entropy: EntropyCodecId) -> Payload {
    let mut index_raw = Vec::with_capacity(points.len());
    let mut prev = 0;
    for p in points {
        put_varint(&mut index_raw, p.index - prev);
        prev = p.index;
    }
    let m = points.len();
    let mut value_raw = vec![0u8; 4 * m];
    for (i, p) in points.iter().enumerate() {
        for (k, b) in p.value.to_le_bytes().into_iter().enumerate() {
            value_raw[k * m + i] = b;
        }
    }
    Payload::Aperture {
        retained: m as u64,
        index_bytes: index_raw.len() as u64,
        indices: encode_bytes(&index_raw, entropy),
        values: encode_bytes(&value_raw, entropy),
    }
}

pub fn decode_points(payload: &Payload, entropy: EntropyCodecId) -> Result<Vec<RetainedPoint>> {
    let Payload::Aperture {
        retained,
        index_bytes,
        indices,
        values,
    } = payload
    else {
        return Err(Error::Corrupt(
            "predictive payload in an aperture container".into(),
        ));
    };
    let too_big = || Error::Corrupt("kept sample count too large".into());
    let m = usize::try_from(*retained).map_err(|_| too_big())?;
    let index_len = usize::try_from(*index_bytes).map_err(|_| too_big())?;
    if m > index_len {
        return Err(too_big());
    }
    let index_raw = decode_bytes(indices, index_len, entropy)?;
    let value_raw = decode_bytes(values, m.checked_mul(4).ok_or_else(too_big)?, entropy)?;
    let mut pos = 0;
    let mut prev = 0u64;
    let mut points = Vec::with_capacity(m);
    for i in 0..m {
        let delta = get_varint(&index_raw, &mut pos)?;
        prev = prev
            .checked_add(delta)
            .ok_or_else(|| Error::Corrupt("index overflow".into()))?;
        let bytes = [0, 1, 2, 3].map(|k| value_raw[k * m + i]);
        points.push(RetainedPoint {
            index: prev,
            value: f32::from_le_bytes(bytes),
        });
    }
    if pos != index_raw.len() {
        return Err(Error::Corrupt("unused bytes in the index stream".into()));
    }
    Ok(points)
}

pub(crate) fn encode_payloads(
    series: &TimeSeries,
    epsilon: f64,
    entropy: EntropyCodecId,
) -> Result<(Vec<Payload>, TimeSeries)> {
    let n = series.len();
    let mut payloads = Vec::with_capacity(series.vars());
    let mut columns = Vec::with_capacity(series.vars());
    for j in 0..series.vars() {
        let points = ca_compress(&series.column(j), epsilon);
        columns.push(ca_decompress(&points, n)?);
        payloads.push(encode_points(&points, entropy));
    }
    Ok((payloads, TimeSeries::from_columns(&columns)?))
}

pub(crate) fn decode_payloads(
    payloads: &[Payload],
    n: usize,
    entropy: EntropyCodecId,
) -> Result<TimeSeries> {
    let columns = payloads
        .iter()
        .map(|p| ca_decompress(&decode_points(p, entropy)?, n))
        .collect::<Result<Vec<_>>>()?;
    TimeSeries::from_columns(&columns)
}
