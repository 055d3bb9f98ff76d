//! Carry-less 32-bit range coder with an adaptive order-1 byte model.

use crate::error::{Error, Result};
use crate::predictor::Fnv;

const TOP: u32 = 1 << 24;
const BOT: u32 = 1 << 16;

/// Added to a symbol's frequency each time it is coded.
pub const INCREMENT: u16 = 32;
/// Context totals never exceed this; hitting it halves the table.
pub const RESCALE_LIMIT: u32 = 1 << 16;

#[derive(Clone)]
struct FrequencyTable {
    freq: [u16; 256],
    total: u32,
}

impl FrequencyTable {
    fn new() -> Self {
        Self {
            freq: [1; 256],
            total: 256,
        }
    }

    #[inline]
    fn cumulative(&self, symbol: u8) -> u32 {
        self.freq[..symbol as usize].iter().map(|&f| f as u32).sum()
    }

    /// Symbol whose cumulative interval contains `target`, with its start.
    #[inline]
    fn find(&self, target: u32) -> (u8, u32) {
        let mut cum = 0u32;
        for (s, &f) in self.freq.iter().enumerate() {
            let next = cum + f as u32;
            if target < next {
                return (s as u8, cum);
            }
            cum = next;
        }
        unreachable!("target below total")
    }

    #[inline]
    fn update(&mut self, symbol: u8) {
        self.freq[symbol as usize] += INCREMENT;
        self.total += INCREMENT as u32;
        if self.total > RESCALE_LIMIT {
            self.total = 0;
            for f in self.freq.iter_mut() {
                *f = f.div_ceil(2);
                self.total += *f as u32;
            }
        }
    }
}

/// One frequency table per previous byte.
#[derive(Clone)]
pub struct Order1Model {
    tables: Vec<FrequencyTable>,
    context: u8,
}

impl Default for Order1Model {
    fn default() -> Self {
        Self::new()
    }
}

impl Order1Model {
    pub fn new() -> Self {
        Self {
            tables: vec![FrequencyTable::new(); 256],
            context: 0,
        }
    }

    pub fn max_total(&self) -> u32 {
        self.tables.iter().map(|t| t.total).max().unwrap_or(0)
    }

    pub fn digest(&self) -> u64 {
        let mut h = Fnv::new();
        for t in &self.tables {
            for pair in t.freq.chunks_exact(2) {
                h.word(pair[0] as u32 | (pair[1] as u32) << 16);
            }
            h.word(t.total);
        }
        h.word(self.context as u32);
        h.finish()
    }

    fn table(&self) -> &FrequencyTable {
        &self.tables[self.context as usize]
    }

    fn advance(&mut self, symbol: u8) {
        self.tables[self.context as usize].update(symbol);
        self.context = symbol;
    }
}

pub struct Order1Encoder {
    model: Order1Model,
    low: u32,
    range: u32,
    out: Vec<u8>,
}

impl Default for Order1Encoder {
    fn default() -> Self {
        Self::new()
    }
}

impl Order1Encoder {
    pub fn new() -> Self {
        Self {
            model: Order1Model::new(),
            low: 0,
            range: u32::MAX,
            out: Vec::new(),
        }
    }

    pub fn model(&self) -> &Order1Model {
        &self.model
    }

    pub fn encode(&mut self, symbol: u8) {
        let t = self.model.table();
        let (cum, freq, total) = (
            t.cumulative(symbol),
            t.freq[symbol as usize] as u32,
            t.total,
        );
        self.range /= total;
        self.low = self.low.wrapping_add(cum * self.range);
        self.range *= freq;
        while (self.low ^ self.low.wrapping_add(self.range)) < TOP || {
            let underflow = self.range < BOT;
            if underflow {
                self.range = self.low.wrapping_neg() & (BOT - 1);
            }
            underflow
        } {
            self.out.push((self.low >> 24) as u8);
            self.low <<= 8;
            self.range <<= 8;
        }
        self.model.advance(symbol);
    }

    pub fn finish(mut self) -> Vec<u8> {
        for _ in 0..4 {
            self.out.push((self.low >> 24) as u8);
            self.low <<= 8;
        }
        self.out
    }
}

pub struct Order1Decoder<'a> {
    model: Order1Model,
    low: u32,
    range: u32,
    code: u32,
    data: &'a [u8],
    pos: usize,
}

impl<'a> Order1Decoder<'a> {
    pub fn new(data: &'a [u8]) -> Result<Self> {
        let mut d = Self {
            model: Order1Model::new(),
            low: 0,
            range: u32::MAX,
            code: 0,
            data,
            pos: 0,
        };
        for _ in 0..4 {
            d.code = (d.code << 8) | d.next_byte()? as u32;
        }
        Ok(d)
    }

    pub fn model(&self) -> &Order1Model {
        &self.model
    }

    fn next_byte(&mut self) -> Result<u8> {
        let b = *self
            .data
            .get(self.pos)
            .ok_or_else(|| Error::Truncated("range coder ran out of input".into()))?;
        self.pos += 1;
        Ok(b)
    }

    pub fn decode(&mut self) -> Result<u8> {
        let t = self.model.table();
        let total = t.total;
        self.range /= total;
        let target = self.code.wrapping_sub(self.low) / self.range;
        if target >= total {
            return Err(Error::Corrupt("range coder value outside the model".into()));
        }
        let (symbol, cum) = t.find(target);
        let freq = t.freq[symbol as usize] as u32;
        self.low = self.low.wrapping_add(cum * self.range);
        self.range *= freq;
        while (self.low ^ self.low.wrapping_add(self.range)) < TOP || {
            let underflow = self.range < BOT;
            if underflow {
                self.range = self.low.wrapping_neg() & (BOT - 1);
            }
            underflow
        } {
            self.code = (self.code << 8) | self.next_byte()? as u32;
            self.low <<= 8;
            self.range <<= 8;
        }
        self.model.advance(symbol);
        Ok(symbol)
    }

    /// Fails unless every input byte was consumed.
    pub fn finish(self) -> Result<()> {
        if self.pos != self.data.len() {
            return Err(Error::Corrupt(format!(
                "{} unused bytes after the last symbol",
                self.data.len() - self.pos
            )));
        }
        Ok(())
    }
}
