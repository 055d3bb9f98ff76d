//! Dataset ingestion, reconstruction metrics and the benchmark harness.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use crate::codec;
use crate::config::{CodecConfig, PredictorId};
use crate::container::CompressedContainer;
use crate::error::{Error, Result};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// Little-endian `f32`, row-major when there is more than one variable.
    RawF32,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" | "f32" | "raw_f32" => Ok(Format::RawF32),
            "csv" => Ok(Format::Csv),
            other => Err(Error::InvalidConfig(format!("unknown format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadOptions {
    pub format: Format,
    /// Variables per row in a raw file. Ignored for CSV.
    pub raw_vars: usize,
    /// Columns to keep, in order. `None` keeps all.
    pub columns: Option<Vec<usize>>,
    /// Skip the first CSV line.
    pub csv_header: bool,
}

impl Default for ReadOptions {
    fn default() -> Self {
        Self {
            format: Format::RawF32,
            raw_vars: 1,
            columns: None,
            csv_header: false,
        }
    }
}

pub fn parse_raw(bytes: &[u8], vars: usize) -> Result<TimeSeries> {
    if vars == 0 {
        return Err(Error::InvalidConfig(
            "raw input needs at least one variable".into(),
        ));
    }
    if !bytes.len().is_multiple_of(4 * vars) {
        return Err(Error::Data(format!(
            "raw file of {} bytes is not a whole number of {vars}-variable f32 rows",
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    TimeSeries::new(values, vars)
}

pub fn parse_csv(text: &[u8], header: bool) -> Result<TimeSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text);
    let mut width = None;
    let mut values = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Data(format!("csv row {row}: {e}")))?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(Error::Data(format!(
                    "csv row {row} has {} cells, expected {w}",
                    record.len()
                )))
            }
            _ => {}
        }
        for (col, cell) in record.iter().enumerate() {
            if cell.is_empty() {
                return Err(Error::Data(format!("csv row {row} column {col} is empty")));
            }
            let v: f32 = cell.parse().map_err(|_| {
                Error::Data(format!(
                    "csv row {row} column {col}: '{cell}' is not a number"
                ))
            })?;
            values.push(v);
        }
    }
    TimeSeries::new(values, width.unwrap_or(1))
}

/// Reads a series from disk, optionally keeping only some columns.
pub fn read_series(path: impl AsRef<Path>, opts: &ReadOptions) -> Result<TimeSeries> {
    let bytes = fs::read(path)?;
    let series = match opts.format {
        Format::RawF32 => parse_raw(&bytes, opts.raw_vars)?,
        Format::Csv => parse_csv(&bytes, opts.csv_header)?,
    };
    match &opts.columns {
        Some(cols) => series.select(cols),
        None => Ok(series),
    }
}

pub fn raw_bytes(series: &TimeSeries) -> Vec<u8> {
    series
        .values()
        .iter()
        .flat_map(|v| v.to_le_bytes())
        .collect()
}

pub fn write_raw(path: impl AsRef<Path>, series: &TimeSeries) -> Result<()> {
    fs::write(path, raw_bytes(series))?;
    Ok(())
}

/// Reconstruction quality and size of one compressed series.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub n: usize,
    pub vars: usize,
    pub uncompressed_bytes: usize,
    pub compressed_bytes: usize,
    pub ratio: f64,
    pub max_abs_err: f64,
    pub mean_abs_err: f64,
    pub rmse: f64,
    /// Timesteps per second, when measured.
    pub encode_throughput: Option<f64>,
    pub decode_throughput: Option<f64>,
}

/// Compares `original` with `reconstructed` in `f64`.
///
/// Non-finite originals must be reproduced bit-exactly; otherwise the error at
/// that sample is infinite. Averages run over finite samples only.
pub fn compute_metrics(
    original: &TimeSeries,
    reconstructed: &TimeSeries,
    compressed_bytes: usize,
) -> Result<Metrics> {
    if original.vars() != reconstructed.vars() || original.len() != reconstructed.len() {
        return Err(Error::Shape(format!(
            "original is {}x{}, reconstruction is {}x{}",
            original.len(),
            original.vars(),
            reconstructed.len(),
            reconstructed.vars()
        )));
    }
    let mut max = 0.0f64;
    let mut sum = 0.0f64;
    let mut sq = 0.0f64;
    let mut finite = 0usize;
    for (&x, &y) in original.values().iter().zip(reconstructed.values()) {
        if x.is_finite() {
            let e = (x as f64 - y as f64).abs();
            let e = if e.is_nan() { f64::INFINITY } else { e };
            max = max.max(e);
            sum += e;
            sq += e * e;
            finite += 1;
        } else if x.to_bits() != y.to_bits() {
            max = f64::INFINITY;
        }
    }
    let (mean, rmse) = if finite == 0 {
        (0.0, 0.0)
    } else {
        (sum / finite as f64, (sq / finite as f64).sqrt())
    };
    let uncompressed = 4 * original.values().len();
    Ok(Metrics {
        n: original.len(),
        vars: original.vars(),
        uncompressed_bytes: uncompressed,
        compressed_bytes,
        ratio: if compressed_bytes == 0 {
            0.0
        } else {
            uncompressed as f64 / compressed_bytes as f64
        },
        max_abs_err: max,
        mean_abs_err: mean,
        rmse,
        encode_throughput: None,
        decode_throughput: None,
    })
}

/// One benchmarked method. `NlmsMultivariate` runs NLMS with cross-variable prediction.
#[derive(Debug, Clone, PartialEq)]
pub enum BenchCodec {
    LastValue,
    Nlms,
    NlmsMultivariate,
    Nn(PathBuf),
    CriticalAperture,
}

impl BenchCodec {
    pub fn name(&self) -> String {
        match self {
            BenchCodec::LastValue => "last_value".into(),
            BenchCodec::Nlms => "nlms".into(),
            BenchCodec::NlmsMultivariate => "nlms_mv".into(),
            BenchCodec::Nn(p) => format!("nn:{}", p.display()),
            BenchCodec::CriticalAperture => "ca".into(),
        }
    }

    pub fn config(&self, epsilon: f64) -> CodecConfig {
        let (predictor, mv) = match self {
            BenchCodec::LastValue => (PredictorId::LastValue, false),
            BenchCodec::Nlms => (PredictorId::Nlms, false),
            BenchCodec::NlmsMultivariate => (PredictorId::Nlms, true),
            BenchCodec::Nn(_) => (PredictorId::Nn, false),
            BenchCodec::CriticalAperture => (PredictorId::CriticalAperture, false),
        };
        let mut cfg = CodecConfig::new(epsilon, predictor).with_multivariate(mv);
        if let BenchCodec::Nn(p) = self {
            cfg.nn_weight_path = Some(p.clone());
        }
        cfg
    }

    fn parse(s: &str, base: &Path) -> Result<Self> {
        Ok(match s {
            "last" | "last_value" => BenchCodec::LastValue,
            "nlms" => BenchCodec::Nlms,
            "nlms_mv" => BenchCodec::NlmsMultivariate,
            "ca" => BenchCodec::CriticalAperture,
            other => match other.strip_prefix("nn:") {
                Some(p) => BenchCodec::Nn(base.join(p)),
                None => {
                    return Err(Error::InvalidConfig(format!(
                        "unknown bench codec '{other}'"
                    )))
                }
            },
        })
    }
}

/// One manifest line: a dataset and the grid to run on it.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub read: ReadOptions,
    pub epsilons: Vec<f64>,
    pub codecs: Vec<BenchCodec>,
}

/// Parses a manifest. Each non-comment line is
/// `path,format,columns,eps_list,codecs` where lists are `;`-separated,
/// `format` is `raw`, `raw:<vars>` or `csv`, and `columns` is `*` for all.
/// Relative paths resolve against `base`.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<ManifestEntry>> {
    let mut entries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |m: &str| Error::InvalidConfig(format!("manifest line {}: {m}", lineno + 1));
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [path, format, columns, eps, codecs] = fields[..] else {
            return Err(bad("expected 5 comma-separated fields"));
        };
        let mut read = ReadOptions::default();
        match format.split_once(':') {
            Some(("raw", v)) => {
                read.raw_vars = v.parse().map_err(|_| bad("bad raw variable count"))?;
            }
            Some(("csv", "header")) => {
                read.format = Format::Csv;
                read.csv_header = true;
            }
            Some(_) => return Err(bad("bad format")),
            None => read.format = format.parse().map_err(|_| bad("bad format"))?,
        }
        if columns != "*" {
            read.columns = Some(
                columns
                    .split(';')
                    .map(|c| c.trim().parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad("bad column list"))?,
            );
        }
        let epsilons = eps
            .split(';')
            .map(|e| e.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad("bad epsilon list"))?;
        let codecs = codecs
            .split(';')
            .map(|c| BenchCodec::parse(c.trim(), base))
            .collect::<Result<Vec<_>>>()?;
        entries.push(ManifestEntry {
            path: base.join(path),
            read,
            epsilons,
            codecs,
        });
    }
    Ok(entries)
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_manifest(&text, path.parent().unwrap_or(Path::new(".")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub dataset: String,
    pub epsilon: f64,
    pub codec: String,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
}

const CSV_HEADER: &str =
    "dataset,n,vars,epsilon,codec,compressed_bytes,ratio,max_abs_err,mean_abs_err,rmse,bound_ok";

impl BenchTable {
    fn render(&self, timing: bool) -> String {
        let mut s = String::from(CSV_HEADER);
        if timing {
            s.push_str(",encode_ts_per_s,decode_ts_per_s");
        }
        s.push('\n');
        for r in &self.rows {
            let m = &r.metrics;
            let _ = write!(
                s,
                "{},{},{},{},{},{},{:.6},{:e},{:e},{:e},{}",
                r.dataset,
                m.n,
                m.vars,
                r.epsilon,
                r.codec,
                m.compressed_bytes,
                m.ratio,
                m.max_abs_err,
                m.mean_abs_err,
                m.rmse,
                m.max_abs_err <= r.epsilon
            );
            if timing {
                let _ = write!(
                    s,
                    ",{:.0},{:.0}",
                    m.encode_throughput.unwrap_or(0.0),
                    m.decode_throughput.unwrap_or(0.0)
                );
            }
            s.push('\n');
        }
        s
    }

    pub fn to_csv(&self) -> String {
        self.render(true)
    }

    /// The CSV without the timing columns; deterministic for fixed inputs.
    pub fn to_csv_without_timing(&self) -> String {
        self.render(false)
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::from("| dataset | epsilon | codec | ratio | max abs err | rmse |\n");
        s.push_str("|---|---|---|---|---|---|\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {:.3} | {:.3e} | {:.3e} |",
                r.dataset,
                r.epsilon,
                r.codec,
                r.metrics.ratio,
                r.metrics.max_abs_err,
                r.metrics.rmse
            );
        }
        s
    }
}

/// Compresses, decompresses from bytes, and measures one series.
pub fn measure(series: &TimeSeries, config: &CodecConfig) -> Result<Metrics> {
    let start = Instant::now();
    let bytes = codec::compress(series, config)?;
    let enc_secs = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let recon = codec::decode(&CompressedContainer::from_bytes(&bytes)?)?;
    let dec_secs = start.elapsed().as_secs_f64();
    let mut m = compute_metrics(series, &recon, bytes.len())?;
    let rate = |secs: f64| (secs > 0.0).then(|| series.len() as f64 / secs);
    m.encode_throughput = rate(enc_secs);
    m.decode_throughput = rate(dec_secs);
    Ok(m)
}

/// Runs every (dataset, epsilon, codec) cell of the manifest. Any cell whose
/// reconstruction breaks its bound aborts the run.
pub fn bench_run(entries: &[ManifestEntry]) -> Result<BenchTable> {
    let mut table = BenchTable::default();
    for entry in entries {
        let series = read_series(&entry.path, &entry.read)?;
        let dataset = entry
            .path
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_default();
        for &eps in &entry.epsilons {
            for codec in &entry.codecs {
                let metrics = measure(&series, &codec.config(eps))?;
                if metrics.max_abs_err.is_nan() || metrics.max_abs_err > eps {
                    return Err(Error::BoundViolation {
                        context: format!("{dataset} / {} / eps {eps}", codec.name()),
                        max_abs_err: metrics.max_abs_err,
                        epsilon: eps,
                    });
                }
                table.rows.push(BenchRow {
                    dataset: dataset.clone(),
                    epsilon: eps,
                    codec: codec.name(),
                    metrics,
                });
            }
        }
    }
    Ok(table)
}
