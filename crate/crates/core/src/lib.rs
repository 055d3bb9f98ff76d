//! Error-bounded lossy compression for floating-point time series.
//!
//! Each sample is predicted from past reconstructions, the residual is
//! quantized with step `2ε`, and the bin indices are entropy coded. Every
//! finite sample is reconstructed within `ε`; non-finite samples and residuals
//! that do not fit a bin are stored verbatim.
//!
//! ```
//! use lfzr::{compress, decompress, CodecConfig, PredictorId, TimeSeries};
//!
//! let series = TimeSeries::univariate((0..1000).map(|t| (t as f32 * 0.01).sin()).collect());
//! let bytes = compress(&series, &CodecConfig::new(1e-3, PredictorId::Nlms)).unwrap();
//! let back = decompress(&bytes).unwrap();
//! assert!(series
//!     .values()
//!     .iter()
//!     .zip(back.values())
//!     .all(|(a, b)| (*a as f64 - *b as f64).abs() <= 1e-3));
//! ```

pub mod ca;
pub mod codec;
pub mod config;
pub mod container;
pub mod dataio;
pub mod entropy;
mod error;
pub mod predictor;
pub mod quantizer;
mod series;

pub use codec::{compress, decode, decode_traced, decompress, encode, encode_traced};
pub use config::{CodecConfig, EntropyCodecId, PredictorId};
pub use container::CompressedContainer;
pub use error::{Error, Result};
pub use series::TimeSeries;
