use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use lfzr::dataio::{self, Format, Metrics, ReadOptions};
use lfzr::{CodecConfig, CompressedContainer, EntropyCodecId, Error, PredictorId};
use serde_json::json;

/// Error-bounded lossy compressor for floating-point time series.
#[derive(Parser)]
#[command(name = "lfzr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a series into a container.
    Compress {
        input: PathBuf,
        output: PathBuf,
        /// Maximum absolute reconstruction error (must be > 0).
        #[arg(long)]
        maxerror: f64,
        /// nlms, nn, last or ca.
        #[arg(long, default_value = "nlms")]
        predictor: PredictorId,
        #[arg(long, default_value_t = lfzr::config::DEFAULT_WINDOW)]
        window: usize,
        /// Predict each variable from the others too.
        #[arg(long)]
        multivariate: bool,
        #[arg(long)]
        nn_weights: Option<PathBuf>,
        /// Entropy backend: rc or stored.
        #[arg(long, default_value = "rc")]
        codec: EntropyCodecId,
        #[arg(long, default_value_t = lfzr::config::DEFAULT_NLMS_MU)]
        mu: f32,
        #[arg(long, default_value_t = lfzr::config::DEFAULT_NLMS_REG)]
        reg: f32,
        #[command(flatten)]
        input_opts: InputOpts,
        #[arg(long)]
        json: bool,
    },
    /// Decompress a container to raw little-endian f32.
    Decompress { input: PathBuf, output: PathBuf },
    /// Decode a container and check it against the original data.
    Verify {
        original: PathBuf,
        container: PathBuf,
        #[command(flatten)]
        input_opts: InputOpts,
        #[arg(long)]
        json: bool,
    },
    /// Run a benchmark manifest and print a results table.
    Bench {
        manifest: PathBuf,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print a markdown table instead of CSV.
        #[arg(long)]
        markdown: bool,
    },
}

#[derive(Args)]
struct InputOpts {
    /// raw or csv.
    #[arg(long, default_value = "raw")]
    format: Format,
    /// Variables per row of a raw file.
    #[arg(long, default_value_t = 1)]
    vars: usize,
    /// Comma-separated column indices to keep.
    #[arg(long, value_delimiter = ',')]
    columns: Option<Vec<usize>>,
    /// The CSV file starts with a header line.
    #[arg(long)]
    header: bool,
}

impl InputOpts {
    fn read_options(&self) -> ReadOptions {
        ReadOptions {
            format: self.format,
            raw_vars: self.vars,
            columns: self.columns.clone(),
            csv_header: self.header,
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Data(_) => 2,
        Error::BoundViolation { .. } => 4,
        e if e.is_corruption() => 3,
        _ => 1,
    }
}

fn metrics_json(m: &Metrics, epsilon: f64) -> serde_json::Value {
    json!({
        "n": m.n,
        "vars": m.vars,
        "epsilon": epsilon,
        "uncompressed_bytes": m.uncompressed_bytes,
        "compressed_bytes": m.compressed_bytes,
        "ratio": m.ratio,
        "max_abs_err": m.max_abs_err,
        "mean_abs_err": m.mean_abs_err,
        "rmse": m.rmse,
        "bound_ok": m.max_abs_err <= epsilon,
    })
}

fn print_metrics(m: &Metrics, epsilon: f64) {
    println!("timesteps        {} x {} vars", m.n, m.vars);
    println!(
        "compressed bytes {} (ratio {:.4})",
        m.compressed_bytes, m.ratio
    );
    println!("max abs error    {:e} (bound {epsilon:e})", m.max_abs_err);
    println!("mean abs error   {:e}", m.mean_abs_err);
    println!("rmse             {:e}", m.rmse);
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Compress {
            input,
            output,
            maxerror,
            predictor,
            window,
            multivariate,
            nn_weights,
            codec,
            mu,
            reg,
            input_opts,
            json,
        } => {
            let config = CodecConfig {
                epsilon: maxerror,
                window_k: window,
                predictor,
                multivariate,
                entropy: codec,
                nlms_mu: mu,
                nlms_reg: reg,
                nn_weight_path: nn_weights,
            };
            config.validate()?;
            let series = dataio::read_series(&input, &input_opts.read_options())?;
            let (container, recon) = lfzr::encode_traced(&series, &config, &mut |_, _, _| {})?;
            let bytes = container.to_bytes();
            fs::write(&output, &bytes)?;
            let m = dataio::compute_metrics(&series, &recon, bytes.len())?;
            if json {
                println!("{}", metrics_json(&m, maxerror));
            } else {
                eprintln!(
                    "{} -> {} bytes, ratio {:.4}",
                    input.display(),
                    bytes.len(),
                    m.ratio
                );
            }
        }
        Command::Decompress { input, output } => {
            let bytes = fs::read(&input)?;
            let series = lfzr::decompress(&bytes)?;
            dataio::write_raw(&output, &series)?;
        }
        Command::Verify {
            original,
            container,
            input_opts,
            json,
        } => {
            let series = dataio::read_series(&original, &input_opts.read_options())?;
            let bytes = fs::read(&container)?;
            let parsed = CompressedContainer::from_bytes(&bytes)?;
            let epsilon = parsed.header.epsilon;
            let recon = lfzr::decode(&parsed)?;
            let m = dataio::compute_metrics(&series, &recon, bytes.len())?;
            if json {
                println!("{}", metrics_json(&m, epsilon));
            } else {
                print_metrics(&m, epsilon);
            }
            if m.max_abs_err.is_nan() || m.max_abs_err > epsilon {
                return Err(Error::BoundViolation {
                    context: container.display().to_string(),
                    max_abs_err: m.max_abs_err,
                    epsilon,
                });
            }
        }
        Command::Bench {
            manifest,
            out,
            markdown,
        } => {
            let entries = dataio::read_manifest(&manifest)?;
            let table = dataio::bench_run(&entries)?;
            let text = if markdown {
                table.to_markdown()
            } else {
                table.to_csv()
            };
            match out {
                Some(path) => fs::write(path, text)?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lfzr: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
