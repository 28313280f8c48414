//! `synclass`: drive the LDPC-coded bitplane classification pipeline from
//! declarative experiment manifests.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error.

mod manifest;
mod run;
mod sweep;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use synclass_core::datasets::Split;
use synclass_core::ldpc::{self, CodeKind, CodeRate};

use manifest::ExperimentManifest;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Data(msg) => write!(f, "data error: {msg}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
        }
    }
}

impl From<synclass_core::ldpc::LdpcError> for CliError {
    fn from(e: synclass_core::ldpc::LdpcError) -> Self {
        use synclass_core::ldpc::LdpcError;
        match e {
            LdpcError::Io(_) | LdpcError::AlistFormat(_) => CliError::Data(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<synclass_core::datasets::DatasetError> for CliError {
    fn from(e: synclass_core::datasets::DatasetError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<synclass_core::encode::EncodeError> for CliError {
    fn from(e: synclass_core::encode::EncodeError) -> Self {
        use synclass_core::encode::EncodeError;
        match e {
            EncodeError::Config(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<synclass_core::gru::GruError> for CliError {
    fn from(e: synclass_core::gru::GruError) -> Self {
        use synclass_core::gru::GruError;
        match e {
            GruError::Io(_) | GruError::CheckpointFormat(_) => CliError::Data(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<synclass_core::tensor::TensorError> for CliError {
    fn from(e: synclass_core::tensor::TensorError) -> Self {
        CliError::Data(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "synclass",
    version,
    about = "LDPC syndrome coding of image bitplanes with GRU classification"
)]
struct Cli {
    /// Directory for cached codes and encoded datasets.
    #[arg(long, default_value = "runs/cache", global = true)]
    cache_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a parity-check matrix and write it as alist.
    BuildCode {
        /// Code rate: 1/4, 1/2, 3/5 or 3/4.
        #[arg(long)]
        rate: String,
        /// Regular degree pair from the code table.
        #[arg(long, conflicts_with = "irregular")]
        regular: bool,
        /// Irregular distribution from the code table.
        #[arg(long)]
        irregular: bool,
        /// Code length (columns).
        #[arg(long, default_value_t = 1024)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output path for the alist file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode a dataset according to a manifest and cache the tensors.
    Encode {
        #[arg(long)]
        manifest: PathBuf,
        /// Which split to encode.
        #[arg(long, default_value = "both")]
        split: SplitArg,
    },
    /// Run the full pipeline: encode, train, evaluate, write the record.
    TrainEval {
        #[arg(long)]
        manifest: PathBuf,
        /// Suppress per-epoch progress lines.
        #[arg(long)]
        quiet: bool,
    },
    /// Dump one plane's syndromes for every sample as CSV (for external
    /// embedding tools).
    ExportFeatures {
        #[arg(long)]
        manifest: PathBuf,
        /// Timestep to export (0-based, in feed order).
        #[arg(long)]
        plane_index: usize,
        #[arg(long, default_value = "train")]
        split: SplitArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a manifest across one swept axis and collect a summary CSV.
    Sweep {
        #[arg(long)]
        manifest: PathBuf,
        /// Axis to sweep: rate, qf, planes or truncation.
        #[arg(long)]
        axis: sweep::Axis,
        /// Comma-separated axis values (e.g. "10,30,50" or "1/4,1/2").
        #[arg(long)]
        values: String,
        #[arg(long)]
        out: PathBuf,
        /// Run sweep points on worker threads instead of sequentially.
        #[arg(long)]
        parallel: bool,
    },
    /// Approximate-entropy chaos metrics (D_f) and rate summary.
    Metrics {
        #[arg(long)]
        manifest: PathBuf,
        /// Number of images to sample.
        #[arg(long, default_value_t = 1000)]
        sample: usize,
        /// Output JSON path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum SplitArg {
    Train,
    Validation,
    Both,
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::BuildCode {
            rate,
            regular,
            irregular,
            n,
            seed,
            out,
        } => {
            let rate = CodeRate::parse(&rate)
                .ok_or_else(|| CliError::Config(format!("unsupported rate {rate:?}")))?;
            let kind = match (regular, irregular) {
                (false, true) => CodeKind::Irregular,
                (_, false) => CodeKind::Regular,
                (true, true) => unreachable!("clap conflicts_with"),
            };
            let code = manifest::CodeSection { rate, kind, seed };
            let h = run::build_code(code, n)?;
            ldpc::write_alist(&h, &out)?;
            println!("{}", run::code_report(&h));
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Encode { manifest, split } => {
            let manifest = ExperimentManifest::from_path(&manifest)?;
            for split in split.splits() {
                let (encoded, path) = run::ensure_encoded(&manifest, &cli.cache_dir, split)?;
                println!(
                    "{:?}: {} samples x {} steps x {} -> {}",
                    split,
                    encoded.samples.len(),
                    encoded.steps,
                    encoded.input_dim,
                    path.display()
                );
            }
            Ok(())
        }
        Command::TrainEval { manifest, quiet } => {
            let manifest = ExperimentManifest::from_path(&manifest)?;
            let record = run::train_eval(&manifest, &cli.cache_dir, quiet)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&record).expect("record serializes")
            );
            Ok(())
        }
        Command::ExportFeatures {
            manifest,
            plane_index,
            split,
            out,
        } => {
            let manifest = ExperimentManifest::from_path(&manifest)?;
            let split = match split {
                SplitArg::Validation => Split::Validation,
                _ => Split::Train,
            };
            let (rows, cols) =
                run::export_features(&manifest, &cli.cache_dir, plane_index, split, &out)?;
            println!("wrote {rows} x {cols} (+label) to {}", out.display());
            Ok(())
        }
        Command::Sweep {
            manifest,
            axis,
            values,
            out,
            parallel,
        } => {
            let manifest = ExperimentManifest::from_path(&manifest)?;
            let values = sweep::parse_values(axis, &values)?;
            let summary = sweep::run_sweep(&manifest, &cli.cache_dir, axis, &values, parallel)?;
            sweep::write_csv(&summary, &out)?;
            println!("wrote {} sweep rows to {}", summary.len(), out.display());
            Ok(())
        }
        Command::Metrics {
            manifest,
            sample,
            out,
        } => {
            let manifest = ExperimentManifest::from_path(&manifest)?;
            let report = run::chaos_metrics(&manifest, &cli.cache_dir, sample)?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            match out {
                Some(path) => std::fs::write(&path, json)
                    .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?,
                None => println!("{json}"),
            }
            Ok(())
        }
    }
}

impl SplitArg {
    fn splits(self) -> Vec<Split> {
        match self {
            SplitArg::Train => vec![Split::Train],
            SplitArg::Validation => vec![Split::Validation],
            SplitArg::Both => vec![Split::Train, Split::Validation],
        }
    }
}
