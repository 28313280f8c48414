//! Orchestration: build or reuse the code matrix, encode or reuse the
//! dataset, train, evaluate, and write run artifacts.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use synclass_core::datasets::{self, Dataset, Split};
use synclass_core::encode::{encode_dataset, DatasetKind, Setup};
use synclass_core::gru::{
    evaluate, save_checkpoint, train, EncodedDataset, EncodedSample, EpochRecord, GruParams,
    Scalar, TrainConfig,
};
use synclass_core::ldpc::{
    self, girth, peg_construct, table_distribution, ParityCheckMatrix,
};
use synclass_core::metrics::RateSummary;
use synclass_core::tensor::{self, Tensor, TensorData, TensorFile};
use synclass_core::bitplanes::BitSeq;

use crate::manifest::{hex, CodeSection, ExperimentManifest, Precision};
use crate::CliError;

/// Bitplane length per channel before coding (the code length N).
pub fn code_length(manifest: &ExperimentManifest) -> usize {
    manifest.pipeline.plane_len()
}

pub fn load_split(
    kind: DatasetKind,
    root: &Path,
    split: Split,
) -> Result<Dataset, CliError> {
    let dir = root.join(kind.dir_name());
    let dataset = match kind {
        DatasetKind::Mnist | DatasetKind::FashionMnist => {
            datasets::load_mnist_layout(&dir, split)?
        }
        DatasetKind::Ycifar10 | DatasetKind::Cifar10Yiq => {
            let (train_ds, val_ds) = datasets::load_cifar10(&dir)?;
            match split {
                Split::Train => train_ds,
                Split::Validation => val_ds,
            }
        }
    };
    Ok(dataset)
}

/// Deterministically construct the manifest's code (PEG from the table
/// distribution), or reuse the alist already cached for it.
pub fn ensure_code(
    manifest: &ExperimentManifest,
    cache_dir: &Path,
) -> Result<Option<(ParityCheckMatrix, PathBuf)>, CliError> {
    let Some(code) = manifest.code else {
        return Ok(None);
    };
    let n = code_length(manifest);
    let path = cache_dir.join(format!(
        "code-{}-{:?}-n{}-s{}.alist",
        code.rate.label().replace('/', "_"),
        code.kind,
        n,
        code.seed
    ));
    if path.exists() {
        let h = ldpc::read_alist(&path)?;
        return Ok(Some((h, path)));
    }
    let h = build_code(code, n)?;
    std::fs::create_dir_all(cache_dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", cache_dir.display())))?;
    ldpc::write_alist(&h, &path)?;
    Ok(Some((h, path)))
}

pub fn build_code(code: CodeSection, n: usize) -> Result<ParityCheckMatrix, CliError> {
    let dist = table_distribution(code.rate, code.kind)?;
    let m = code.rate.num_rows(n);
    let h = peg_construct(n, m, &dist, code.seed)?;
    if h.gf2_rank() < m {
        eprintln!(
            "warning: H is rank-deficient ({} < {m}); the effective rate is below {}",
            h.gf2_rank(),
            code.rate.label()
        );
    }
    Ok(h)
}

/// Standard text report for a constructed code.
pub fn code_report(h: &ParityCheckMatrix) -> String {
    let col = h.col_degrees();
    let row = h.row_degrees();
    format!(
        "size: {}x{}\nedges: {}\nrate M/N: {:.4}\ncolumn degrees: {}..{}\nrow degrees: {}..{}\ngirth: {}\ngf2 rank: {}",
        h.num_rows(),
        h.num_cols(),
        h.num_edges(),
        h.rate(),
        col.iter().min().unwrap(),
        col.iter().max().unwrap(),
        row.iter().min().unwrap(),
        row.iter().max().unwrap(),
        girth(h).map_or_else(|| "none (acyclic)".into(), |g| g.to_string()),
        h.gf2_rank(),
    )
}

fn encoded_path(manifest: &ExperimentManifest, cache_dir: &Path, split: Split) -> PathBuf {
    let split_name = match split {
        Split::Train => "train",
        Split::Validation => "validation",
    };
    cache_dir.join(format!(
        "enc-{}-{}.snt",
        &hex(&manifest.encode_hash())[..16],
        split_name
    ))
}

/// Encode one split, reusing the cache when the encoding identity matches.
pub fn ensure_encoded(
    manifest: &ExperimentManifest,
    cache_dir: &Path,
    split: Split,
) -> Result<(EncodedDataset, PathBuf), CliError> {
    let path = encoded_path(manifest, cache_dir, split);
    if path.exists() {
        let file = tensor::read_tensor_file(&path)?;
        let dataset = dataset_from_tensors(&file)?;
        return Ok((dataset, path));
    }
    let kind = manifest.dataset.kind;
    let raw = load_split(kind, &manifest.data_root(), split)?;
    let code = ensure_code(manifest, cache_dir)?;
    let encoded = encode_dataset(kind, &raw, &manifest.pipeline, code.as_ref().map(|(h, _)| h))?;
    std::fs::create_dir_all(cache_dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", cache_dir.display())))?;
    tensor::write_tensor_file(&path, &tensors_from_dataset(&encoded, manifest.encode_hash()))?;
    Ok((encoded, path))
}

/// Tensor layout of an encoded dataset: record 0 is the (samples, steps,
/// dim) bit tensor as u8, record 1 the labels, record 2 the class count.
pub fn tensors_from_dataset(dataset: &EncodedDataset, hash: [u8; 32]) -> TensorFile {
    let mut bits =
        Vec::with_capacity(dataset.samples.len() * dataset.steps * dataset.input_dim);
    let mut labels = Vec::with_capacity(dataset.samples.len());
    for sample in &dataset.samples {
        for plane in &sample.sequence {
            bits.extend(plane.to_bytes());
        }
        labels.push(sample.label);
    }
    TensorFile {
        manifest_hash: hash,
        tensors: vec![
            Tensor::new(
                vec![
                    dataset.samples.len() as u64,
                    dataset.steps as u64,
                    dataset.input_dim as u64,
                ],
                TensorData::U8(bits),
            )
            .expect("consistent dims"),
            Tensor::new(vec![labels.len() as u64], TensorData::U8(labels))
                .expect("consistent dims"),
            Tensor::new(vec![1], TensorData::I32(vec![dataset.classes as i32]))
                .expect("consistent dims"),
        ],
    }
}

pub fn dataset_from_tensors(file: &TensorFile) -> Result<EncodedDataset, CliError> {
    let [data, labels, classes] = file.tensors.as_slice() else {
        return Err(CliError::Data(format!(
            "encoded dataset needs 3 tensor records, found {}",
            file.tensors.len()
        )));
    };
    let (TensorData::U8(bits), TensorData::U8(labels), TensorData::I32(classes)) =
        (&data.data, &labels.data, &classes.data)
    else {
        return Err(CliError::Data("unexpected tensor dtypes".into()));
    };
    let [samples, steps, dim] = data.dims[..] else {
        return Err(CliError::Data("data tensor must be rank 3".into()));
    };
    let (samples, steps, dim) = (samples as usize, steps as usize, dim as usize);
    if labels.len() != samples {
        return Err(CliError::Data("label count mismatch".into()));
    }
    let mut out = Vec::with_capacity(samples);
    for (i, &label) in labels.iter().enumerate() {
        let sequence = (0..steps)
            .map(|k| {
                let start = (i * steps + k) * dim;
                BitSeq::from_bits(&bits[start..start + dim])
            })
            .collect();
        out.push(EncodedSample { sequence, label });
    }
    Ok(EncodedDataset {
        samples: out,
        steps,
        input_dim: dim,
        classes: classes[0] as usize,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMetrics {
    pub accuracy: f64,
    pub param_count: usize,
    pub rate: Option<f64>,
    pub gamma: Option<f64>,
    pub effective_bpp_fraction: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub manifest_hash: String,
    pub code_hash: Option<String>,
    pub dataset_hash: String,
    pub best_epoch: usize,
    pub history: Vec<EpochRecord>,
    pub metrics: RunMetrics,
    pub wall_clock_secs: f64,
}

/// The full train-eval pipeline for one manifest. Writes `run.json`,
/// `history.ldjson` and `model.ckpt` into the manifest's output directory.
pub fn train_eval(
    manifest: &ExperimentManifest,
    cache_dir: &Path,
    quiet: bool,
) -> Result<RunRecord, CliError> {
    let started = Instant::now();
    let (train_set, train_path) = ensure_encoded(manifest, cache_dir, Split::Train)?;
    let (val_set, _) = ensure_encoded(manifest, cache_dir, Split::Validation)?;
    let code = ensure_code(manifest, cache_dir)?;

    let config = manifest.train_config();
    let on_epoch = |r: &EpochRecord| {
        if !quiet {
            eprintln!(
                "epoch {:>3}  loss {:.4}  val_accuracy {:.4}",
                r.epoch, r.loss, r.val_accuracy
            );
        }
    };
    let out_dir = manifest.output_dir();
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", out_dir.display())))?;

    let (accuracy, best_epoch, history) = match manifest.model.precision {
        Precision::F64 => run_train::<f64>(&train_set, &val_set, &config, on_epoch, &out_dir)?,
        Precision::F32 => run_train::<f32>(&train_set, &val_set, &config, on_epoch, &out_dir)?,
    };

    let eta = 8 * manifest.dataset.kind.channels();
    let planes_used = train_set.steps;
    let rate = code.as_ref().map(|(h, _)| h.rate());
    let record = RunRecord {
        manifest_hash: hex(&manifest.manifest_hash()),
        code_hash: match &code {
            Some((_, path)) => Some(hex(&file_sha256(path)?)),
            None => None,
        },
        dataset_hash: hex(&file_sha256(&train_path)?),
        best_epoch,
        metrics: RunMetrics {
            accuracy,
            param_count: synclass_core::gru::param_count(
                config.units,
                train_set.input_dim,
                train_set.classes,
            ),
            rate,
            gamma: rate
                .map(|r| synclass_core::metrics::rate_gain(r, planes_used, eta))
                .transpose()
                .map_err(|e| CliError::Config(e.to_string()))?,
            effective_bpp_fraction: rate
                .map(|r| {
                    synclass_core::metrics::effective_bpp_fraction(
                        r,
                        planes_used,
                        eta,
                        manifest.pipeline.tau_fraction(),
                    )
                })
                .transpose()
                .map_err(|e| CliError::Config(e.to_string()))?,
        },
        history,
        wall_clock_secs: started.elapsed().as_secs_f64(),
    };

    let run_path = out_dir.join("run.json");
    let json = serde_json::to_string_pretty(&record).expect("record serializes");
    std::fs::write(&run_path, json).map_err(|e| CliError::Data(format!("{}: {e}", run_path.display())))?;
    let mut history_file = std::fs::File::create(out_dir.join("history.ldjson"))
        .map_err(|e| CliError::Data(e.to_string()))?;
    for record in &record.history {
        writeln!(
            history_file,
            "{}",
            serde_json::to_string(record).expect("record serializes")
        )
        .map_err(|e| CliError::Data(e.to_string()))?;
    }
    Ok(record)
}

fn run_train<F: Scalar>(
    train_set: &EncodedDataset,
    val_set: &EncodedDataset,
    config: &TrainConfig,
    on_epoch: impl FnMut(&EpochRecord),
    out_dir: &Path,
) -> Result<(f64, usize, Vec<EpochRecord>), CliError> {
    let outcome = train::<F>(train_set, val_set, config, on_epoch)?;
    let accuracy = evaluate(&outcome.params, val_set)?;
    save_checkpoint(&outcome.params, &out_dir.join("model.ckpt"))?;
    Ok((accuracy, outcome.best_epoch, outcome.history))
}

pub fn file_sha256(path: &Path) -> Result<[u8; 32], CliError> {
    let bytes =
        std::fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hasher.finalize().into())
}

/// Write one plane's syndromes (or raw planes) for every sample as CSV:
/// M bit columns then the label.
pub fn export_features(
    manifest: &ExperimentManifest,
    cache_dir: &Path,
    plane_index: usize,
    split: Split,
    out: &Path,
) -> Result<(usize, usize), CliError> {
    let (encoded, _) = ensure_encoded(manifest, cache_dir, split)?;
    if plane_index >= encoded.steps {
        return Err(CliError::Config(format!(
            "plane index {plane_index} out of range for {} timesteps",
            encoded.steps
        )));
    }
    let file = std::fs::File::create(out)
        .map_err(|e| CliError::Data(format!("{}: {e}", out.display())))?;
    let mut w = std::io::BufWriter::new(file);
    let header: Vec<String> = (0..encoded.input_dim)
        .map(|i| format!("b{i}"))
        .chain(["label".to_string()])
        .collect();
    writeln!(w, "{}", header.join(",")).map_err(|e| CliError::Data(e.to_string()))?;
    for sample in &encoded.samples {
        let bits = sample.sequence[plane_index].to_bytes();
        let mut row = String::with_capacity(2 * (encoded.input_dim + 1));
        for b in bits {
            row.push(char::from(b'0' + b));
            row.push(',');
        }
        row.push_str(&sample.label.to_string());
        writeln!(w, "{row}").map_err(|e| CliError::Data(e.to_string()))?;
    }
    Ok((encoded.samples.len(), encoded.input_dim))
}

#[derive(Debug, Clone, Serialize)]
pub struct ChaosReport {
    pub manifest_hash: String,
    pub sample_size: usize,
    pub df_mean: Option<f64>,
    pub df_min: Option<f64>,
    pub df_max: Option<f64>,
    pub undefined_count: usize,
    pub finite_positive_fraction: f64,
    pub rate_summary: Option<RateSummary>,
}

/// D_f over a sample of training images: ApEn of the coded planes against
/// ApEn of the planes the code saw (pixel planes for setup1, coefficient
/// planes for setup2).
pub fn chaos_metrics(
    manifest: &ExperimentManifest,
    cache_dir: &Path,
    sample_size: usize,
) -> Result<ChaosReport, CliError> {
    if manifest.pipeline.setup == Setup::None {
        return Err(CliError::Config(
            "D_f needs a coded pipeline (setup1 or setup2)".into(),
        ));
    }
    let kind = manifest.dataset.kind;
    let mut raw = load_split(kind, &manifest.data_root(), Split::Train)?;
    raw.samples.truncate(sample_size);
    let code = ensure_code(manifest, cache_dir)?
        .expect("validated: coded setup")
        .0;

    let coded = encode_dataset(kind, &raw, &manifest.pipeline, Some(&code))?;
    // Denominator planes: what the code saw, uncoded. Pixel planes for
    // setup1, quantized-coefficient planes for setup2.
    let mut uncoded_pipeline = manifest.pipeline;
    if manifest.pipeline.setup == Setup::Setup1 {
        uncoded_pipeline.setup = Setup::None;
    }
    let plain = encode_dataset(kind, &raw, &uncoded_pipeline, None)?;

    let config = synclass_core::metrics::ApEnConfig::default();
    let mut defined = Vec::new();
    let mut undefined_count = 0usize;
    for (plain_sample, coded_sample) in plain.samples.iter().zip(&coded.samples) {
        match synclass_core::metrics::df_ratio(
            &plain_sample.sequence,
            &coded_sample.sequence,
            config,
        )
        .map_err(|e| CliError::Config(e.to_string()))?
        {
            Some(v) => defined.push(v),
            None => undefined_count += 1,
        }
    }
    let finite_positive = defined.iter().filter(|&&v| v.is_finite() && v > 0.0).count();
    let total = defined.len() + undefined_count;
    let eta = 8 * kind.channels();
    Ok(ChaosReport {
        manifest_hash: hex(&manifest.manifest_hash()),
        sample_size: total,
        df_mean: mean(&defined),
        df_min: defined.iter().cloned().reduce(f64::min),
        df_max: defined.iter().cloned().reduce(f64::max),
        undefined_count,
        finite_positive_fraction: if total == 0 {
            0.0
        } else {
            finite_positive as f64 / total as f64
        },
        rate_summary: manifest
            .code
            .map(|c| {
                RateSummary::new(
                    c.rate.value(),
                    coded.steps,
                    eta,
                    manifest.pipeline.tau_fraction(),
                )
            })
            .transpose()
            .map_err(|e| CliError::Config(e.to_string()))?,
    })
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}
