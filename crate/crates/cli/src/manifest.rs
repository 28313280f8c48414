//! Experiment manifests: one TOML file describes a full pipeline run.
//! All randomness flows from the two seeds named here (code seed, model
//! seed); everything else is data on disk.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use synclass_core::encode::{DatasetKind, PipelineConfig, Setup};
use synclass_core::gru::TrainConfig;
use synclass_core::ldpc::{CodeKind, CodeRate};

use crate::CliError;

pub const DATA_ENV: &str = "SYNCLASS_DATA";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    pub dataset: DatasetSection,
    #[serde(default)]
    pub pipeline: PipelineConfig,
    #[serde(default)]
    pub code: Option<CodeSection>,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub kind: DatasetKind,
    /// Dataset root; falls back to $SYNCLASS_DATA, then ./data.
    #[serde(default)]
    pub root: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSection {
    pub rate: CodeRate,
    pub kind: CodeKind,
    #[serde(default = "default_code_seed")]
    pub seed: u64,
}

fn default_code_seed() -> u64 {
    1
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub units: usize,
    pub seed: u64,
    pub precision: Precision,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            units: 32,
            seed: 0,
            precision: Precision::F64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F64,
    F32,
}

/// Optimizer overrides; unset fields keep the standard settings.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub learning_rate: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub l2: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

impl ExperimentManifest {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let manifest: ExperimentManifest = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.pipeline
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        match (self.pipeline.setup, &self.code) {
            (Setup::None, Some(_)) => {
                return Err(CliError::Config(
                    "setup \"none\" must not name a code".into(),
                ))
            }
            (Setup::Setup1 | Setup::Setup2, None) => {
                return Err(CliError::Config(format!(
                    "setup {:?} requires a [code] section",
                    self.pipeline.setup
                )))
            }
            _ => {}
        }
        if self.model.units == 0 {
            return Err(CliError::Config("model.units must be positive".into()));
        }
        Ok(())
    }

    pub fn data_root(&self) -> PathBuf {
        self.dataset
            .root
            .clone()
            .or_else(|| std::env::var_os(DATA_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("data"))
    }

    pub fn train_config(&self) -> TrainConfig {
        let defaults = TrainConfig::default();
        TrainConfig {
            learning_rate: self.train.learning_rate.unwrap_or(defaults.learning_rate),
            epochs: self.train.epochs.unwrap_or(defaults.epochs),
            batch_size: self.train.batch_size.unwrap_or(defaults.batch_size),
            l2: self.train.l2.unwrap_or(defaults.l2),
            units: self.model.units,
            seed: self.model.seed,
            ..defaults
        }
    }

    /// Hash of everything that determines the run's numbers. Local paths
    /// (dataset root, output dir) are excluded so the same experiment
    /// hashes identically on any machine.
    pub fn manifest_hash(&self) -> [u8; 32] {
        let mut normalized = self.clone();
        normalized.dataset.root = None;
        normalized.output.dir = None;
        hash_json(&normalized)
    }

    /// Hash of the fields that determine the encoded dataset only (the
    /// model and optimizer play no part), used as the encoding cache key.
    pub fn encode_hash(&self) -> [u8; 32] {
        #[derive(Serialize)]
        struct EncodeIdentity<'a> {
            kind: DatasetKind,
            pipeline: &'a PipelineConfig,
            code: &'a Option<CodeSection>,
        }
        hash_json(&EncodeIdentity {
            kind: self.dataset.kind,
            pipeline: &self.pipeline,
            code: &self.code,
        })
    }

    /// Directory all run artifacts land in.
    pub fn output_dir(&self) -> PathBuf {
        self.output.dir.clone().unwrap_or_else(|| {
            PathBuf::from("runs").join(format!("run-{}", &hex(&self.manifest_hash())[..12]))
        })
    }
}

fn hash_json<T: Serialize>(value: &T) -> [u8; 32] {
    let json = serde_json::to_string(value).expect("manifest serializes");
    let mut hasher = Sha256::new();
    hasher.update(json.as_bytes());
    hasher.finalize().into()
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
