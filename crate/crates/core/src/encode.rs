//! Dataset-level encoding: turn labeled images into the GRU's input
//! sequences under one of three regimes.
//!
//! - `none`: raw pixel bitplanes of length N = 1024 (uncoded baseline)
//! - `setup1`: pixel bitplanes compressed to length-M syndromes
//! - `setup2`: 8x8 DCT + quantization (+ optional truncation), coefficient
//!   sign/magnitude bitplanes compressed to syndromes
//!
//! Grayscale data yields up to 8 planes; NTSC color data yields up to 8
//! per channel, fed Y then I then Q. Within a channel the feed order is
//! MSB-first by default (the sign plane leads for DCT coefficients), with
//! an LSB-first switch for ablation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitplanes::{self, BitplaneStack};
use crate::datasets::{self, Dataset, DatasetError, ImageSample};
use crate::gru::{EncodedDataset, EncodedSample};
use crate::ldpc::{encode_syndrome, LdpcError, ParityCheckMatrix};
use crate::transform::{
    scale_quant_table, CoeffMap, FlattenOrder, QuantTable, TransformError, CHANNEL_LEN,
};

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("{0}")]
    Dataset(#[from] DatasetError),
    #[error("{0}")]
    Bitplane(#[from] bitplanes::BitplaneError),
    #[error("{0}")]
    Ldpc(#[from] LdpcError),
    #[error("{0}")]
    Transform(#[from] TransformError),
    #[error("invalid pipeline: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Setup {
    /// Raw bitplanes, no code.
    None,
    /// LDPC syndromes of the pixel bitplanes.
    #[default]
    Setup1,
    /// LDPC syndromes of quantized-DCT-coefficient bitplanes.
    Setup2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlaneOrder {
    #[default]
    MsbFirst,
    LsbFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetKind {
    Mnist,
    FashionMnist,
    /// CIFAR-10 luminance channel only.
    Ycifar10,
    /// CIFAR-10 in NTSC (YIQ) representation, three channels.
    Cifar10Yiq,
}

impl DatasetKind {
    pub fn channels(self) -> usize {
        match self {
            DatasetKind::Cifar10Yiq => 3,
            _ => 1,
        }
    }

    pub fn dir_name(self) -> &'static str {
        match self {
            DatasetKind::Mnist => "mnist",
            DatasetKind::FashionMnist => "fashion-mnist",
            DatasetKind::Ycifar10 | DatasetKind::Cifar10Yiq => "cifar-10-batches-bin",
        }
    }
}

/// How one image channel enters the two coding paths: integer values for
/// bitplane extraction, real values (plus level-shift choice) for the DCT.
#[derive(Debug, Clone)]
pub struct PreparedChannel {
    pub integer: Vec<u8>,
    pub real: Vec<f64>,
    pub level_shift: bool,
}

#[derive(Debug, Clone)]
pub struct PreparedImage {
    pub channels: Vec<PreparedChannel>,
    pub label: u8,
}

/// Zero-pad and color-convert one sample for `kind`.
pub fn prepare_image(kind: DatasetKind, sample: &ImageSample) -> Result<PreparedImage, EncodeError> {
    let padded = datasets::pad_to_32(sample)?;
    let channels = match kind {
        DatasetKind::Mnist | DatasetKind::FashionMnist => {
            vec![integer_channel(padded.channel(0))]
        }
        DatasetKind::Ycifar10 => {
            let luma = datasets::rgb_to_luma(&padded)?;
            vec![integer_channel(luma.channel(0))]
        }
        DatasetKind::Cifar10Yiq => {
            let yiq = datasets::rgb_to_yiq(&padded)?;
            let y = PreparedChannel {
                integer: yiq.channels[0]
                    .iter()
                    .map(|&v| v.round().clamp(0.0, 255.0) as u8)
                    .collect(),
                real: yiq.channels[0].clone(),
                level_shift: true,
            };
            let i = PreparedChannel {
                integer: datasets::chroma_to_u8(&yiq.channels[1], datasets::YIQ_I_MAX),
                real: yiq.channels[1].clone(),
                level_shift: false,
            };
            let q = PreparedChannel {
                integer: datasets::chroma_to_u8(&yiq.channels[2], datasets::YIQ_Q_MAX),
                real: yiq.channels[2].clone(),
                level_shift: false,
            };
            vec![y, i, q]
        }
    };
    Ok(PreparedImage {
        channels,
        label: padded.label,
    })
}

fn integer_channel(pixels: &[u8]) -> PreparedChannel {
    PreparedChannel {
        integer: pixels.to_vec(),
        real: pixels.iter().map(|&v| v as f64).collect(),
        level_shift: true,
    }
}

/// Full pipeline settings for one encoding run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub setup: Setup,
    /// Bitplanes kept per channel, 1..=8. Timesteps = this x channels.
    pub planes_per_channel: usize,
    pub plane_order: PlaneOrder,
    /// JPEG quality factor (setup2 only).
    pub qf: u32,
    /// Sub-block truncation: 8 (off), 4, or 2 (setup2 only).
    pub truncation: usize,
    pub flatten: FlattenOrder,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            setup: Setup::Setup1,
            planes_per_channel: 8,
            plane_order: PlaneOrder::MsbFirst,
            qf: 50,
            truncation: 8,
            flatten: FlattenOrder::BlockRaster,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), EncodeError> {
        if !(1..=8).contains(&self.planes_per_channel) {
            return Err(EncodeError::Config(format!(
                "planes per channel {} outside 1..=8",
                self.planes_per_channel
            )));
        }
        if self.setup == Setup::Setup2 && !(1..=100).contains(&self.qf) {
            return Err(EncodeError::Config(format!("qf {} outside 1..=100", self.qf)));
        }
        if ![8, 4, 2].contains(&self.truncation) {
            return Err(EncodeError::Config(format!(
                "truncation {} not one of 8|4|2",
                self.truncation
            )));
        }
        if self.setup != Setup::Setup2 && self.truncation != 8 {
            return Err(EncodeError::Config(
                "truncation requires setup2".into(),
            ));
        }
        Ok(())
    }

    /// Bitplane length before any coding: 1024 for pixel planes, the
    /// flattened coefficient count for setup2.
    pub fn plane_len(&self) -> usize {
        match self.setup {
            Setup::Setup2 => {
                16 * self.truncation * self.truncation
            }
            _ => CHANNEL_LEN,
        }
    }

    /// Fraction of coefficients kept by the truncation.
    pub fn tau_fraction(&self) -> f64 {
        (self.truncation * self.truncation) as f64 / 64.0
    }
}

/// Encode one prepared image into its timestep sequence.
pub fn encode_image(
    image: &PreparedImage,
    config: &PipelineConfig,
    code: Option<&ParityCheckMatrix>,
    table: Option<&QuantTable>,
) -> Result<EncodedSample, EncodeError> {
    let mut sequence = Vec::with_capacity(config.planes_per_channel * image.channels.len());
    for channel in &image.channels {
        let stack = match config.setup {
            Setup::None | Setup::Setup1 => {
                let values: Vec<u32> = channel.integer.iter().map(|&v| v as u32).collect();
                bitplanes::decompose(&values, 8)?
            }
            Setup::Setup2 => {
                let table = table.expect("setup2 requires a quantization table");
                let map = CoeffMap::from_channel(&channel.real, table, config.qf, channel.level_shift)?;
                let map = if config.truncation == 8 {
                    map
                } else {
                    map.truncate_blocks(config.truncation)?
                };
                bitplanes::signed_to_planes(&map.flatten(config.flatten), 8)?
            }
        };
        append_planes(&stack, config, code, &mut sequence)?;
    }
    Ok(EncodedSample {
        sequence,
        label: image.label,
    })
}

fn append_planes(
    stack: &BitplaneStack,
    config: &PipelineConfig,
    code: Option<&ParityCheckMatrix>,
    sequence: &mut Vec<crate::bitplanes::BitSeq>,
) -> Result<(), EncodeError> {
    let planes: Vec<_> = match config.plane_order {
        PlaneOrder::MsbFirst => stack.iter_msb_first().collect(),
        PlaneOrder::LsbFirst => stack.iter_lsb_first().collect(),
    };
    for plane in planes.into_iter().take(config.planes_per_channel) {
        match code {
            Some(h) => sequence.push(encode_syndrome(h, plane)?.bits),
            None => sequence.push(plane.bits.clone()),
        }
    }
    Ok(())
}

/// Encode a whole dataset; `code` must be present for setup1/setup2 and
/// absent for the uncoded baseline.
pub fn encode_dataset(
    kind: DatasetKind,
    dataset: &Dataset,
    config: &PipelineConfig,
    code: Option<&ParityCheckMatrix>,
) -> Result<EncodedDataset, EncodeError> {
    config.validate()?;
    match (config.setup, code) {
        (Setup::None, Some(_)) => {
            return Err(EncodeError::Config("uncoded baseline takes no code".into()))
        }
        // Setup 2 without a code is the plain DCT+quantization baseline;
        // setup 1 without a code is just `none` and stays an error.
        (Setup::Setup1, None) => {
            return Err(EncodeError::Config(
                "setup1 requires a parity-check matrix (use setup \"none\" for raw planes)".into(),
            ))
        }
        _ => {}
    }
    if let Some(h) = code {
        if h.num_cols() != config.plane_len() {
            return Err(EncodeError::Config(format!(
                "code length {} does not match plane length {}",
                h.num_cols(),
                config.plane_len()
            )));
        }
    }
    let table = match config.setup {
        Setup::Setup2 => Some(scale_quant_table(&QuantTable::base_luminance(), config.qf)?),
        _ => None,
    };

    let encode_one = |sample: &ImageSample| -> Result<EncodedSample, EncodeError> {
        let image = prepare_image(kind, sample)?;
        encode_image(&image, config, code, table.as_ref())
    };

    #[cfg(feature = "parallel")]
    let samples: Result<Vec<EncodedSample>, EncodeError> = {
        use rayon::prelude::*;
        dataset.samples.par_iter().map(encode_one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let samples: Result<Vec<EncodedSample>, EncodeError> =
        dataset.samples.iter().map(encode_one).collect();
    let samples = samples?;

    let input_dim = match code {
        Some(h) => h.num_rows(),
        None => config.plane_len(),
    };
    Ok(EncodedDataset {
        samples,
        steps: config.planes_per_channel * kind.channels(),
        input_dim,
        classes: dataset.num_classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::Split;
    use crate::ldpc::{peg_construct, DegreeDistribution};

    fn gray_dataset(pixel: u8, n: usize) -> Dataset {
        Dataset {
            samples: (0..n)
                .map(|i| ImageSample {
                    pixels: vec![pixel; 28 * 28],
                    rows: 28,
                    cols: 28,
                    channels: 1,
                    label: (i % 10) as u8,
                })
                .collect(),
            split: Split::Train,
            num_classes: 10,
        }
    }

    fn half_rate_code() -> ParityCheckMatrix {
        let dist = DegreeDistribution::regular(3, 6).unwrap();
        peg_construct(1024, 512, &dist, 1).unwrap()
    }

    #[test]
    fn uncoded_emits_full_length_planes() {
        let config = PipelineConfig {
            setup: Setup::None,
            ..PipelineConfig::default()
        };
        let out = encode_dataset(DatasetKind::Mnist, &gray_dataset(173, 3), &config, None).unwrap();
        assert_eq!(out.steps, 8);
        assert_eq!(out.input_dim, 1024);
        assert_eq!(out.samples.len(), 3);
        // 173 = 10101101: the MSB plane is fed first; padded area is zero.
        let first = &out.samples[0].sequence[0];
        assert!(first.get(0));
        assert_eq!(first.len(), 1024);
        let second = &out.samples[0].sequence[1];
        assert!(!second.get(0));
    }

    #[test]
    fn setup1_all_black_gives_zero_syndromes() {
        let h = half_rate_code();
        let config = PipelineConfig::default();
        let out =
            encode_dataset(DatasetKind::Mnist, &gray_dataset(0, 2), &config, Some(&h)).unwrap();
        assert_eq!(out.input_dim, 512);
        for sample in &out.samples {
            for plane in &sample.sequence {
                assert_eq!(plane.count_ones(), 0);
            }
        }
    }

    #[test]
    fn setup2_mid_gray_gives_zero_syndromes() {
        // The level shift turns a flat 128 image into an all-zero signal,
        // so every coefficient, plane and syndrome is zero at any QF.
        let h = half_rate_code();
        let full = Dataset {
            samples: vec![ImageSample {
                pixels: vec![128; 1024],
                rows: 32,
                cols: 32,
                channels: 1,
                label: 0,
            }],
            split: Split::Train,
            num_classes: 10,
        };
        for qf in [10, 50, 95] {
            let config = PipelineConfig {
                setup: Setup::Setup2,
                qf,
                ..PipelineConfig::default()
            };
            let out = encode_dataset(DatasetKind::Mnist, &full, &config, Some(&h)).unwrap();
            for plane in &out.samples[0].sequence {
                assert_eq!(plane.count_ones(), 0);
            }
        }
    }

    #[test]
    fn setup2_shapes_follow_rate_and_truncation() {
        let h = half_rate_code();
        let config = PipelineConfig {
            setup: Setup::Setup2,
            ..PipelineConfig::default()
        };
        let out =
            encode_dataset(DatasetKind::Mnist, &gray_dataset(90, 2), &config, Some(&h)).unwrap();
        assert_eq!(out.steps, 8);
        assert_eq!(out.input_dim, 512);

        // tau=4 shrinks planes to 256; the 1024-column code no longer fits.
        let truncated = PipelineConfig {
            setup: Setup::Setup2,
            truncation: 4,
            ..PipelineConfig::default()
        };
        let err =
            encode_dataset(DatasetKind::Mnist, &gray_dataset(90, 1), &truncated, Some(&h))
                .unwrap_err();
        assert!(matches!(err, EncodeError::Config(_)), "{err}");

        let dist = DegreeDistribution::regular(3, 6).unwrap();
        let small = peg_construct(256, 128, &dist, 1).unwrap();
        let out = encode_dataset(
            DatasetKind::Mnist,
            &gray_dataset(90, 1),
            &truncated,
            Some(&small),
        )
        .unwrap();
        assert_eq!(out.input_dim, 128);
    }

    #[test]
    fn plane_order_flag_reverses_sequence() {
        let config_msb = PipelineConfig {
            setup: Setup::None,
            ..PipelineConfig::default()
        };
        let config_lsb = PipelineConfig {
            plane_order: PlaneOrder::LsbFirst,
            ..config_msb
        };
        let data = gray_dataset(173, 1);
        let msb = encode_dataset(DatasetKind::Mnist, &data, &config_msb, None).unwrap();
        let lsb = encode_dataset(DatasetKind::Mnist, &data, &config_lsb, None).unwrap();
        let forward: Vec<_> = msb.samples[0].sequence.iter().collect();
        let mut reversed: Vec<_> = lsb.samples[0].sequence.iter().collect();
        reversed.reverse();
        assert_eq!(forward, reversed);
    }

    #[test]
    fn color_dataset_feeds_y_then_i_then_q() {
        // A flat red image: Y/I/Q planes differ, so channel order shows.
        let red = Dataset {
            samples: vec![ImageSample {
                pixels: [vec![255u8; 1024], vec![0u8; 1024], vec![0u8; 1024]].concat(),
                rows: 32,
                cols: 32,
                channels: 3,
                label: 1,
            }],
            split: Split::Train,
            num_classes: 10,
        };
        let config = PipelineConfig {
            setup: Setup::None,
            planes_per_channel: 2,
            ..PipelineConfig::default()
        };
        let out = encode_dataset(DatasetKind::Cifar10Yiq, &red, &config, None).unwrap();
        assert_eq!(out.steps, 6);
        // Y of pure red is 76.245 -> 76 = 01001100: MSB plane is 0.
        assert!(!out.samples[0].sequence[0].get(0));
        // I maps to its positive extreme 255 = 11111111: both planes set.
        assert!(out.samples[0].sequence[2].get(0));
        assert!(out.samples[0].sequence[3].get(0));
    }

    #[test]
    fn config_validation_rejects_bad_combinations() {
        let h = half_rate_code();
        let bad_planes = PipelineConfig {
            planes_per_channel: 9,
            ..PipelineConfig::default()
        };
        assert!(encode_dataset(DatasetKind::Mnist, &gray_dataset(0, 1), &bad_planes, Some(&h))
            .is_err());
        let trunc_without_dct = PipelineConfig {
            truncation: 4,
            ..PipelineConfig::default()
        };
        assert!(encode_dataset(
            DatasetKind::Mnist,
            &gray_dataset(0, 1),
            &trunc_without_dct,
            Some(&h)
        )
        .is_err());
        let code_on_uncoded = PipelineConfig {
            setup: Setup::None,
            ..PipelineConfig::default()
        };
        assert!(encode_dataset(
            DatasetKind::Mnist,
            &gray_dataset(0, 1),
            &code_on_uncoded,
            Some(&h)
        )
        .is_err());
    }
}
