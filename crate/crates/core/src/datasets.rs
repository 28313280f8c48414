//! Dataset ingestion: MNIST/Fashion-MNIST IDX files and CIFAR-10 binary
//! batches, plus the color conversions and zero-padding the pipeline needs.
//!
//! Loaders hold whole datasets in memory (at most ~180 MB) and return
//! immutable samples; no decoding of PNG/JPEG containers and no download
//! logic, paths are supplied by the caller.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{BigEndian, ReadBytesExt, WriteBytesExt};
use thiserror::Error;

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;
/// CIFAR-10 binary record: 1 label byte + 3 x 1024 channel-planar bytes.
const CIFAR_RECORD: usize = 3073;

/// NTSC conversion matrix, rows Y/I/Q, columns R/G/B.
pub const RGB_TO_YIQ: [[f64; 3]; 3] = [
    [0.299, 0.587, 0.114],
    [0.596, -0.274, -0.322],
    [0.211, -0.523, 0.312],
];

/// Analytic channel extrema for 8-bit RGB input: |I| <= 0.596*255,
/// |Q| <= 0.523*255. Used to map chroma affinely back onto [0, 255].
pub const YIQ_I_MAX: f64 = 0.596 * 255.0;
pub const YIQ_Q_MAX: f64 = 0.523 * 255.0;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: expected magic {expected:#010x}, found {found:#010x}")]
    BadMagic {
        path: String,
        expected: u32,
        found: u32,
    },
    #[error("image file has {images} records but label file has {labels}")]
    CountMismatch { images: usize, labels: usize },
    #[error("{path}: {reason}")]
    Format { path: String, reason: String },
    #[error("expected {expected} channels, sample has {got}")]
    ChannelArity { expected: usize, got: usize },
    #[error("sample is {rows}x{cols}, larger than 32x32")]
    TooLarge { rows: usize, cols: usize },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Validation,
}

/// One labeled image; pixels are stored channel-planar
/// (`pixels[ch * rows * cols + r * cols + c]`), each value in [0, 255].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageSample {
    pub pixels: Vec<u8>,
    pub rows: usize,
    pub cols: usize,
    pub channels: usize,
    pub label: u8,
}

impl ImageSample {
    pub fn pixel(&self, ch: usize, r: usize, c: usize) -> u8 {
        self.pixels[ch * self.rows * self.cols + r * self.cols + c]
    }

    pub fn channel(&self, ch: usize) -> &[u8] {
        let plane = self.rows * self.cols;
        &self.pixels[ch * plane..(ch + 1) * plane]
    }
}

/// A real-valued multi-channel image, produced by the NTSC conversion.
#[derive(Debug, Clone)]
pub struct RealSample {
    /// One plane per channel, row-major.
    pub channels: Vec<Vec<f64>>,
    pub rows: usize,
    pub cols: usize,
    pub label: u8,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub samples: Vec<ImageSample>,
    pub split: Split,
    pub num_classes: usize,
}

/// Read an IDX image/label file pair into one dataset split.
pub fn load_idx(
    images_path: &Path,
    labels_path: &Path,
    split: Split,
) -> Result<Dataset, DatasetError> {
    let mut images = BufReader::new(File::open(images_path).map_err(io_err(images_path))?);
    let magic = images.read_u32::<BigEndian>().map_err(io_err(images_path))?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(DatasetError::BadMagic {
            path: images_path.display().to_string(),
            expected: IDX_IMAGES_MAGIC,
            found: magic,
        });
    }
    let count = images.read_u32::<BigEndian>().map_err(io_err(images_path))? as usize;
    let rows = images.read_u32::<BigEndian>().map_err(io_err(images_path))? as usize;
    let cols = images.read_u32::<BigEndian>().map_err(io_err(images_path))? as usize;

    let mut labels = BufReader::new(File::open(labels_path).map_err(io_err(labels_path))?);
    let magic = labels.read_u32::<BigEndian>().map_err(io_err(labels_path))?;
    if magic != IDX_LABELS_MAGIC {
        return Err(DatasetError::BadMagic {
            path: labels_path.display().to_string(),
            expected: IDX_LABELS_MAGIC,
            found: magic,
        });
    }
    let label_count = labels.read_u32::<BigEndian>().map_err(io_err(labels_path))? as usize;
    if label_count != count {
        return Err(DatasetError::CountMismatch {
            images: count,
            labels: label_count,
        });
    }

    let mut label_bytes = vec![0u8; count];
    labels
        .read_exact(&mut label_bytes)
        .map_err(io_err(labels_path))?;

    let plane = rows * cols;
    let mut samples = Vec::with_capacity(count);
    let mut buf = vec![0u8; plane];
    for &label in &label_bytes {
        images.read_exact(&mut buf).map_err(io_err(images_path))?;
        samples.push(ImageSample {
            pixels: buf.clone(),
            rows,
            cols,
            channels: 1,
            label,
        });
    }
    let num_classes = samples.iter().map(|s| s.label as usize + 1).max().unwrap_or(0);
    Ok(Dataset {
        samples,
        split,
        num_classes: num_classes.max(10),
    })
}

/// Write samples back to the IDX pair; inverse of [`load_idx`].
pub fn write_idx(
    samples: &[ImageSample],
    images_path: &Path,
    labels_path: &Path,
) -> Result<(), DatasetError> {
    let (rows, cols) = samples
        .first()
        .map(|s| (s.rows, s.cols))
        .unwrap_or((0, 0));
    let mut images = BufWriter::new(File::create(images_path).map_err(io_err(images_path))?);
    images
        .write_u32::<BigEndian>(IDX_IMAGES_MAGIC)
        .map_err(io_err(images_path))?;
    images
        .write_u32::<BigEndian>(samples.len() as u32)
        .map_err(io_err(images_path))?;
    images
        .write_u32::<BigEndian>(rows as u32)
        .map_err(io_err(images_path))?;
    images
        .write_u32::<BigEndian>(cols as u32)
        .map_err(io_err(images_path))?;
    let mut labels = BufWriter::new(File::create(labels_path).map_err(io_err(labels_path))?);
    labels
        .write_u32::<BigEndian>(IDX_LABELS_MAGIC)
        .map_err(io_err(labels_path))?;
    labels
        .write_u32::<BigEndian>(samples.len() as u32)
        .map_err(io_err(labels_path))?;
    for sample in samples {
        images.write_all(&sample.pixels).map_err(io_err(images_path))?;
        labels.write_all(&[sample.label]).map_err(io_err(labels_path))?;
    }
    Ok(())
}

/// Load the five CIFAR-10 training batches and the test batch from
/// `batch_dir`, returning (train, validation).
pub fn load_cifar10(batch_dir: &Path) -> Result<(Dataset, Dataset), DatasetError> {
    let mut train = Vec::with_capacity(50_000);
    for i in 1..=5 {
        let path = batch_dir.join(format!("data_batch_{i}.bin"));
        read_cifar_batch(&path, &mut train)?;
    }
    let mut validation = Vec::with_capacity(10_000);
    read_cifar_batch(&batch_dir.join("test_batch.bin"), &mut validation)?;
    Ok((
        Dataset {
            samples: train,
            split: Split::Train,
            num_classes: 10,
        },
        Dataset {
            samples: validation,
            split: Split::Validation,
            num_classes: 10,
        },
    ))
}

/// Read one CIFAR-10 binary batch file (3073-byte records).
pub fn read_cifar_batch(path: &Path, out: &mut Vec<ImageSample>) -> Result<(), DatasetError> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    if bytes.is_empty() || bytes.len() % CIFAR_RECORD != 0 {
        return Err(DatasetError::Format {
            path: path.display().to_string(),
            reason: format!(
                "length {} is not a positive multiple of {CIFAR_RECORD}",
                bytes.len()
            ),
        });
    }
    for record in bytes.chunks_exact(CIFAR_RECORD) {
        let label = record[0];
        if label > 9 {
            return Err(DatasetError::Format {
                path: path.display().to_string(),
                reason: format!("label {label} out of range"),
            });
        }
        out.push(ImageSample {
            pixels: record[1..].to_vec(),
            rows: 32,
            cols: 32,
            channels: 3,
            label,
        });
    }
    Ok(())
}

/// Write samples as one CIFAR-10 binary batch; inverse of
/// [`read_cifar_batch`].
pub fn write_cifar_batch(samples: &[ImageSample], path: &Path) -> Result<(), DatasetError> {
    let mut out = BufWriter::new(File::create(path).map_err(io_err(path))?);
    for sample in samples {
        out.write_all(&[sample.label]).map_err(io_err(path))?;
        out.write_all(&sample.pixels).map_err(io_err(path))?;
    }
    Ok(())
}

/// Canonical MNIST-layout file names under `root`.
pub fn load_mnist_layout(root: &Path, split: Split) -> Result<Dataset, DatasetError> {
    let prefix = match split {
        Split::Train => "train",
        Split::Validation => "t10k",
    };
    load_idx(
        &root.join(format!("{prefix}-images-idx3-ubyte")),
        &root.join(format!("{prefix}-labels-idx1-ubyte")),
        split,
    )
}

/// NTSC (YIQ) conversion of an RGB sample; Y stays in [0, 255], I and Q
/// keep their signed analytic ranges. No chroma downscaling.
pub fn rgb_to_yiq(sample: &ImageSample) -> Result<RealSample, DatasetError> {
    if sample.channels != 3 {
        return Err(DatasetError::ChannelArity {
            expected: 3,
            got: sample.channels,
        });
    }
    let plane = sample.rows * sample.cols;
    let mut channels = vec![vec![0.0; plane]; 3];
    for i in 0..plane {
        let rgb = [
            sample.pixels[i] as f64,
            sample.pixels[plane + i] as f64,
            sample.pixels[2 * plane + i] as f64,
        ];
        for (out, row) in channels.iter_mut().zip(&RGB_TO_YIQ) {
            out[i] = row.iter().zip(&rgb).map(|(m, v)| m * v).sum();
        }
    }
    Ok(RealSample {
        channels,
        rows: sample.rows,
        cols: sample.cols,
        label: sample.label,
    })
}

/// BT.601 luma: `round(0.299 R + 0.587 G + 0.114 B)`, clamped to [0, 255].
pub fn rgb_to_luma(sample: &ImageSample) -> Result<ImageSample, DatasetError> {
    if sample.channels != 3 {
        return Err(DatasetError::ChannelArity {
            expected: 3,
            got: sample.channels,
        });
    }
    let plane = sample.rows * sample.cols;
    let pixels = (0..plane)
        .map(|i| {
            let y = 0.299 * sample.pixels[i] as f64
                + 0.587 * sample.pixels[plane + i] as f64
                + 0.114 * sample.pixels[2 * plane + i] as f64;
            y.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    Ok(ImageSample {
        pixels,
        rows: sample.rows,
        cols: sample.cols,
        channels: 1,
        label: sample.label,
    })
}

/// Zero-pad to 32x32: original pixels keep their positions in the top-left
/// block, appended rows and columns are zero.
pub fn pad_to_32(sample: &ImageSample) -> Result<ImageSample, DatasetError> {
    if sample.rows > 32 || sample.cols > 32 {
        return Err(DatasetError::TooLarge {
            rows: sample.rows,
            cols: sample.cols,
        });
    }
    if sample.rows == 32 && sample.cols == 32 {
        return Ok(sample.clone());
    }
    let mut pixels = vec![0u8; sample.channels * 32 * 32];
    for ch in 0..sample.channels {
        for r in 0..sample.rows {
            for c in 0..sample.cols {
                pixels[ch * 1024 + r * 32 + c] = sample.pixel(ch, r, c);
            }
        }
    }
    Ok(ImageSample {
        pixels,
        rows: 32,
        cols: 32,
        channels: sample.channels,
        label: sample.label,
    })
}

/// Affine map of a signed YIQ chroma plane onto [0, 255] integers using
/// the analytic extreme `max_abs`, for Setup 1 bitplane extraction.
pub fn chroma_to_u8(plane: &[f64], max_abs: f64) -> Vec<u8> {
    plane
        .iter()
        .map(|&v| (((v + max_abs) / (2.0 * max_abs)) * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect()
}
