//! JPEG-style front end for Setup 2: blockwise 8x8 DCT, quality-factor
//! scaled quantization with the standard luminance table, and optional
//! truncation to the top-left tau x tau sub-block of each block.
//!
//! Zigzag scanning, RLE and Huffman coding are deliberately absent: the
//! quantized coefficients go straight to bitplane extraction.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("quality factor {0} outside 1..=100")]
    QualityOutOfRange(u32),
    #[error("truncation level {0} is not 2 or 4")]
    BadTruncation(usize),
    #[error("map already truncated to {0}x{0}")]
    AlreadyTruncated(usize),
    #[error("channel has {got} pixels, expected {expected}")]
    BadChannelLen { got: usize, expected: usize },
}

pub const BLOCK: usize = 8;
/// Channels are 32x32 = 16 blocks of 8x8.
pub const GRID: usize = 32;
pub const BLOCKS_PER_SIDE: usize = GRID / BLOCK;
pub const CHANNEL_LEN: usize = GRID * GRID;

/// ITU T.81 Annex K luminance quantization table (quality 50 baseline).
pub const BASE_LUMINANCE_TABLE: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// An 8x8 quantization table; every entry is at least 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantTable(pub [u16; 64]);

impl QuantTable {
    pub fn base_luminance() -> Self {
        QuantTable(BASE_LUMINANCE_TABLE)
    }
}

/// IJG quality scaling: `S = 5000/QF` below 50, `200 - 2 QF` from 50 up;
/// each entry becomes `clamp(floor((entry * S + 50) / 100), 1, 255)`.
pub fn scale_quant_table(base: &QuantTable, qf: u32) -> Result<QuantTable, TransformError> {
    if !(1..=100).contains(&qf) {
        return Err(TransformError::QualityOutOfRange(qf));
    }
    let scale = if qf < 50 { 5000 / qf } else { 200 - 2 * qf };
    let mut out = [0u16; 64];
    for (o, &e) in out.iter_mut().zip(&base.0) {
        *o = ((e as u32 * scale + 50) / 100).clamp(1, 255) as u16;
    }
    Ok(QuantTable(out))
}

fn dct_matrix() -> &'static [[f64; BLOCK]; BLOCK] {
    use std::sync::OnceLock;
    static MATRIX: OnceLock<[[f64; BLOCK]; BLOCK]> = OnceLock::new();
    MATRIX.get_or_init(|| {
        let mut m = [[0.0; BLOCK]; BLOCK];
        for (u, row) in m.iter_mut().enumerate() {
            let alpha = if u == 0 {
                (1.0 / BLOCK as f64).sqrt()
            } else {
                (2.0 / BLOCK as f64).sqrt()
            };
            for (x, v) in row.iter_mut().enumerate() {
                *v = alpha
                    * ((2.0 * x as f64 + 1.0) * u as f64 * std::f64::consts::PI
                        / (2.0 * BLOCK as f64))
                        .cos();
            }
        }
        m
    })
}

/// Orthonormal 2D DCT-II of one 8x8 block (row-major); position (0, 0) is
/// the DC coefficient, which equals 8c for a constant block of value c.
pub fn dct2d_block(block: &[f64; 64]) -> [f64; 64] {
    let c = dct_matrix();
    // Y = C X C^T, via rows then columns.
    let mut tmp = [0.0; 64];
    for u in 0..BLOCK {
        for x in 0..BLOCK {
            let mut acc = 0.0;
            for y in 0..BLOCK {
                acc += c[u][y] * block[x * BLOCK + y];
            }
            tmp[x * BLOCK + u] = acc;
        }
    }
    let mut out = [0.0; 64];
    for u in 0..BLOCK {
        for v in 0..BLOCK {
            let mut acc = 0.0;
            for x in 0..BLOCK {
                acc += c[u][x] * tmp[x * BLOCK + v];
            }
            out[u * BLOCK + v] = acc;
        }
    }
    out
}

/// Inverse of [`dct2d_block`] up to floating round-off.
pub fn idct2d_block(coeffs: &[f64; 64]) -> [f64; 64] {
    let c = dct_matrix();
    // X = C^T Y C.
    let mut tmp = [0.0; 64];
    for x in 0..BLOCK {
        for v in 0..BLOCK {
            let mut acc = 0.0;
            for u in 0..BLOCK {
                acc += c[u][x] * coeffs[u * BLOCK + v];
            }
            tmp[x * BLOCK + v] = acc;
        }
    }
    let mut out = [0.0; 64];
    for x in 0..BLOCK {
        for y in 0..BLOCK {
            let mut acc = 0.0;
            for v in 0..BLOCK {
                acc += tmp[x * BLOCK + v] * c[v][y];
            }
            out[x * BLOCK + y] = acc;
        }
    }
    out
}

/// Divide by the table entries and round half away from zero.
pub fn quantize(coeffs: &[f64; 64], table: &QuantTable) -> [i32; 64] {
    let mut out = [0i32; 64];
    for ((o, &c), &e) in out.iter_mut().zip(coeffs).zip(&table.0) {
        *o = (c / e as f64).round() as i32;
    }
    out
}

/// Quantized DCT coefficients of one 32x32 channel, stored on the 32x32
/// grid; after truncation, positions outside each block's top-left
/// tau x tau sub-block are zero and excluded from flattening.
#[derive(Debug, Clone)]
pub struct CoeffMap {
    grid: Vec<i32>,
    pub qf: u32,
    pub tau: usize,
}

/// Coefficient flattening order ahead of bitplane extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlattenOrder {
    /// Block by block (row-major over blocks), row-major inside each block.
    #[default]
    BlockRaster,
    /// Raster scan of the whole grid, skipping truncated positions.
    GlobalRaster,
}

impl CoeffMap {
    /// Level-shift (optional), 8x8 block DCT and quantization of one
    /// 32x32 channel.
    pub fn from_channel(
        channel: &[f64],
        table: &QuantTable,
        qf: u32,
        level_shift: bool,
    ) -> Result<CoeffMap, TransformError> {
        if channel.len() != CHANNEL_LEN {
            return Err(TransformError::BadChannelLen {
                got: channel.len(),
                expected: CHANNEL_LEN,
            });
        }
        let shift = if level_shift { 128.0 } else { 0.0 };
        let mut grid = vec![0i32; CHANNEL_LEN];
        let mut block = [0.0; 64];
        for br in 0..BLOCKS_PER_SIDE {
            for bc in 0..BLOCKS_PER_SIDE {
                for r in 0..BLOCK {
                    for c in 0..BLOCK {
                        block[r * BLOCK + c] =
                            channel[(br * BLOCK + r) * GRID + bc * BLOCK + c] - shift;
                    }
                }
                let quantized = quantize(&dct2d_block(&block), table);
                for r in 0..BLOCK {
                    for c in 0..BLOCK {
                        grid[(br * BLOCK + r) * GRID + bc * BLOCK + c] =
                            quantized[r * BLOCK + c];
                    }
                }
            }
        }
        Ok(CoeffMap { grid, qf, tau: 8 })
    }

    pub fn grid(&self) -> &[i32] {
        &self.grid
    }

    /// Coefficients kept per block.
    pub fn kept_per_block(&self) -> usize {
        self.tau * self.tau
    }

    /// Length of the flattened coefficient vector.
    pub fn flat_len(&self) -> usize {
        BLOCKS_PER_SIDE * BLOCKS_PER_SIDE * self.kept_per_block()
    }

    /// Keep only rows and columns [0, tau) of every 8x8 block.
    pub fn truncate_blocks(&self, tau: usize) -> Result<CoeffMap, TransformError> {
        if tau != 2 && tau != 4 {
            return Err(TransformError::BadTruncation(tau));
        }
        if self.tau != 8 {
            return Err(TransformError::AlreadyTruncated(self.tau));
        }
        let mut grid = self.grid.clone();
        for (i, v) in grid.iter_mut().enumerate() {
            let (r, c) = (i / GRID, i % GRID);
            if r % BLOCK >= tau || c % BLOCK >= tau {
                *v = 0;
            }
        }
        Ok(CoeffMap {
            grid,
            qf: self.qf,
            tau,
        })
    }

    /// Dense coefficient vector of length `flat_len()` in the given order.
    pub fn flatten(&self, order: FlattenOrder) -> Vec<i32> {
        let tau = self.tau;
        let mut out = Vec::with_capacity(self.flat_len());
        match order {
            FlattenOrder::BlockRaster => {
                for br in 0..BLOCKS_PER_SIDE {
                    for bc in 0..BLOCKS_PER_SIDE {
                        for r in 0..tau {
                            for c in 0..tau {
                                out.push(self.grid[(br * BLOCK + r) * GRID + bc * BLOCK + c]);
                            }
                        }
                    }
                }
            }
            FlattenOrder::GlobalRaster => {
                for r in 0..GRID {
                    for c in 0..GRID {
                        if r % BLOCK < tau && c % BLOCK < tau {
                            out.push(self.grid[r * GRID + c]);
                        }
                    }
                }
            }
        }
        out
    }
}
