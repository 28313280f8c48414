//! Interactive browser demo. Three operations over a 32x32 grayscale
//! image drawn on the page:
//!
//! - bitplane decomposition and LDPC syndrome encoding (with a live PEG
//!   code built in the browser)
//! - the JPEG-style front end: quantized DCT coefficients at a chosen
//!   quality factor and truncation, plus the image those coefficients
//!   still represent
//! - GRU classification straight from the syndromes, using a checkpoint
//!   trained by the native pipeline (fetched by the page at startup)
//!
//! Logic lives in `Result<_, String>` functions; the `wasm_bindgen`
//! surface only converts errors to `JsValue`, so everything is testable
//! natively.

use wasm_bindgen::prelude::*;

use synclass_core::bitplanes::{decompose, signed_to_planes, BitSeq};
use synclass_core::datasets::ImageSample;
use synclass_core::encode::{encode_image, prepare_image, DatasetKind, PipelineConfig};
use synclass_core::gru::{forward, read_checkpoint, EncodedSample, GruParams};
use synclass_core::ldpc::{
    encode_syndrome, girth, peg_construct, table_distribution, CodeKind, CodeRate,
    ParityCheckMatrix,
};
use synclass_core::metrics::{df_ratio, ApEnConfig};
use synclass_core::transform::{
    idct2d_block, scale_quant_table, CoeffMap, FlattenOrder, QuantTable, BLOCK, BLOCKS_PER_SIDE,
    GRID,
};

const N: usize = GRID * GRID;

fn js(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn check_image(pixels: &[u8]) -> Result<(), String> {
    if pixels.len() != N {
        return Err(format!("expected {N} pixels, got {}", pixels.len()));
    }
    Ok(())
}

/// Eight bitplanes of a 32x32 image, MSB first, as 0/1 bytes
/// (8 * 1024 entries).
#[wasm_bindgen]
pub fn bitplanes_msb_first(pixels: &[u8]) -> Result<Vec<u8>, JsValue> {
    planes_impl(pixels).map_err(js)
}

fn planes_impl(pixels: &[u8]) -> Result<Vec<u8>, String> {
    check_image(pixels)?;
    let values: Vec<u32> = pixels.iter().map(|&v| v as u32).collect();
    let stack = decompose(&values, 8).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(8 * N);
    for plane in stack.iter_msb_first() {
        out.extend(plane.bits.to_bytes());
    }
    Ok(out)
}

/// A live PEG-constructed code plus the trained classifier head.
#[wasm_bindgen]
pub struct DemoCode {
    code: ParityCheckMatrix,
    model: Option<GruParams<f64>>,
}

#[wasm_bindgen]
impl DemoCode {
    /// Construct the parity-check matrix in the page. `rate` is one of
    /// "1/4", "1/2", "3/5", "3/4".
    #[wasm_bindgen(constructor)]
    pub fn new(rate: &str, irregular: bool, seed: u64) -> Result<DemoCode, JsValue> {
        Self::new_impl(rate, irregular, seed).map_err(js)
    }

    /// Attach a checkpoint (the bytes of a `model.ckpt` trained natively).
    pub fn load_model(&mut self, bytes: &[u8]) -> Result<(), JsValue> {
        self.load_model_impl(bytes).map_err(js)
    }

    /// JSON summary of the constructed code.
    pub fn info(&self) -> String {
        let degrees = self.code.row_degrees();
        serde_json::json!({
            "rows": self.code.num_rows(),
            "cols": self.code.num_cols(),
            "edges": self.code.num_edges(),
            "rate": self.code.rate(),
            "girth": girth(&self.code),
            "row_degree_min": degrees.iter().min(),
            "row_degree_max": degrees.iter().max(),
        })
        .to_string()
    }

    /// Syndrome length M.
    pub fn syndrome_len(&self) -> usize {
        self.code.num_rows()
    }

    /// Syndromes of the eight pixel bitplanes, MSB plane first
    /// (8 * M bytes of 0/1).
    pub fn syndromes(&self, pixels: &[u8]) -> Result<Vec<u8>, JsValue> {
        self.syndromes_impl(pixels).map_err(js)
    }

    /// The chaos ratio D_f of this image under the code: summed ApEn of
    /// the syndromes over summed ApEn of the raw planes. NaN when the
    /// image is completely flat.
    pub fn chaos_ratio(&self, pixels: &[u8]) -> Result<f64, JsValue> {
        self.chaos_ratio_impl(pixels).map_err(js)
    }

    /// Class probabilities for the drawn image (requires a loaded model).
    pub fn classify(&self, pixels: &[u8]) -> Result<Vec<f64>, JsValue> {
        self.classify_impl(pixels).map_err(js)
    }
}

impl DemoCode {
    fn new_impl(rate: &str, irregular: bool, seed: u64) -> Result<DemoCode, String> {
        let rate = CodeRate::parse(rate).ok_or_else(|| format!("unsupported rate {rate}"))?;
        let kind = if irregular {
            CodeKind::Irregular
        } else {
            CodeKind::Regular
        };
        let dist = table_distribution(rate, kind).map_err(|e| e.to_string())?;
        let code =
            peg_construct(N, rate.num_rows(N), &dist, seed).map_err(|e| e.to_string())?;
        Ok(DemoCode { code, model: None })
    }

    fn load_model_impl(&mut self, bytes: &[u8]) -> Result<(), String> {
        let params = read_checkpoint(&mut &bytes[..]).map_err(|e| e.to_string())?;
        if params.input_dim != self.code.num_rows() {
            return Err(format!(
                "checkpoint expects syndromes of length {}, code gives {}",
                params.input_dim,
                self.code.num_rows()
            ));
        }
        self.model = Some(params);
        Ok(())
    }

    fn syndromes_impl(&self, pixels: &[u8]) -> Result<Vec<u8>, String> {
        check_image(pixels)?;
        let sample = self.encoded(pixels)?;
        let mut out = Vec::with_capacity(8 * self.code.num_rows());
        for plane in &sample.sequence {
            out.extend(plane.to_bytes());
        }
        Ok(out)
    }

    fn chaos_ratio_impl(&self, pixels: &[u8]) -> Result<f64, String> {
        check_image(pixels)?;
        let values: Vec<u32> = pixels.iter().map(|&v| v as u32).collect();
        let stack = decompose(&values, 8).map_err(|e| e.to_string())?;
        let raw: Vec<BitSeq> = stack.iter_msb_first().map(|p| p.bits.clone()).collect();
        let coded: Vec<BitSeq> = self.encoded(pixels)?.sequence;
        let df = df_ratio(&raw, &coded, ApEnConfig::default()).map_err(|e| e.to_string())?;
        Ok(df.unwrap_or(f64::NAN))
    }

    fn classify_impl(&self, pixels: &[u8]) -> Result<Vec<f64>, String> {
        check_image(pixels)?;
        let model = self
            .model
            .as_ref()
            .ok_or("no model loaded; call load_model first")?;
        let sample = self.encoded(pixels)?;
        let trace = forward(model, sample.sequence.as_slice()).map_err(|e| e.to_string())?;
        Ok(trace.probabilities)
    }

    fn encoded(&self, pixels: &[u8]) -> Result<EncodedSample, String> {
        let sample = ImageSample {
            pixels: pixels.to_vec(),
            rows: GRID,
            cols: GRID,
            channels: 1,
            label: 0,
        };
        let image = prepare_image(DatasetKind::Mnist, &sample).map_err(|e| e.to_string())?;
        encode_image(&image, &PipelineConfig::default(), Some(&self.code), None)
            .map_err(|e| e.to_string())
    }
}

/// Quantized DCT coefficients of the image at the given quality factor
/// and truncation (8 = off), on the full 32x32 grid (zeros where
/// truncated).
#[wasm_bindgen]
pub fn quantized_coefficients(pixels: &[u8], qf: u32, tau: usize) -> Result<Vec<i32>, JsValue> {
    Ok(coeff_map(pixels, qf, tau).map_err(js)?.grid().to_vec())
}

/// Syndromes of the coefficient sign/magnitude planes under `code`
/// (sign plane first). Only valid for tau = 8, where plane length is N.
#[wasm_bindgen]
pub fn dct_syndromes(code: &DemoCode, pixels: &[u8], qf: u32) -> Result<Vec<u8>, JsValue> {
    dct_syndromes_impl(code, pixels, qf).map_err(js)
}

fn dct_syndromes_impl(code: &DemoCode, pixels: &[u8], qf: u32) -> Result<Vec<u8>, String> {
    let map = coeff_map(pixels, qf, 8)?;
    let stack =
        signed_to_planes(&map.flatten(FlattenOrder::BlockRaster), 8).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(8 * code.code.num_rows());
    for plane in stack.iter_msb_first() {
        out.extend(
            encode_syndrome(&code.code, plane)
                .map_err(|e| e.to_string())?
                .bits
                .to_bytes(),
        );
    }
    Ok(out)
}

/// The image the quantized (and possibly truncated) coefficients still
/// describe: dequantize, inverse DCT, undo the level shift.
#[wasm_bindgen]
pub fn reconstruct_preview(pixels: &[u8], qf: u32, tau: usize) -> Result<Vec<u8>, JsValue> {
    reconstruct_impl(pixels, qf, tau).map_err(js)
}

fn reconstruct_impl(pixels: &[u8], qf: u32, tau: usize) -> Result<Vec<u8>, String> {
    let map = coeff_map(pixels, qf, tau)?;
    let table = scale_quant_table(&QuantTable::base_luminance(), qf).map_err(|e| e.to_string())?;
    let mut out = vec![0u8; N];
    for br in 0..BLOCKS_PER_SIDE {
        for bc in 0..BLOCKS_PER_SIDE {
            let mut coeffs = [0.0f64; 64];
            for r in 0..BLOCK {
                for c in 0..BLOCK {
                    let v = map.grid()[(br * BLOCK + r) * GRID + bc * BLOCK + c];
                    coeffs[r * BLOCK + c] = v as f64 * table.0[r * BLOCK + c] as f64;
                }
            }
            let block = idct2d_block(&coeffs);
            for r in 0..BLOCK {
                for c in 0..BLOCK {
                    out[(br * BLOCK + r) * GRID + bc * BLOCK + c] =
                        (block[r * BLOCK + c] + 128.0).round().clamp(0.0, 255.0) as u8;
                }
            }
        }
    }
    Ok(out)
}

fn coeff_map(pixels: &[u8], qf: u32, tau: usize) -> Result<CoeffMap, String> {
    check_image(pixels)?;
    let table = scale_quant_table(&QuantTable::base_luminance(), qf).map_err(|e| e.to_string())?;
    let channel: Vec<f64> = pixels.iter().map(|&v| v as f64).collect();
    let map = CoeffMap::from_channel(&channel, &table, qf, true).map_err(|e| e.to_string())?;
    if tau == 8 {
        Ok(map)
    } else {
        map.truncate_blocks(tau).map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_image_has_all_zero_syndromes_and_nan_df() {
        let code = DemoCode::new_impl("1/2", false, 1).unwrap();
        let pixels = vec![0u8; N];
        let syndromes = code.syndromes_impl(&pixels).unwrap();
        assert_eq!(syndromes.len(), 8 * 512);
        assert!(syndromes.iter().all(|&b| b == 0));
        assert!(code.chaos_ratio_impl(&pixels).unwrap().is_nan());
    }

    #[test]
    fn quantization_coarsens_with_lower_qf() {
        let pixels: Vec<u8> = (0..N).map(|i| ((i * 7) % 256) as u8).collect();
        let fine = coeff_map(&pixels, 95, 8).unwrap();
        let coarse = coeff_map(&pixels, 5, 8).unwrap();
        let nonzero = |m: &CoeffMap| m.grid().iter().filter(|&&c| c != 0).count();
        assert!(nonzero(&fine) > nonzero(&coarse));
        let preview = reconstruct_impl(&pixels, 95, 8).unwrap();
        assert_eq!(preview.len(), N);
    }

    #[test]
    fn classify_without_model_is_an_error() {
        let code = DemoCode::new_impl("1/2", false, 1).unwrap();
        assert!(code.classify_impl(&vec![0u8; N]).is_err());
    }

    #[test]
    fn bad_pixel_count_is_an_error() {
        assert!(planes_impl(&[0u8; 100]).is_err());
    }
}
