//! Binary tensor container for encoded datasets and exported features.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic   8 bytes  "SYNTNSR1"
//! version u32      currently 1
//! hash    32 bytes manifest hash (sha256; zero when standalone)
//! records tensor records until end of file
//! ```
//!
//! Each record: `u8` dtype tag (0 = u8, 1 = i32, 2 = f32, 3 = f64),
//! `u64` rank, `u64` dims[rank], then the row-major payload.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use thiserror::Error;

const MAGIC: &[u8; 8] = b"SYNTNSR1";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("container format error: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TensorData {
    U8(Vec<u8>),
    I32(Vec<i32>),
    F32(Vec<f32>),
    F64(Vec<f64>),
}

impl TensorData {
    fn dtype_tag(&self) -> u8 {
        match self {
            TensorData::U8(_) => 0,
            TensorData::I32(_) => 1,
            TensorData::F32(_) => 2,
            TensorData::F64(_) => 3,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            TensorData::U8(v) => v.len(),
            TensorData::I32(v) => v.len(),
            TensorData::F32(v) => v.len(),
            TensorData::F64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub dims: Vec<u64>,
    pub data: TensorData,
}

impl Tensor {
    pub fn new(dims: Vec<u64>, data: TensorData) -> Result<Self, TensorError> {
        let expected: u64 = dims.iter().product();
        if expected != data.len() as u64 {
            return Err(TensorError::Format(format!(
                "dims {dims:?} imply {expected} elements, payload has {}",
                data.len()
            )));
        }
        Ok(Tensor { dims, data })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorFile {
    pub manifest_hash: [u8; 32],
    pub tensors: Vec<Tensor>,
}

pub fn write_tensor_file(path: &Path, file: &TensorFile) -> Result<(), TensorError> {
    let mut out = BufWriter::new(File::create(path)?);
    write_tensors(&mut out, file)?;
    out.flush()?;
    Ok(())
}

pub fn write_tensors(out: &mut impl Write, file: &TensorFile) -> Result<(), TensorError> {
    out.write_all(MAGIC)?;
    out.write_u32::<LittleEndian>(VERSION)?;
    out.write_all(&file.manifest_hash)?;
    for tensor in &file.tensors {
        out.write_u8(tensor.data.dtype_tag())?;
        out.write_u64::<LittleEndian>(tensor.dims.len() as u64)?;
        for &d in &tensor.dims {
            out.write_u64::<LittleEndian>(d)?;
        }
        match &tensor.data {
            TensorData::U8(v) => out.write_all(v)?,
            TensorData::I32(v) => {
                for &x in v {
                    out.write_i32::<LittleEndian>(x)?;
                }
            }
            TensorData::F32(v) => {
                for &x in v {
                    out.write_f32::<LittleEndian>(x)?;
                }
            }
            TensorData::F64(v) => {
                for &x in v {
                    out.write_f64::<LittleEndian>(x)?;
                }
            }
        }
    }
    Ok(())
}

pub fn read_tensor_file(path: &Path) -> Result<TensorFile, TensorError> {
    read_tensors(&mut BufReader::new(File::open(path)?))
}

pub fn read_tensors(input: &mut impl Read) -> Result<TensorFile, TensorError> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(TensorError::Format(format!(
            "bad magic {:?}",
            String::from_utf8_lossy(&magic)
        )));
    }
    let version = input.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(TensorError::Format(format!("unsupported version {version}")));
    }
    let mut manifest_hash = [0u8; 32];
    input.read_exact(&mut manifest_hash)?;

    let mut tensors = Vec::new();
    loop {
        let mut tag = [0u8; 1];
        match input.read(&mut tag)? {
            0 => break,
            _ => {}
        }
        let rank = input.read_u64::<LittleEndian>()? as usize;
        if rank > 8 {
            return Err(TensorError::Format(format!("implausible rank {rank}")));
        }
        let mut dims = Vec::with_capacity(rank);
        for _ in 0..rank {
            dims.push(input.read_u64::<LittleEndian>()?);
        }
        let count = dims.iter().product::<u64>() as usize;
        let data = match tag[0] {
            0 => {
                let mut v = vec![0u8; count];
                input.read_exact(&mut v)?;
                TensorData::U8(v)
            }
            1 => {
                let mut v = vec![0i32; count];
                input.read_i32_into::<LittleEndian>(&mut v)?;
                TensorData::I32(v)
            }
            2 => {
                let mut v = vec![0f32; count];
                input.read_f32_into::<LittleEndian>(&mut v)?;
                TensorData::F32(v)
            }
            3 => {
                let mut v = vec![0f64; count];
                input.read_f64_into::<LittleEndian>(&mut v)?;
                TensorData::F64(v)
            }
            t => return Err(TensorError::Format(format!("unknown dtype tag {t}"))),
        };
        tensors.push(Tensor { dims, data });
    }
    Ok(TensorFile {
        manifest_hash,
        tensors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_mixed_records() {
        let file = TensorFile {
            manifest_hash: [7u8; 32],
            tensors: vec![
                Tensor::new(vec![2, 3], TensorData::U8(vec![1, 0, 1, 1, 0, 0])).unwrap(),
                Tensor::new(vec![4], TensorData::I32(vec![-5, 0, 300, 2])).unwrap(),
                Tensor::new(vec![2, 1], TensorData::F64(vec![0.5, -1.25])).unwrap(),
            ],
        };
        let mut buf = Vec::new();
        write_tensors(&mut buf, &file).unwrap();
        let back = read_tensors(&mut buf.as_slice()).unwrap();
        assert_eq!(back, file);
    }

    #[test]
    fn dim_mismatch_is_rejected() {
        assert!(Tensor::new(vec![2, 3], TensorData::U8(vec![1, 2, 3])).is_err());
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let file = TensorFile {
            manifest_hash: [0u8; 32],
            tensors: vec![Tensor::new(vec![8], TensorData::F64(vec![1.0; 8])).unwrap()],
        };
        let mut buf = Vec::new();
        write_tensors(&mut buf, &file).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read_tensors(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn bad_magic_is_rejected() {
        let err = read_tensors(&mut b"WRONGMAG".as_slice()).unwrap_err();
        assert!(matches!(err, TensorError::Format(_)));
    }
}
