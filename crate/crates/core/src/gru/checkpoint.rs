//! Checkpoint container: magic `SYNGRU01`, then little-endian u32
//! dimensions (J, M, C), then the eight parameter fields as f64
//! little-endian in declaration order (three transposed input matrices,
//! three recurrent matrices, head kernel, head bias). Row-major within
//! each matrix.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{GruError, GruParams, Scalar};

const MAGIC: &[u8; 8] = b"SYNGRU01";

pub fn save_checkpoint<F: Scalar>(params: &GruParams<F>, path: &Path) -> Result<(), GruError> {
    let mut out = BufWriter::new(File::create(path)?);
    write_checkpoint(params, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn write_checkpoint<F: Scalar>(
    params: &GruParams<F>,
    out: &mut impl Write,
) -> Result<(), GruError> {
    out.write_all(MAGIC)?;
    out.write_u32::<LittleEndian>(params.units as u32)?;
    out.write_u32::<LittleEndian>(params.input_dim as u32)?;
    out.write_u32::<LittleEndian>(params.classes as u32)?;
    for field in params.fields() {
        for &v in field {
            out.write_f64::<LittleEndian>(v.as_f64())?;
        }
    }
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<GruParams<f64>, GruError> {
    read_checkpoint(&mut BufReader::new(File::open(path)?))
}

pub fn read_checkpoint(input: &mut impl Read) -> Result<GruParams<f64>, GruError> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(GruError::CheckpointFormat(format!(
            "bad magic {:?}",
            String::from_utf8_lossy(&magic)
        )));
    }
    let units = input.read_u32::<LittleEndian>()? as usize;
    let input_dim = input.read_u32::<LittleEndian>()? as usize;
    let classes = input.read_u32::<LittleEndian>()? as usize;
    let mut params = GruParams::<f64>::zeros(units, input_dim, classes);
    for field in params.fields_mut() {
        for v in field.iter_mut() {
            *v = input.read_f64::<LittleEndian>()?;
        }
    }
    let mut trailer = [0u8; 1];
    if input.read(&mut trailer)? != 0 {
        return Err(GruError::CheckpointFormat(
            "trailing bytes after parameters".into(),
        ));
    }
    Ok(params)
}
