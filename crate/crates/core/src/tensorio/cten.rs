//! CTEN v1 tensor files.
//!
//! Layout: 5 magic bytes `43 54 45 4E 01`, one dtype byte (`0x01` real f64,
//! `0x02` complex f64 stored as interleaved re, im), one rank byte (2 or 3),
//! `rank` little-endian u32 dimensions, then the little-endian payload in
//! row-major order (channel-last for rank 3).
//!
//! Real tensors with one channel are written as rank 2; complex images are
//! always rank 2.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use super::{ComplexImage, RealTensor, Tensor};
use crate::error::{Error, Result};

pub const MAGIC: [u8; 5] = [0x43, 0x54, 0x45, 0x4E, 0x01];

const DTYPE_REAL: u8 = 0x01;
const DTYPE_COMPLEX: u8 = 0x02;

/// Serializes a tensor into any writer.
pub fn write_tensor<W: Write>(t: &Tensor, mut w: W) -> Result<()> {
    let (dtype, dims): (u8, Vec<usize>) = match t {
        Tensor::Real(r) if r.channels() == 1 => (DTYPE_REAL, vec![r.rows(), r.cols()]),
        Tensor::Real(r) => (DTYPE_REAL, vec![r.rows(), r.cols(), r.channels()]),
        Tensor::Complex(c) => (DTYPE_COMPLEX, vec![c.rows(), c.cols()]),
    };
    w.write_all(&MAGIC)?;
    w.write_all(&[dtype, dims.len() as u8])?;
    for d in dims {
        let d = u32::try_from(d).map_err(|_| Error::invalid("dimension exceeds u32"))?;
        w.write_all(&d.to_le_bytes())?;
    }
    match t {
        Tensor::Real(r) => {
            for v in r.data() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Tensor::Complex(c) => {
            for z in c.data() {
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Parses a complete CTEN byte buffer.
pub fn read_tensor(bytes: &[u8]) -> Result<Tensor> {
    let header_min = MAGIC.len() + 2;
    if bytes.len() < MAGIC.len() || bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < header_min {
        return Err(Error::Truncated {
            expected: header_min,
            found: bytes.len(),
        });
    }
    let dtype = bytes[5];
    let rank = bytes[6];
    if dtype != DTYPE_REAL && dtype != DTYPE_COMPLEX {
        return Err(Error::UnsupportedDtype(dtype));
    }
    if rank != 2 && rank != 3 {
        return Err(Error::UnsupportedRank(rank));
    }
    if dtype == DTYPE_COMPLEX && rank != 2 {
        return Err(Error::UnsupportedRank(rank));
    }
    let header_len = header_min + 4 * rank as usize;
    if bytes.len() < header_len {
        return Err(Error::Truncated {
            expected: header_len,
            found: bytes.len(),
        });
    }
    let dims: Vec<usize> = bytes[header_min..header_len]
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]) as usize)
        .collect();
    let count = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::invalid("dimensions overflow"))?;
    let sample_bytes = if dtype == DTYPE_COMPLEX { 16 } else { 8 };
    let expected = count
        .checked_mul(sample_bytes)
        .and_then(|p| p.checked_add(header_len))
        .ok_or_else(|| Error::invalid("dimensions overflow"))?;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Error::TrailingData(bytes.len() - expected));
    }
    let payload = &bytes[header_len..];
    let f64s = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
    if dtype == DTYPE_REAL {
        let channels = if rank == 3 { dims[2] } else { 1 };
        Ok(Tensor::Real(RealTensor::new(
            dims[0],
            dims[1],
            channels,
            f64s.collect(),
        )?))
    } else {
        let flat: Vec<f64> = f64s.collect();
        let data = flat
            .chunks_exact(2)
            .map(|p| Complex64::new(p[0], p[1]))
            .collect();
        Ok(Tensor::Complex(ComplexImage::new(dims[0], dims[1], data)?))
    }
}

pub fn save_tensor(t: &Tensor, path: impl AsRef<Path>) -> Result<()> {
    let file = fs::File::create(path)?;
    write_tensor(t, BufWriter::new(file))
}

pub fn load_tensor(path: impl AsRef<Path>) -> Result<Tensor> {
    let bytes = fs::read(path)?;
    read_tensor(&bytes)
}
