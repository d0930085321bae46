//! Little-endian binary containers for filter banks and coefficient maps.
//!
//! Layout (both kinds): 4-byte magic, `u32` version, three `u32` dimensions,
//! then the `f64` payload row-major, all little-endian.
//!
//! * dictionary `CDIC`: dimensions `m_count, r_h, r_w` (square filters only)
//! * codes `CMAP`: dimensions `m_count, height, width`

use std::path::Path;

use ndarray::Array3;

use super::{write_atomic, FormatError};
use crate::error::Result;
use crate::types::{CoefficientMaps, FilterBank};

pub const DICT_MAGIC: &[u8; 4] = b"CDIC";
pub const CODES_MAGIC: &[u8; 4] = b"CMAP";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 20;

fn encode(magic: &[u8; 4], dims: [usize; 3], payload: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * payload.len());
    out.extend_from_slice(magic);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    for d in dims {
        let d = u32::try_from(d).expect("dimension fits in u32");
        out.extend_from_slice(&d.to_le_bytes());
    }
    for v in payload {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

fn decode(magic: &[u8; 4], bytes: &[u8]) -> Result<Array3<f64>, FormatError> {
    if bytes.len() < 4 || &bytes[..4] != magic {
        return Err(FormatError::BadMagic {
            expected: String::from_utf8_lossy(magic).into_owned(),
            found: String::from_utf8_lossy(&bytes[..bytes.len().min(4)]).into_owned(),
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(FormatError::SizeMismatch { expected: HEADER_LEN, actual: bytes.len() });
    }
    let version = u32_at(bytes, 4);
    if version != FORMAT_VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let dims = [u32_at(bytes, 8) as usize, u32_at(bytes, 12) as usize, u32_at(bytes, 16) as usize];
    if dims.contains(&0) {
        return Err(FormatError::Header(format!("zero dimension in {dims:?}")));
    }
    let expected = dims
        .iter()
        .try_fold(8usize, |acc, d| acc.checked_mul(*d))
        .and_then(|p| p.checked_add(HEADER_LEN))
        .ok_or_else(|| FormatError::Header("declared size overflows".into()))?;
    if bytes.len() != expected {
        return Err(FormatError::SizeMismatch { expected, actual: bytes.len() });
    }
    let mut values = Vec::with_capacity((expected - HEADER_LEN) / 8);
    for (index, chunk) in bytes[HEADER_LEN..].chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().expect("8 bytes"));
        if !v.is_finite() {
            return Err(FormatError::NonFinite { index });
        }
        values.push(v);
    }
    Ok(Array3::from_shape_vec((dims[0], dims[1], dims[2]), values).expect("shape"))
}

pub fn encode_dict(bank: &FilterBank) -> Vec<u8> {
    let r = bank.filter_size();
    encode(DICT_MAGIC, [bank.m_count(), r, r], bank.as_slice())
}

pub fn decode_dict(bytes: &[u8]) -> Result<FilterBank, FormatError> {
    let filters = decode(DICT_MAGIC, bytes)?;
    let (_, rh, rw) = filters.dim();
    if rh != rw {
        return Err(FormatError::Header(format!("filters must be square, got {rh}x{rw}")));
    }
    Ok(FilterBank::new(filters).expect("validated dictionary payload"))
}

pub fn encode_codes(codes: &CoefficientMaps) -> Vec<u8> {
    let (h, w) = codes.map_shape();
    encode(CODES_MAGIC, [codes.m_count(), h, w], codes.as_slice())
}

pub fn decode_codes(bytes: &[u8]) -> Result<CoefficientMaps, FormatError> {
    Ok(CoefficientMaps::new(decode(CODES_MAGIC, bytes)?).expect("validated code payload"))
}

pub fn read_dict(path: impl AsRef<Path>) -> Result<FilterBank> {
    Ok(decode_dict(&std::fs::read(path)?)?)
}

pub fn write_dict(bank: &FilterBank, path: impl AsRef<Path>) -> Result<()> {
    Ok(write_atomic(path.as_ref(), &encode_dict(bank))?)
}

pub fn read_codes(path: impl AsRef<Path>) -> Result<CoefficientMaps> {
    Ok(decode_codes(&std::fs::read(path)?)?)
}

pub fn write_codes(codes: &CoefficientMaps, path: impl AsRef<Path>) -> Result<()> {
    Ok(write_atomic(path.as_ref(), &encode_codes(codes))?)
}
