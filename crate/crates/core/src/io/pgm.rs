use std::path::Path;

use super::{write_atomic, FormatError};
use crate::error::Result;
use crate::types::Image;

/// Maxval used when writing (16-bit binary P5).
pub const PGM_WRITE_MAXVAL: u32 = 65535;

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: impl Into<String>) -> FormatError {
        FormatError::Parse { offset: self.pos, message: message.into() }
    }

    /// Skips whitespace and `#` comments.
    fn skip_space(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32, FormatError> {
        self.skip_space();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(if self.pos >= self.bytes.len() {
                self.err(format!("unexpected end of file while reading {what}"))
            } else {
                self.err(format!("expected {what}"))
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| FormatError::Parse { offset: start, message: format!("{what} out of range") })
    }
}

/// Parses a P2 (ASCII) or P5 (binary) PGM with maxval 255 or 65535 into
/// values `v / maxval`.
pub fn decode_pgm(bytes: &[u8]) -> Result<Image, FormatError> {
    let mut cur = Cursor { bytes, pos: 0 };
    let binary = match bytes.get(..2) {
        Some(b"P5") => true,
        Some(b"P2") => false,
        _ => return Err(cur.err("missing P2/P5 magic")),
    };
    cur.pos = 2;
    if !bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(cur.err("expected whitespace after magic"));
    }
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval_at = cur.pos;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(FormatError::Parse { offset: maxval_at, message: "zero image dimension".into() });
    }
    if maxval != 255 && maxval != 65535 {
        return Err(FormatError::UnsupportedMaxval(maxval));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| cur.err("image dimensions overflow"))?;
    let scale = maxval as f64;
    let mut values = Vec::with_capacity(count.min(1 << 28));

    if binary {
        if !bytes.get(cur.pos).is_some_and(|b| b.is_ascii_whitespace()) {
            return Err(cur.err("expected single whitespace before raster"));
        }
        cur.pos += 1;
        let bpp = if maxval == 255 { 1 } else { 2 };
        let raster = &bytes[cur.pos..];
        let need = count * bpp;
        if raster.len() < need {
            return Err(FormatError::Parse {
                offset: bytes.len(),
                message: format!("truncated raster: need {need} bytes, found {}", raster.len()),
            });
        }
        for (k, px) in raster[..need].chunks_exact(bpp).enumerate() {
            let v = if bpp == 1 { px[0] as u32 } else { u16::from_be_bytes([px[0], px[1]]) as u32 };
            if v > maxval {
                return Err(FormatError::Parse { offset: cur.pos + k * bpp, message: format!("sample {v} exceeds maxval") });
            }
            values.push(v as f64 / scale);
        }
    } else {
        for _ in 0..count {
            let at = cur.pos;
            let v = cur.number("sample")?;
            if v > maxval {
                return Err(FormatError::Parse { offset: at, message: format!("sample {v} exceeds maxval") });
            }
            values.push(v as f64 / scale);
        }
    }
    Ok(Image::from_vec(height, width, values).expect("finite samples"))
}

/// Encodes as 16-bit P5, rounding half away from zero and clamping to `[0, 1]`.
pub fn encode_pgm(img: &Image) -> Vec<u8> {
    let (h, w) = img.shape();
    let mut out = format!("P5\n{w} {h}\n{PGM_WRITE_MAXVAL}\n").into_bytes();
    out.reserve(2 * h * w);
    let scale = PGM_WRITE_MAXVAL as f64;
    for &v in img.as_slice() {
        let q = (v * scale).round().clamp(0.0, scale) as u16;
        out.extend_from_slice(&q.to_be_bytes());
    }
    out
}

pub fn read_image(path: impl AsRef<Path>) -> Result<Image> {
    let bytes = std::fs::read(path)?;
    Ok(decode_pgm(&bytes)?)
}

pub fn write_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    Ok(write_atomic(path.as_ref(), &encode_pgm(img))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p5_8bit_all_white() {
        let mut bytes = b"P5\n3 2\n255\n".to_vec();
        bytes.extend([255u8; 6]);
        let img = decode_pgm(&bytes).unwrap();
        assert_eq!(img.shape(), (2, 3));
        assert!(img.as_slice().iter().all(|v| *v == 1.0));
    }

    #[test]
    fn p2_with_comments() {
        let img = decode_pgm(b"P2 # comment\n2 2\n# another\n255\n0 255\n51 102\n").unwrap();
        assert_eq!(img.as_slice(), &[0.0, 1.0, 0.2, 0.4]);
    }

    #[test]
    fn sixteen_bit_big_endian() {
        let mut bytes = b"P5 1 1 65535\n".to_vec();
        bytes.extend([0x80, 0x00]);
        let img = decode_pgm(&bytes).unwrap();
        assert_eq!(img.as_slice(), &[32768.0 / 65535.0]);
    }

    #[test]
    fn truncated_and_malformed() {
        let mut bytes = b"P5\n4 4\n255\n".to_vec();
        bytes.extend([0u8; 10]);
        match decode_pgm(&bytes) {
            Err(FormatError::Parse { offset, .. }) => assert_eq!(offset, bytes.len()),
            other => panic!("{other:?}"),
        }
        assert!(matches!(decode_pgm(b"P6\n1 1\n255\n\0"), Err(FormatError::Parse { offset: 0, .. })));
        assert!(matches!(decode_pgm(b"P5\n1 x\n255\n\0"), Err(FormatError::Parse { offset: 5, .. })));
        assert!(matches!(decode_pgm(b"P2\n2 1\n255\n1"), Err(FormatError::Parse { .. })));
        assert!(matches!(decode_pgm(b"P2\n1 1\n255\n300"), Err(FormatError::Parse { .. })));
        assert_eq!(decode_pgm(b"P5\n1 1\n1023\n\0\0"), Err(FormatError::UnsupportedMaxval(1023)));
    }

    #[test]
    fn encode_quantizes_and_clamps() {
        let img = Image::from_vec(1, 3, vec![-0.5, 0.5, 2.0]).unwrap();
        let back = decode_pgm(&encode_pgm(&img)).unwrap();
        assert_eq!(back.as_slice()[0], 0.0);
        assert_eq!(back.as_slice()[1], 32768.0 / 65535.0);
        assert_eq!(back.as_slice()[2], 1.0);
    }
}
