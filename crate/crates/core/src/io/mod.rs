//! On-disk formats: PGM images, binary dictionary/code files and CSV traces.
//!
//! File writers go through a temporary file in the destination directory
//! and an atomic rename, so a failed write never leaves a partial file.

mod binary;
mod pgm;
mod trace;

pub use binary::{
    decode_codes, decode_dict, encode_codes, encode_dict, read_codes, read_dict, write_codes, write_dict,
    CODES_MAGIC, DICT_MAGIC, FORMAT_VERSION,
};
pub use pgm::{decode_pgm, encode_pgm, read_image, write_image, PGM_WRITE_MAXVAL};
pub use trace::{read_trace, read_trace_file, write_trace, write_trace_file, TRACE_HEADER};

use std::io::Write;
use std::path::Path;

use thiserror::Error;

/// Malformed or unsupported file contents.
#[derive(Debug, Error, PartialEq)]
pub enum FormatError {
    #[error("PGM parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("unsupported PGM maxval {0} (expected 255 or 65535)")]
    UnsupportedMaxval(u32),

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),

    #[error("size mismatch: header declares {expected} bytes, file has {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("non-finite value at payload index {index}")]
    NonFinite { index: usize },

    #[error("malformed header: {0}")]
    Header(String),

    #[error("trace line {line}: {message}")]
    Trace { line: usize, message: String },
}

impl FormatError {
    /// Stable short identifier of the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            FormatError::Parse { .. } => "parse",
            FormatError::UnsupportedMaxval(_) => "unsupported-format",
            FormatError::BadMagic { .. } => "bad-magic",
            FormatError::UnsupportedVersion(_) => "bad-version",
            FormatError::SizeMismatch { .. } => "size-mismatch",
            FormatError::NonFinite { .. } => "non-finite",
            FormatError::Header(_) => "bad-header",
            FormatError::Trace { .. } => "bad-trace",
        }
    }
}

/// Writes `bytes` to `path` via a temporary sibling file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
