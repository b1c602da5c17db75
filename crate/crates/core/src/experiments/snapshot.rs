//! Binary field snapshots.
//!
//! Layout: `b"CHSL"`, format version (u32 LE), `M` (u32 LE), then the
//! `M x M` coefficients as f64 LE with the x-index outer.

use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::field2d::Field2D;

pub const MAGIC: &[u8; 4] = b"CHSL";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 12;

pub fn encode(field: &Field2D) -> Vec<u8> {
    let m = field.dim();
    let mut out = Vec::with_capacity(HEADER_LEN + m * m * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(m as u32).to_le_bytes());
    let c = field.coeffs();
    for j in 0..m {
        for k in 0..m {
            out.extend_from_slice(&c[(j, k)].to_le_bytes());
        }
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<Field2D> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let version = word(4);
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let m = word(8) as usize;
    let expected = HEADER_LEN + m * m * 8;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(Error::TrailingBytes {
            extra: bytes.len() - expected,
        });
    }
    let payload = &bytes[HEADER_LEN..];
    let coeffs = DMatrix::from_fn(m, m, |j, k| {
        let at = (j * m + k) * 8;
        f64::from_le_bytes(payload[at..at + 8].try_into().unwrap())
    });
    Field2D::from_coeffs(coeffs)
}

pub fn snapshot_write(field: &Field2D, path: &Path) -> Result<()> {
    std::fs::write(path, encode(field))?;
    Ok(())
}

pub fn snapshot_read(path: &Path) -> Result<Field2D> {
    decode(&std::fs::read(path)?)
}
