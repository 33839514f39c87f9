//! The BSPD1 binary format.
//!
//! Matrix: `b"BSPD"`, version byte `0x01`, `u64` n, `u64` b, then the
//! `N(N+1)/2` stored blocks in triangular order, each `b·b` row-major `f64`.
//! Vector: `u64` n followed by n `f64`. Everything little-endian.

use std::fs;
use std::path::Path;

use crate::error::{FormatError, Result, SolverError};
use crate::matrix::{BlockVector, BlockedSPDMatrix};

pub const MAGIC: &[u8; 4] = b"BSPD";
pub const VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 8 + 8;

fn io_err(path: &Path, source: std::io::Error) -> SolverError {
    SolverError::Io { path: path.to_path_buf(), source }
}

fn read_u64(bytes: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

fn read_f64s(bytes: &[u8]) -> Vec<f64> {
    bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect()
}

fn check_len(actual: usize, expected: u64) -> Result<(), FormatError> {
    let actual = actual as u64;
    if actual < expected {
        Err(FormatError::TruncatedFile { expected, actual })
    } else if actual > expected {
        Err(FormatError::TrailingBytes { extra: actual - expected })
    } else {
        Ok(())
    }
}

pub fn encode_matrix(m: &BlockedSPDMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + m.raw().len() * 8);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(m.n() as u64).to_le_bytes());
    out.extend_from_slice(&(m.block_size() as u64).to_le_bytes());
    for v in m.raw() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_matrix(bytes: &[u8]) -> Result<BlockedSPDMatrix> {
    if bytes.len() < MAGIC.len() || &bytes[..4] != MAGIC {
        if bytes.len() < MAGIC.len() && MAGIC.starts_with(bytes) {
            return Err(FormatError::TruncatedFile { expected: HEADER_LEN as u64, actual: bytes.len() as u64 }.into());
        }
        return Err(FormatError::BadMagic { found: bytes[..bytes.len().min(4)].to_vec() }.into());
    }
    if bytes.len() < HEADER_LEN {
        return Err(FormatError::TruncatedFile { expected: HEADER_LEN as u64, actual: bytes.len() as u64 }.into());
    }
    if bytes[4] != VERSION {
        return Err(FormatError::VersionMismatch { found: bytes[4] }.into());
    }
    let n = read_u64(bytes, 5);
    let b = read_u64(bytes, 13);
    if n == 0 || b == 0 {
        return Err(FormatError::InvalidHeader(format!("n = {n}, b = {b}; both must be positive")).into());
    }
    let values = (|| {
        let nb = usize::try_from(n).ok()?.checked_add(usize::try_from(b).ok()? - 1)? / b as usize;
        let blocks = nb.checked_mul(nb + 1)? / 2;
        (blocks as u64).checked_mul(b.checked_mul(b)?)?.checked_mul(8)
    })()
    .ok_or_else(|| FormatError::InvalidHeader(format!("n = {n}, b = {b} overflows the block count")))?;
    let expected = values
        .checked_add(HEADER_LEN as u64)
        .ok_or_else(|| FormatError::InvalidHeader("size overflow".into()))?;
    check_len(bytes.len(), expected)?;
    let (n, b) = (n as usize, b as usize);
    BlockedSPDMatrix::from_raw_blocks(n, b, read_f64s(&bytes[HEADER_LEN..]))
}

pub fn save_matrix(path: impl AsRef<Path>, m: &BlockedSPDMatrix) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_matrix(m)).map_err(|e| io_err(path, e))
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<BlockedSPDMatrix> {
    let path = path.as_ref();
    decode_matrix(&fs::read(path).map_err(|e| io_err(path, e))?)
}

pub fn encode_vector(v: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + v.len() * 8);
    out.extend_from_slice(&(v.len() as u64).to_le_bytes());
    for x in v {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub fn decode_vector(bytes: &[u8]) -> Result<Vec<f64>> {
    if bytes.len() < 8 {
        return Err(FormatError::TruncatedFile { expected: 8, actual: bytes.len() as u64 }.into());
    }
    let n = read_u64(bytes, 0);
    let expected = n
        .checked_mul(8)
        .and_then(|v| v.checked_add(8))
        .ok_or_else(|| FormatError::InvalidHeader(format!("vector length {n} overflows")))?;
    check_len(bytes.len(), expected)?;
    Ok(read_f64s(&bytes[8..]))
}

pub fn save_vector(path: impl AsRef<Path>, v: &[f64]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_vector(v)).map_err(|e| io_err(path, e))
}

pub fn load_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    decode_vector(&fs::read(path).map_err(|e| io_err(path, e))?)
}

/// Loads a vector and blocks it with block size `b`.
pub fn load_block_vector(path: impl AsRef<Path>, b: usize) -> Result<BlockVector> {
    BlockVector::from_slice(&load_vector(path)?, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> BlockedSPDMatrix {
        BlockedSPDMatrix::from_lower_fn(7, 3, |p, q| 1.0 / (1.0 + p as f64 + q as f64)).unwrap()
    }

    fn format_err(r: Result<BlockedSPDMatrix>) -> FormatError {
        match r {
            Err(SolverError::Format(e)) => e,
            other => panic!("expected a format error, got {other:?}"),
        }
    }

    #[test]
    fn header_layout() {
        let bytes = encode_matrix(&sample());
        assert_eq!(&bytes[..5], b"BSPD\x01");
        assert_eq!(read_u64(&bytes, 5), 7);
        assert_eq!(read_u64(&bytes, 13), 3);
        assert_eq!(bytes.len(), HEADER_LEN + 6 * 9 * 8);
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let m = sample();
        let back = decode_matrix(&encode_matrix(&m)).unwrap();
        assert_eq!(back.n(), 7);
        assert!(back.raw().iter().zip(m.raw()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn distinct_errors() {
        let good = encode_matrix(&sample());
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(format_err(decode_matrix(&bad)), FormatError::BadMagic { .. }));
        let mut bad = good.clone();
        bad[4] = 2;
        assert_eq!(format_err(decode_matrix(&bad)), FormatError::VersionMismatch { found: 2 });
        let cut = &good[..good.len() - 5];
        assert_eq!(
            format_err(decode_matrix(cut)),
            FormatError::TruncatedFile { expected: good.len() as u64, actual: cut.len() as u64 }
        );
        let mut long = good.clone();
        long.push(0);
        assert_eq!(format_err(decode_matrix(&long)), FormatError::TrailingBytes { extra: 1 });
        assert!(matches!(format_err(decode_matrix(b"BS")), FormatError::TruncatedFile { .. }));
        let mut zero = good[..HEADER_LEN].to_vec();
        zero[13..21].copy_from_slice(&0u64.to_le_bytes());
        assert!(matches!(format_err(decode_matrix(&zero)), FormatError::InvalidHeader(_)));
        let mut huge = good[..HEADER_LEN].to_vec();
        huge[5..13].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(matches!(format_err(decode_matrix(&huge)), FormatError::InvalidHeader(_)));
    }

    #[test]
    fn vector_round_trip() {
        let v = vec![1.5, -0.0, f64::MIN_POSITIVE, 3.0];
        let bytes = encode_vector(&v);
        assert_eq!(bytes.len(), 8 + 32);
        let back = decode_vector(&bytes).unwrap();
        assert!(back.iter().zip(&v).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert!(decode_vector(&bytes[..20]).is_err());
    }
}
