//! On-disk coefficient tables.
//!
//! Layout: `b"TWM1"`, little-endian `u32` weight, little-endian `u64` n_max,
//! then n_max little-endian `f64` values λ(1), ..., λ(n_max).

use super::{expand_delta_coefficients, EigenformCoefficients};
use crate::error::{Error, Result};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub const MAGIC: &[u8; 4] = b"TWM1";
const HEADER_LEN: usize = 16;

pub fn file_name(weight: u32, n_max: usize) -> String {
    format!("twm_w{weight}_n{n_max}.bin")
}

pub fn encode(coeffs: &EigenformCoefficients) -> Vec<u8> {
    let n_max = coeffs.n_max();
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * n_max);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&coeffs.weight().to_le_bytes());
    buf.extend_from_slice(&(n_max as u64).to_le_bytes());
    for &x in &coeffs.table()[1..] {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    buf
}

pub fn decode(bytes: &[u8]) -> Result<EigenformCoefficients> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::CacheCorrupt(format!("file too short ({} bytes)", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::CacheCorrupt("bad magic".into()));
    }
    let weight = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let n_max = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let expected = n_max.checked_mul(8).and_then(|b| b.checked_add(HEADER_LEN));
    if expected != Some(bytes.len()) {
        return Err(Error::CacheCorrupt(format!("header declares n_max={n_max} but payload has {} bytes", bytes.len() - HEADER_LEN)));
    }
    let mut lambda = Vec::with_capacity(n_max + 1);
    lambda.push(0.0);
    lambda.extend(bytes[HEADER_LEN..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())));
    EigenformCoefficients::from_table(weight, lambda).map_err(|e| Error::CacheCorrupt(e.to_string()))
}

pub fn save(path: &Path, coeffs: &EigenformCoefficients) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        w.write_all(&encode(coeffs))?;
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<EigenformCoefficients> {
    decode(&fs::read(path)?)
}

/// Smallest cached table in `dir` with the given weight and `n_max >= n_needed`.
pub fn find(dir: &Path, weight: u32, n_needed: usize) -> Result<Option<PathBuf>> {
    if !dir.is_dir() {
        return Ok(None);
    }
    let prefix = format!("twm_w{weight}_n");
    let mut best: Option<(usize, PathBuf)> = None;
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|s| s.to_str()) else { continue };
        let Some(n) = name.strip_prefix(&prefix).and_then(|s| s.strip_suffix(".bin")).and_then(|s| s.parse().ok())
        else {
            continue;
        };
        if n >= n_needed && best.as_ref().is_none_or(|(b, _)| n < *b) {
            best = Some((n, path));
        }
    }
    Ok(best.map(|(_, p)| p))
}

/// Loads Δ's coefficients up to `n_max` from `dir`, expanding and caching
/// them if no sufficiently long table is present.
pub fn load_or_expand_delta(dir: &Path, n_max: usize) -> Result<EigenformCoefficients> {
    if let Some(path) = find(dir, 12, n_max)? {
        let coeffs = load(&path)?;
        if coeffs.weight() != 12 || coeffs.n_max() < n_max {
            return Err(Error::CacheCorrupt(format!("{} does not match its file name", path.display())));
        }
        return coeffs.truncated(n_max);
    }
    let coeffs = expand_delta_coefficients(n_max)?;
    fs::create_dir_all(dir)?;
    save(&dir.join(file_name(12, n_max)), &coeffs)?;
    Ok(coeffs)
}
