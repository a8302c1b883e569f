//! On-disk spectrum cache.
//!
//! Binary container: magic, format version, library version, the content
//! hash of (params, basis, options), array lengths, then raw little-endian
//! payload, closed by a SHA-256 digest of everything before it. Any
//! mismatch — magic, version, hash, truncation, digest — invalidates the
//! file and the caller recomputes; a corrupt cache can cost time, never
//! correctness.

use super::hamiltonian::BasisTag;
use super::spectrum::{Parity, Spectrum};
use super::QuantumError;
use crate::model::DickeParams;
use ndarray::Array2;
use sha2::{Digest, Sha256};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

const MAGIC: &[u8; 8] = b"DKSPEC03";

/// File a given key lives in.
pub fn cache_path(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("spectrum-{key}.bin"))
}

/// Store a spectrum under `dir`, keyed by its `params_hash`.
pub fn store(dir: &Path, spectrum: &Spectrum) -> Result<PathBuf, QuantumError> {
    std::fs::create_dir_all(dir)?;
    let path = cache_path(dir, &spectrum.params_hash);
    let tmp = path.with_extension("tmp");

    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(MAGIC);
    write_str(&mut buf, crate::VERSION);
    write_str(&mut buf, &spectrum.params_hash);
    for v in [
        spectrum.params.omega(),
        spectrum.params.omega0(),
        spectrum.params.gamma(),
        spectrum.params.j(),
        spectrum.j,
    ] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf.push(match spectrum.basis {
        BasisTag::Ecb => 0,
        BasisTag::Fock => 1,
    });
    for v in [
        spectrum.n_max as u64,
        spectrum.dim as u64,
        spectrum.n_stored() as u64,
        spectrum.converged_count as u64,
    ] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for e in &spectrum.energies {
        buf.extend_from_slice(&e.to_le_bytes());
    }
    for t in &spectrum.tail_weight {
        buf.extend_from_slice(&t.to_le_bytes());
    }
    for p in &spectrum.parity {
        buf.push(match p {
            Parity::Plus => 0,
            Parity::Minus => 1,
            Parity::Unresolved => 2,
        });
    }
    let slice = spectrum
        .vectors
        .as_slice()
        .expect("spectrum vectors are contiguous");
    // Raw f64 dump; row k is eigenvector k.
    let bytes =
        unsafe { std::slice::from_raw_parts(slice.as_ptr() as *const u8, slice.len() * 8) };
    buf.extend_from_slice(bytes);

    let digest = Sha256::digest(&buf);
    let mut f = std::fs::File::create(&tmp)?;
    f.write_all(&buf)?;
    f.write_all(&digest)?;
    f.sync_all()?;
    std::fs::rename(&tmp, &path)?;
    Ok(path)
}

/// Load a spectrum if a valid cache entry exists for `key`.
pub fn load(dir: &Path, key: &str, params: &DickeParams) -> Result<Spectrum, QuantumError> {
    let path = cache_path(dir, key);
    let mut raw = Vec::new();
    std::fs::File::open(&path)?.read_to_end(&mut raw)?;
    if raw.len() < 32 + MAGIC.len() {
        return Err(QuantumError::Cache("file truncated".into()));
    }
    let (body, digest) = raw.split_at(raw.len() - 32);
    if Sha256::digest(body).as_slice() != digest {
        return Err(QuantumError::Cache("checksum mismatch".into()));
    }

    let mut cur = body;
    let magic = take(&mut cur, 8)?;
    if magic != MAGIC {
        return Err(QuantumError::Cache("bad magic".into()));
    }
    let version = read_str(&mut cur)?;
    if version != crate::VERSION {
        return Err(QuantumError::Cache(format!(
            "version mismatch: file {version}, library {}",
            crate::VERSION
        )));
    }
    let stored_key = read_str(&mut cur)?;
    if stored_key != key {
        return Err(QuantumError::Cache("content hash mismatch".into()));
    }

    let mut f64s = [0.0; 5];
    for v in &mut f64s {
        *v = f64::from_le_bytes(take(&mut cur, 8)?.try_into().unwrap());
    }
    let [omega, omega0, gamma, pj, j] = f64s;
    let stored_params = DickeParams::new(omega, omega0, gamma, pj)
        .map_err(|e| QuantumError::Cache(format!("stored params invalid: {e}")))?;
    if stored_params != *params {
        return Err(QuantumError::Cache("parameter mismatch".into()));
    }
    let basis = match take(&mut cur, 1)?[0] {
        0 => BasisTag::Ecb,
        1 => BasisTag::Fock,
        other => return Err(QuantumError::Cache(format!("bad basis tag {other}"))),
    };
    let mut u64s = [0u64; 4];
    for v in &mut u64s {
        *v = u64::from_le_bytes(take(&mut cur, 8)?.try_into().unwrap());
    }
    let [n_max, dim, n_stored, converged_count] = u64s.map(|v| v as usize);

    let mut energies = vec![0.0; n_stored];
    for e in &mut energies {
        *e = f64::from_le_bytes(take(&mut cur, 8)?.try_into().unwrap());
    }
    let mut tail_weight = vec![0.0; n_stored];
    for t in &mut tail_weight {
        *t = f64::from_le_bytes(take(&mut cur, 8)?.try_into().unwrap());
    }
    let mut parity = Vec::with_capacity(n_stored);
    for _ in 0..n_stored {
        parity.push(match take(&mut cur, 1)?[0] {
            0 => Parity::Plus,
            1 => Parity::Minus,
            _ => Parity::Unresolved,
        });
    }
    let want = n_stored * dim * 8;
    let vec_bytes = take(&mut cur, want)?;
    let mut data = vec![0.0f64; n_stored * dim];
    for (i, chunk) in vec_bytes.chunks_exact(8).enumerate() {
        data[i] = f64::from_le_bytes(chunk.try_into().unwrap());
    }
    let vectors = Array2::from_shape_vec((n_stored, dim), data)
        .map_err(|e| QuantumError::Cache(format!("vector shape: {e}")))?;

    Ok(Spectrum {
        params: *params,
        basis,
        j,
        n_max,
        dim,
        energies,
        vectors,
        tail_weight,
        parity,
        converged_count,
        params_hash: stored_key,
    })
}

fn write_str(buf: &mut Vec<u8>, s: &str) {
    buf.extend_from_slice(&(s.len() as u32).to_le_bytes());
    buf.extend_from_slice(s.as_bytes());
}

fn read_str(cur: &mut &[u8]) -> Result<String, QuantumError> {
    let len = u32::from_le_bytes(take(cur, 4)?.try_into().unwrap()) as usize;
    if len > 4096 {
        return Err(QuantumError::Cache("unreasonable string length".into()));
    }
    Ok(String::from_utf8_lossy(take(cur, len)?).into_owned())
}

fn take<'a>(cur: &mut &'a [u8], n: usize) -> Result<&'a [u8], QuantumError> {
    if cur.len() < n {
        return Err(QuantumError::Cache("file truncated".into()));
    }
    let (head, rest) = cur.split_at(n);
    *cur = rest;
    Ok(head)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{ECBasisSpec, SpectrumOptions};

    fn small_spectrum() -> Spectrum {
        let params = DickeParams::resonant(2.0, 2.0).unwrap();
        let spec = ECBasisSpec::new(2.0, 12).unwrap();
        Spectrum::compute(&params, &spec, &SpectrumOptions::default()).unwrap()
    }

    #[test]
    fn round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let s = small_spectrum();
        store(dir.path(), &s).unwrap();
        let loaded = load(dir.path(), &s.params_hash, &s.params).unwrap();
        assert_eq!(loaded.energies, s.energies);
        assert_eq!(loaded.converged_count, s.converged_count);
        assert_eq!(loaded.parity, s.parity);
        assert_eq!(loaded.vectors, s.vectors);
        assert_eq!(loaded.tail_weight, s.tail_weight);
        assert_eq!(loaded.n_max, s.n_max);
        assert_eq!(loaded.dim, s.dim);
    }

    #[test]
    fn corruption_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let s = small_spectrum();
        let path = store(dir.path(), &s).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x40;
        std::fs::write(&path, &bytes).unwrap();
        match load(dir.path(), &s.params_hash, &s.params) {
            Err(QuantumError::Cache(msg)) => assert!(msg.contains("checksum")),
            other => panic!("expected checksum failure, got {other:?}"),
        }
    }

    #[test]
    fn missing_entry_errors() {
        let dir = tempfile::tempdir().unwrap();
        let params = DickeParams::resonant(2.0, 2.0).unwrap();
        assert!(load(dir.path(), "deadbeef", &params).is_err());
    }

    #[test]
    fn wrong_params_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let s = small_spectrum();
        store(dir.path(), &s).unwrap();
        let other = DickeParams::resonant(1.5, 2.0).unwrap();
        assert!(load(dir.path(), &s.params_hash, &other).is_err());
    }
}
