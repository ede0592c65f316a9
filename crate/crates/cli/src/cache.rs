//! Spectrum cache. The unperturbed spectrum depends on (V0, b, ħ_s, l_max)
//! but not on the kick strength, so one solve serves a whole k-sweep. Files
//! are keyed by the params fingerprint and carry an integrity checksum.

use std::path::{Path, PathBuf};

use kwell_core::basis::{params_hash, BasisTruncation, UnperturbedSpectrum};
use kwell_core::linalg::RMat;
use kwell_core::model::ModelParams;

use crate::error::{AppError, ErrorClass};
use crate::io::{write_atomic, MatrixContainer, MAGIC_SPECTRUM};

pub fn cache_file(cache_dir: &Path, hash: u64) -> PathBuf {
    cache_dir.join(format!("spectrum_{hash:016x}.kwspec"))
}

pub fn save(cache_dir: &Path, s: &UnperturbedSpectrum) -> Result<PathBuf, AppError> {
    let mut payload: Vec<f64> = Vec::new();
    payload.push(s.v0);
    payload.push(s.b);
    payload.push(s.hbar);
    payload.push(s.l_max as f64);
    payload.push(s.even.len() as f64);
    payload.push(s.odd.len() as f64);
    payload.extend_from_slice(&s.even.energies);
    payload.extend_from_slice(s.even.vectors.data());
    payload.extend_from_slice(&s.odd.energies);
    payload.extend_from_slice(s.odd.vectors.data());
    let container = MatrixContainer {
        magic: MAGIC_SPECTRUM,
        rows: 1,
        cols: payload.len() as u64,
        complex: false,
        payload: &payload,
    };
    let path = cache_file(cache_dir, s.params_hash);
    write_atomic(&path, &container.encode())?;
    Ok(path)
}

pub fn load(
    cache_dir: &Path,
    p: &ModelParams,
    t: &BasisTruncation,
) -> Result<Option<UnperturbedSpectrum>, AppError> {
    let hash = params_hash(p.v0, p.b, p.hbar, t.l_max());
    let path = cache_file(cache_dir, hash);
    let bytes = match std::fs::read(&path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(AppError::io(e, format!("read {}", path.display()))),
    };
    let (_, _, _, payload) = MatrixContainer::decode(MAGIC_SPECTRUM, &bytes)
        .map_err(|e| AppError::new(ErrorClass::Cache, format!("{}: {e}", path.display())))?;
    let corrupt =
        |msg: &str| AppError::new(ErrorClass::Cache, format!("{}: {msg}", path.display()));
    if payload.len() < 6 {
        return Err(corrupt("truncated header"));
    }
    let (v0, b, hbar) = (payload[0], payload[1], payload[2]);
    let l_max = payload[3] as usize;
    let n_even = payload[4] as usize;
    let n_odd = payload[5] as usize;
    if l_max != t.l_max() || v0 != p.v0 || b != p.b || hbar != p.hbar {
        return Err(corrupt("parameter mismatch under matching fingerprint"));
    }
    let even_cols = l_max + 1;
    let odd_cols = l_max;
    let expected = 6 + n_even + n_even * even_cols + n_odd + n_odd * odd_cols;
    if payload.len() != expected {
        return Err(corrupt("payload size mismatch"));
    }
    let mut at = 6usize;
    let even_energies = payload[at..at + n_even].to_vec();
    at += n_even;
    let even_vectors =
        RMat::from_rows(n_even, even_cols, payload[at..at + n_even * even_cols].to_vec());
    at += n_even * even_cols;
    let odd_energies = payload[at..at + n_odd].to_vec();
    at += n_odd;
    let odd_vectors =
        RMat::from_rows(n_odd, odd_cols, payload[at..at + n_odd * odd_cols].to_vec());

    Ok(Some(UnperturbedSpectrum::from_blocks(
        l_max,
        v0,
        b,
        hbar,
        (even_energies, even_vectors),
        (odd_energies, odd_vectors),
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use kwell_core::basis::solve_unperturbed;

    #[test]
    fn save_load_round_trip() {
        let dir = std::env::temp_dir().join(format!("kwell-cache-test-{}", std::process::id()));
        let p = ModelParams::new(0.5, 40.0, 1.4 * std::f64::consts::PI, 1.0).unwrap();
        let t = BasisTruncation::new(24).unwrap();
        let s = solve_unperturbed(&p, &t).unwrap();
        save(&dir, &s).unwrap();
        let loaded = load(&dir, &p, &t).unwrap().expect("cache hit");
        assert_eq!(loaded.params_hash, s.params_hash);
        assert_eq!(loaded.energies.len(), s.energies.len());
        for (a, b) in loaded.energies.iter().zip(&s.energies) {
            assert_eq!(a, b);
        }
        for n in 0..s.dim() {
            assert_eq!(loaded.parities[n], s.parities[n]);
            assert_eq!(loaded.momentum_row(n), s.momentum_row(n));
        }
        // miss on different params
        let p2 = ModelParams::new(0.5, 41.0, 1.4 * std::f64::consts::PI, 1.0).unwrap();
        assert!(load(&dir, &p2, &t).unwrap().is_none());
        std::fs::remove_dir_all(&dir).ok();
    }
}
