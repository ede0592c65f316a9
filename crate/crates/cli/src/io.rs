//! Output plumbing: CSV with `#`-prefixed metadata, JSON documents, the
//! binary matrix container, FNV checksums and atomic writes.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{AppError, ErrorClass};

/// FNV-1a over a byte stream; used for params fingerprints, output checksums
/// and cache integrity.
pub fn fnv64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Write atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), AppError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir).map_err(|e| AppError::io(e, format!("mkdir {}", dir.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    {
        let mut f = fs::File::create(&tmp)
            .map_err(|e| AppError::io(e, format!("create {}", tmp.display())))?;
        f.write_all(bytes)
            .map_err(|e| AppError::io(e, format!("write {}", tmp.display())))?;
        f.sync_all().ok();
    }
    fs::rename(&tmp, path)
        .map_err(|e| AppError::io(e, format!("rename into {}", path.display())))?;
    Ok(())
}

/// A CSV document: `#` metadata lines, one header row, then records.
pub struct Csv {
    buf: String,
    columns: usize,
}

impl Csv {
    pub fn new(meta: &[(&str, String)], header: &[&str]) -> Self {
        let mut buf = String::new();
        for (k, v) in meta {
            let _ = writeln!(buf, "# {k} = {v}");
        }
        let _ = writeln!(buf, "{}", header.join(","));
        Self { buf, columns: header.len() }
    }

    pub fn row(&mut self, fields: &[String]) {
        debug_assert_eq!(fields.len(), self.columns);
        let _ = writeln!(self.buf, "{}", fields.join(","));
    }

    pub fn bytes(&self) -> &[u8] {
        self.buf.as_bytes()
    }
}

/// Shortest-roundtrip float formatting (deterministic across runs).
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, AppError> {
    let mut out = serde_json::to_vec_pretty(value)
        .map_err(|e| AppError::new(ErrorClass::Io, format!("json: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

/// Binary matrix container: magic, version, dims, row-major f64 payload,
/// trailing FNV checksum of everything before it. Complex matrices store
/// interleaved (re, im) pairs and set `complex = 1`.
pub struct MatrixContainer<'a> {
    pub magic: &'a [u8; 8],
    pub rows: u64,
    pub cols: u64,
    pub complex: bool,
    pub payload: &'a [f64],
}

pub const MAGIC_SPECTRUM: &[u8; 8] = b"KWSPEC01";
pub const MAGIC_STATES: &[u8; 8] = b"KWSTAT01";

impl MatrixContainer<'_> {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(40 + self.payload.len() * 8);
        out.extend_from_slice(self.magic);
        out.extend_from_slice(&1u32.to_le_bytes());
        out.extend_from_slice(&(self.complex as u32).to_le_bytes());
        out.extend_from_slice(&self.rows.to_le_bytes());
        out.extend_from_slice(&self.cols.to_le_bytes());
        for v in self.payload {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let checksum = fnv64(&out);
        out.extend_from_slice(&checksum.to_le_bytes());
        out
    }

    pub fn decode(magic: &[u8; 8], bytes: &[u8]) -> Result<(u64, u64, bool, Vec<f64>), AppError> {
        let corrupt = |msg: &str| AppError::new(ErrorClass::Cache, format!("container: {msg}"));
        if bytes.len() < 40 {
            return Err(corrupt("too short"));
        }
        let (body, tail) = bytes.split_at(bytes.len() - 8);
        let stored = u64::from_le_bytes(tail.try_into().unwrap());
        if fnv64(body) != stored {
            return Err(corrupt("checksum mismatch"));
        }
        if &body[..8] != magic {
            return Err(corrupt("bad magic"));
        }
        let version = u32::from_le_bytes(body[8..12].try_into().unwrap());
        if version != 1 {
            return Err(corrupt("unsupported version"));
        }
        let complex = u32::from_le_bytes(body[12..16].try_into().unwrap()) != 0;
        let rows = u64::from_le_bytes(body[16..24].try_into().unwrap());
        let cols = u64::from_le_bytes(body[24..32].try_into().unwrap());
        let data = &body[32..];
        let per = if complex { 2 } else { 1 };
        let expect = (rows * cols * per) as usize * 8;
        if data.len() != expect {
            return Err(corrupt("payload size mismatch"));
        }
        let payload = data
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok((rows, cols, complex, payload))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn container_round_trip() {
        let payload: Vec<f64> = (0..12).map(|i| i as f64 * 0.5).collect();
        let c = MatrixContainer {
            magic: MAGIC_STATES,
            rows: 3,
            cols: 4,
            complex: false,
            payload: &payload,
        };
        let bytes = c.encode();
        let (r, cx, complex, data) = MatrixContainer::decode(MAGIC_STATES, &bytes).unwrap();
        assert_eq!((r, cx, complex), (3, 4, false));
        assert_eq!(data, payload);

        let mut corrupted = bytes.clone();
        let mid = corrupted.len() / 2;
        corrupted[mid] ^= 0xff;
        assert!(MatrixContainer::decode(MAGIC_STATES, &corrupted).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut csv = Csv::new(&[("alpha", "0.5".into())], &["a", "b"]);
        csv.row(&["1".into(), "2".into()]);
        let text = String::from_utf8(csv.bytes().to_vec()).unwrap();
        assert_eq!(text, "# alpha = 0.5\na,b\n1,2\n");
    }
}
