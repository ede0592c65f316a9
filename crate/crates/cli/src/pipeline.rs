//! Shared run machinery: spectrum loading with cache, Floquet decomposition,
//! and run manifests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use kwell_core::basis::{solve_unperturbed, BasisTruncation, UnperturbedSpectrum};
use kwell_core::floquet::{build_floquet, diagonalize_floquet, FloquetDecomposition, FloquetMatrix};
use kwell_core::model::ModelParams;

use crate::cache;
use crate::config::Config;
use crate::error::{AppError, ErrorClass};
use crate::io::{fnv64, to_json_bytes, write_atomic};

pub struct RunContext {
    pub config: Config,
    pub params: ModelParams,
    pub truncation: BasisTruncation,
    pub out_dir: PathBuf,
    pub cache_dir: PathBuf,
    pub seed: u64,
    pub cache_hit: bool,
}

impl RunContext {
    pub fn new(
        config: Config,
        out_dir: PathBuf,
        cache_dir: PathBuf,
        seed: u64,
    ) -> Result<Self, AppError> {
        let params = config.model_params()?;
        let truncation = BasisTruncation::new(config.basis_l_max)
            .map_err(|e| AppError::new(ErrorClass::Params, format!("truncation: {e}")))?;
        Ok(Self { config, params, truncation, out_dir, cache_dir, seed, cache_hit: false })
    }

    /// Cached spectrum solve; records whether the cache was hit.
    pub fn spectrum(&mut self) -> Result<UnperturbedSpectrum, AppError> {
        self.spectrum_for(&self.params.clone())
    }

    /// Cached solve at explicit parameters (sweep cells share the cache).
    pub fn spectrum_for(&mut self, p: &ModelParams) -> Result<UnperturbedSpectrum, AppError> {
        if let Some(s) = cache::load(&self.cache_dir, p, &self.truncation)? {
            self.cache_hit = true;
            return Ok(s);
        }
        self.cache_hit = false;
        let s = solve_unperturbed(p, &self.truncation)?;
        cache::save(&self.cache_dir, &s)?;
        Ok(s)
    }

    pub fn floquet(
        &mut self,
    ) -> Result<(UnperturbedSpectrum, FloquetMatrix, FloquetDecomposition), AppError> {
        let s = self.spectrum()?;
        let u = build_floquet(&s, &self.params)?;
        let d = diagonalize_floquet(&u)?;
        Ok((s, u, d))
    }
}

#[derive(Serialize)]
pub struct ManifestParams {
    pub k: f64,
    pub v0: f64,
    pub b_over_pi: f64,
    pub hbar_s: f64,
}

#[derive(Serialize)]
pub struct ManifestTruncation {
    pub l_max: usize,
    pub dim: usize,
}

#[derive(Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub fnv64: String,
}

/// One manifest per run; every output file references it.
#[derive(Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: ManifestParams,
    pub truncation: ManifestTruncation,
    pub seed: u64,
    pub code_version: String,
    /// Unix seconds; honors SOURCE_DATE_EPOCH for reproducible runs.
    pub created_unix: u64,
    pub cache_hit: bool,
    pub spectrum_hash: String,
    pub outputs: Vec<OutputRecord>,
    pub notes: BTreeMap<String, serde_json::Value>,
}

fn timestamp() -> u64 {
    if let Ok(v) = std::env::var("SOURCE_DATE_EPOCH") {
        if let Ok(secs) = v.parse::<u64>() {
            return secs;
        }
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Collects outputs, writes them atomically, then writes the manifest.
pub struct OutputSet<'a> {
    ctx: &'a RunContext,
    subcommand: String,
    outputs: Vec<OutputRecord>,
    notes: BTreeMap<String, serde_json::Value>,
}

impl<'a> OutputSet<'a> {
    pub fn new(ctx: &'a RunContext, subcommand: &str) -> Self {
        Self {
            ctx,
            subcommand: subcommand.to_string(),
            outputs: Vec::new(),
            notes: BTreeMap::new(),
        }
    }

    pub fn note(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.notes.insert(key.to_string(), value.into());
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, AppError> {
        let path = self.ctx.out_dir.join(name);
        write_atomic(&path, bytes)?;
        self.outputs
            .push(OutputRecord { file: name.to_string(), fnv64: format!("{:016x}", fnv64(bytes)) });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, AppError> {
        let bytes = to_json_bytes(value)?;
        self.write(name, &bytes)
    }

    /// Finalize: emit `<subcommand>.manifest.json`.
    pub fn finish(self, spectrum_hash: u64) -> Result<PathBuf, AppError> {
        let manifest = RunManifest {
            subcommand: self.subcommand.clone(),
            params: ManifestParams {
                k: self.ctx.params.k,
                v0: self.ctx.params.v0,
                b_over_pi: self.ctx.params.b / std::f64::consts::PI,
                hbar_s: self.ctx.params.hbar,
            },
            truncation: ManifestTruncation {
                l_max: self.ctx.truncation.l_max(),
                dim: self.ctx.truncation.dim(),
            },
            seed: self.ctx.seed,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            created_unix: timestamp(),
            cache_hit: self.ctx.cache_hit,
            spectrum_hash: format!("{spectrum_hash:016x}"),
            outputs: self.outputs,
            notes: self.notes,
        };
        let path = self.ctx.out_dir.join(format!("{}.manifest.json", self.subcommand));
        write_atomic(&path, &to_json_bytes(&manifest)?)?;
        Ok(path)
    }
}

/// Shorthand for metadata lines shared by most CSV outputs; every output
/// names the one manifest describing its run.
pub fn meta_for(ctx: &RunContext, subcommand: &str) -> Vec<(&'static str, String)> {
    vec![
        ("k", format!("{}", ctx.params.k)),
        ("V0", format!("{}", ctx.params.v0)),
        ("b_over_pi", format!("{}", ctx.params.b / std::f64::consts::PI)),
        ("hbar_s", format!("{}", ctx.params.hbar)),
        ("l_max", format!("{}", ctx.truncation.l_max())),
        ("seed", format!("{}", ctx.seed)),
        ("manifest", format!("{subcommand}.manifest.json")),
    ]
}

pub fn ensure_dir(path: &Path) -> Result<(), AppError> {
    std::fs::create_dir_all(path).map_err(|e| AppError::io(e, format!("mkdir {}", path.display())))
}
