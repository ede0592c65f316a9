//! Flat key-value configuration files.
//!
//! ```text
//! # kicked particle in a finite square well
//! k = 4.25
//! V0 = 5000.0
//! b_over_pi = 1.4
//! hbar_s = 1.0
//! basis_l_max = 500
//! ```
//!
//! The barrier width is given as a multiple of π so values like `1.4π` stay
//! exact. Unknown keys are rejected to catch typos.

use std::collections::BTreeMap;
use std::path::Path;

use kwell_core::model::ModelParams;

use crate::error::{AppError, ErrorClass};

#[derive(Debug, Clone)]
pub struct Config {
    pub k: f64,
    pub v0: f64,
    pub b_over_pi: f64,
    pub hbar_s: f64,
    pub basis_l_max: usize,
    /// Operationalizes "μ ≫ 1".
    pub mu_hi: f64,
    pub sweep_k: Vec<f64>,
    pub sweep_v0: Vec<f64>,
    pub classical_trajectories: usize,
    pub classical_steps: usize,
    pub classical_p_max: f64,
}

impl Config {
    pub fn model_params(&self) -> Result<ModelParams, AppError> {
        ModelParams::new(
            self.k,
            self.v0,
            self.b_over_pi * std::f64::consts::PI,
            self.hbar_s,
        )
        .map_err(|e| AppError::new(ErrorClass::Params, format!("invalid parameters: {e}")))
    }

    pub fn load(path: &Path) -> Result<Config, AppError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            AppError::new(ErrorClass::Config, format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Config, AppError> {
        let bad = |msg: String| AppError::new(ErrorClass::Config, msg);
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim().to_string();
            if map.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(bad(format!("duplicate key `{key}`")));
            }
        }

        let mut take_f64 = |key: &str, default: Option<f64>| -> Result<f64, AppError> {
            match map.remove(key) {
                Some(v) => v.parse::<f64>().map_err(|_| bad(format!("key `{key}`: bad number `{v}`"))),
                None => default.ok_or_else(|| bad(format!("missing required key `{key}`"))),
            }
        };
        let k = take_f64("k", None)?;
        let v0 = take_f64("V0", None)?;
        let b_over_pi = take_f64("b_over_pi", None)?;
        let hbar_s = take_f64("hbar_s", None)?;
        let mu_hi = take_f64("mu_hi", Some(10.0))?;
        let classical_p_max = take_f64("classical_p_max", Some(150.0))?;

        let mut take_usize = |key: &str, default: Option<usize>| -> Result<usize, AppError> {
            match map.remove(key) {
                Some(v) => v.parse::<usize>().map_err(|_| bad(format!("key `{key}`: bad integer `{v}`"))),
                None => default.ok_or_else(|| bad(format!("missing required key `{key}`"))),
            }
        };
        let basis_l_max = take_usize("basis_l_max", None)?;
        let classical_trajectories = take_usize("classical_trajectories", Some(20))?;
        let classical_steps = take_usize("classical_steps", Some(5000))?;

        let mut take_list = |key: &str| -> Result<Vec<f64>, AppError> {
            match map.remove(key) {
                None => Ok(Vec::new()),
                Some(v) => v
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|_| bad(format!("key `{key}`: bad number `{s}`")))
                    })
                    .collect(),
            }
        };
        let sweep_k = take_list("sweep_k")?;
        let sweep_v0 = take_list("sweep_v0")?;

        if let Some(key) = map.keys().next() {
            return Err(bad(format!("unknown key `{key}`")));
        }
        Ok(Config {
            k,
            v0,
            b_over_pi,
            hbar_s,
            basis_l_max,
            mu_hi,
            sweep_k,
            sweep_v0,
            classical_trajectories,
            classical_steps,
            classical_p_max,
        })
    }
}
