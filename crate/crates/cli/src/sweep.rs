//! (k, V0) phase-diagram sweep: per-cell Floquet pipeline, profile fits and
//! μ statistics, with an explicit classification rule, a shared spectrum
//! cache, restartable per-cell outputs and a bounded worker pool.

use serde::{Deserialize, Serialize};

use kwell_core::basis::{solve_unperturbed, BasisTruncation};
use kwell_core::floquet::{build_floquet, diagonalize_floquet};
use kwell_core::localization::{
    classify_mu, default_exponential_window, default_powerlaw_window, detect_crossover,
    fit_exponential, fit_powerlaw, participation_ratio, shift_and_average, MatrixDecayCurve,
    Regime, Side,
};
use kwell_core::model::ModelParams;

use crate::cache;
use crate::config::Config;
use crate::error::{AppError, ErrorClass};
use crate::io::{fmt_f64, to_json_bytes, write_atomic, Csv};
use crate::pipeline::{ensure_dir, OutputSet, RunContext};

#[derive(Debug, Serialize, Deserialize)]
pub struct PhaseCell {
    pub k: f64,
    pub v0: f64,
    /// powerlaw | exponential | mixed | undetermined | error
    pub classification: String,
    pub error: Option<String>,
    pub profile_states: usize,
    pub profile_subset: String,
    pub exp_parameter: Option<f64>,
    pub exp_quality: Option<f64>,
    pub pow_parameter: Option<f64>,
    pub pow_quality: Option<f64>,
    pub crossover_n_c: Option<usize>,
    pub mu_below_count: usize,
    pub mu_above_count: usize,
    pub mean_pr_below: Option<f64>,
    pub mean_pr_above: Option<f64>,
}

fn evaluate_cell(
    base: &Config,
    t: &BasisTruncation,
    cache_dir: &std::path::Path,
    k: f64,
    v0: f64,
) -> Result<PhaseCell, AppError> {
    let params = ModelParams::new(k, v0, base.b_over_pi * std::f64::consts::PI, base.hbar_s)
        .map_err(|e| AppError::new(ErrorClass::Params, format!("cell ({k}, {v0}): {e}")))?;
    let spectrum = match cache::load(cache_dir, &params, t)? {
        Some(s) => s,
        None => {
            let s = solve_unperturbed(&params, t)?;
            cache::save(cache_dir, &s)?;
            s
        }
    };
    let u = build_floquet(&spectrum, &params)?;
    let d = diagonalize_floquet(&u)?;
    let mus = classify_mu(&d, &spectrum, &params, base.mu_hi);
    let retained = d.retained_states();
    let prs = participation_ratio(&d);

    let below: Vec<usize> =
        retained.iter().copied().filter(|&r| mus[r].regime == Regime::Below).collect();
    let above: Vec<usize> = retained
        .iter()
        .copied()
        .filter(|&r| matches!(mus[r].regime, Regime::Intermediate | Regime::FarAbove))
        .collect();
    let mean_pr = |set: &[usize]| -> Option<f64> {
        (!set.is_empty()).then(|| set.iter().map(|&r| prs[r]).sum::<f64>() / set.len() as f64)
    };

    // classification acts on the μ≤1-dominant profile when that class is the
    // majority; otherwise on the full retained average
    let (subset, subset_name) = if v0 > 0.0 && below.len() * 2 >= retained.len() {
        (below.clone(), "mu_below_1")
    } else {
        (retained.clone(), "retained")
    };
    let prof = shift_and_average(&d, |r| subset.contains(&r), Side::Symmetrized)?;

    let exp_fit = fit_exponential(&prof, default_exponential_window(&prof)).ok();
    let pow_fit = fit_powerlaw(&prof, default_powerlaw_window(&prof)).ok();
    let curve = MatrixDecayCurve {
        offsets: prof.offsets.iter().filter(|&&v| v >= 1).map(|&v| v as usize).collect(),
        values: prof
            .offsets
            .iter()
            .zip(&prof.density)
            .filter(|(&v, _)| v >= 1)
            .map(|(_, &dn)| dn)
            .collect(),
    };
    let crossover = detect_crossover(&curve);

    let classification = if crossover.is_some() {
        "mixed"
    } else {
        match (&exp_fit, &pow_fit) {
            (Some(e), Some(p)) if p.quality > e.quality => "powerlaw",
            (Some(e), Some(p)) if e.quality > p.quality => "exponential",
            (Some(e), None) if e.quality > 0.9 => "exponential",
            (None, Some(p)) if p.quality > 0.9 => "powerlaw",
            _ => "undetermined",
        }
    };

    Ok(PhaseCell {
        k,
        v0,
        classification: classification.to_string(),
        error: None,
        profile_states: prof.count,
        profile_subset: subset_name.to_string(),
        exp_parameter: exp_fit.as_ref().map(|f| f.parameter),
        exp_quality: exp_fit.as_ref().map(|f| f.quality),
        pow_parameter: pow_fit.as_ref().map(|f| f.parameter),
        pow_quality: pow_fit.as_ref().map(|f| f.quality),
        crossover_n_c: crossover.as_ref().map(|c| c.n_c),
        mu_below_count: below.len(),
        mu_above_count: above.len(),
        mean_pr_below: mean_pr(&below),
        mean_pr_above: mean_pr(&above),
    })
}

fn cell_file(i: usize, j: usize) -> String {
    format!("cell_{i:03}_{j:03}.json")
}

pub fn cmd_sweep(
    ctx: &mut RunContext,
    k_list: Option<Vec<f64>>,
    v0_list: Option<Vec<f64>>,
    workers: usize,
    force: bool,
) -> Result<(), AppError> {
    ensure_dir(&ctx.out_dir)?;
    let ks = k_list.unwrap_or_else(|| ctx.config.sweep_k.clone());
    let v0s = v0_list.unwrap_or_else(|| ctx.config.sweep_v0.clone());
    if ks.is_empty() || v0s.is_empty() {
        return Err(AppError::new(
            ErrorClass::Config,
            "sweep grid empty: set sweep_k/sweep_v0 in the config or pass --k-list/--v0-list",
        ));
    }

    // one spectrum solve per distinct V0, shared by every k
    let mut distinct_v0: Vec<f64> = Vec::new();
    for &v0 in &v0s {
        if !distinct_v0.iter().any(|&x| x == v0) {
            distinct_v0.push(v0);
        }
    }
    let mut spectrum_solves = 0usize;
    for &v0 in &distinct_v0 {
        let params =
            ModelParams::new(0.0, v0, ctx.config.b_over_pi * std::f64::consts::PI, ctx.config.hbar_s)
                .map_err(|e| AppError::new(ErrorClass::Params, format!("V0 = {v0}: {e}")))?;
        if cache::load(&ctx.cache_dir, &params, &ctx.truncation)?.is_none() {
            let s = solve_unperturbed(&params, &ctx.truncation)?;
            cache::save(&ctx.cache_dir, &s)?;
            spectrum_solves += 1;
        }
    }

    // work items: cells without a valid existing output (restartability)
    let mut reused = 0usize;
    let mut todo: Vec<(usize, usize, f64, f64)> = Vec::new();
    for (i, &k) in ks.iter().enumerate() {
        for (j, &v0) in v0s.iter().enumerate() {
            let path = ctx.out_dir.join(cell_file(i, j));
            if !force {
                if let Ok(bytes) = std::fs::read(&path) {
                    if let Ok(cell) = serde_json::from_slice::<PhaseCell>(&bytes) {
                        if cell.k == k && cell.v0 == v0 && cell.error.is_none() {
                            reused += 1;
                            continue;
                        }
                    }
                }
            }
            todo.push((i, j, k, v0));
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(if workers == 0 { 0 } else { workers })
        .build()
        .map_err(|e| AppError::new(ErrorClass::Compute, format!("worker pool: {e}")))?;

    let base = ctx.config.clone();
    let t = ctx.truncation;
    let cache_dir = ctx.cache_dir.clone();
    let out_dir = ctx.out_dir.clone();
    let results: Vec<(usize, usize, Result<(), AppError>)> = pool.install(|| {
        use rayon::prelude::*;
        todo.par_iter()
            .map(|&(i, j, k, v0)| {
                let cell = match evaluate_cell(&base, &t, &cache_dir, k, v0) {
                    Ok(c) => c,
                    Err(e) => PhaseCell {
                        k,
                        v0,
                        classification: "error".into(),
                        error: Some(e.to_string()),
                        profile_states: 0,
                        profile_subset: String::new(),
                        exp_parameter: None,
                        exp_quality: None,
                        pow_parameter: None,
                        pow_quality: None,
                        crossover_n_c: None,
                        mu_below_count: 0,
                        mu_above_count: 0,
                        mean_pr_below: None,
                        mean_pr_above: None,
                    },
                };
                let write = to_json_bytes(&cell)
                    .and_then(|bytes| write_atomic(&out_dir.join(cell_file(i, j)), &bytes));
                (i, j, write)
            })
            .collect()
    });
    for (i, j, res) in &results {
        res.as_ref().map_err(|e| {
            AppError::new(ErrorClass::Io, format!("cell ({i},{j}): {e}"))
        })?;
    }

    // summary over all cells, computed and reused alike
    let mut csv = Csv::new(
        &[
            ("b_over_pi", fmt_f64(ctx.config.b_over_pi)),
            ("hbar_s", fmt_f64(ctx.config.hbar_s)),
            ("l_max", ctx.truncation.l_max().to_string()),
        ],
        &["k", "v0", "classification", "pow_quality", "exp_quality", "n_c"],
    );
    let mut err_cells = 0usize;
    for (i, &k) in ks.iter().enumerate() {
        for (j, &v0) in v0s.iter().enumerate() {
            let bytes = std::fs::read(ctx.out_dir.join(cell_file(i, j)))
                .map_err(|e| AppError::io(e, format!("cell ({i},{j})")))?;
            let cell: PhaseCell = serde_json::from_slice(&bytes)
                .map_err(|e| AppError::new(ErrorClass::Io, format!("cell ({i},{j}): {e}")))?;
            if cell.error.is_some() {
                err_cells += 1;
            }
            csv.row(&[
                fmt_f64(k),
                fmt_f64(v0),
                cell.classification.clone(),
                cell.pow_quality.map(fmt_f64).unwrap_or_default(),
                cell.exp_quality.map(fmt_f64).unwrap_or_default(),
                cell.crossover_n_c.map(|n| n.to_string()).unwrap_or_default(),
            ]);
        }
    }

    let mut set = OutputSet::new(ctx, "sweep");
    set.write("phase_diagram.csv", csv.bytes())?;
    set.note("cells_total", (ks.len() * v0s.len()) as u64);
    set.note("cells_reused", reused as u64);
    set.note("cells_computed", todo.len() as u64);
    set.note("cells_failed", err_cells as u64);
    set.note("spectrum_solves", spectrum_solves as u64);
    set.note("classification_rule", "μ≤1-dominant profile; mixed on detected crossover; else higher fit quality wins");
    set.finish(0)?;
    Ok(())
}
