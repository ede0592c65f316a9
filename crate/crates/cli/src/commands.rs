//! Subcommand implementations.

use serde::Serialize;

use kwell_core::basis::Parity;
use kwell_core::classical::{coverage_fraction, stratified_ensemble, stroboscopic_section};
use kwell_core::floquet::FloquetDecomposition;
use kwell_core::localization::{
    classify_mu, default_exponential_window, default_powerlaw_window, detect_crossover,
    fit_exponential, fit_powerlaw, matrix_element_decay, participation_ratio, shift_and_average,
    FitResult, MuRecord, Regime, Side,
};
use kwell_core::spectral::{brody_fit, extract_spacings, ks_vs_poisson, spacing_histogram};
use kwell_core::tightbinding;

use crate::error::{AppError, ErrorClass};
use crate::io::{fmt_f64, Csv, MatrixContainer, MAGIC_STATES};
use crate::pipeline::{ensure_dir, meta_for, OutputSet, RunContext};

#[derive(Serialize)]
pub struct FitOut {
    pub kind: String,
    pub parameter: f64,
    pub window: [f64; 2],
    pub quality: f64,
    pub points: usize,
}

impl From<&FitResult> for FitOut {
    fn from(f: &FitResult) -> Self {
        Self {
            kind: f.kind.to_string(),
            parameter: f.parameter,
            window: [f.window.0, f.window.1],
            quality: f.quality,
            points: f.points,
        }
    }
}

fn parity_of_flag(flag: Option<&str>) -> Result<Vec<Parity>, AppError> {
    match flag.unwrap_or("both") {
        "even" => Ok(vec![Parity::Even]),
        "odd" => Ok(vec![Parity::Odd]),
        "both" => Ok(vec![Parity::Even, Parity::Odd]),
        other => Err(AppError::new(
            ErrorClass::Config,
            format!("--parity must be even|odd|both, got `{other}`"),
        )),
    }
}

fn parse_window(window: Option<&str>) -> Result<Option<(f64, f64)>, AppError> {
    let Some(w) = window else { return Ok(None) };
    let parts: Vec<&str> = w.split(':').collect();
    if parts.len() != 2 {
        return Err(AppError::new(ErrorClass::Config, "--window expects `lo:hi`"));
    }
    let lo = parts[0]
        .parse::<f64>()
        .map_err(|_| AppError::new(ErrorClass::Config, "bad --window lower bound"))?;
    let hi = parts[1]
        .parse::<f64>()
        .map_err(|_| AppError::new(ErrorClass::Config, "bad --window upper bound"))?;
    Ok(Some((lo, hi)))
}

/// Retained states further restricted to a μ window.
fn select_states(
    d: &FloquetDecomposition,
    mus: &[MuRecord],
    mu_min: Option<f64>,
    mu_max: Option<f64>,
    v0: f64,
) -> Result<Vec<usize>, AppError> {
    if (mu_min.is_some() || mu_max.is_some()) && v0 == 0.0 {
        return Err(AppError::new(
            ErrorClass::Params,
            "μ = E_max/V0 is undefined at V0 = 0; drop the μ selectors",
        ));
    }
    Ok(d.retained_states()
        .into_iter()
        .filter(|&r| {
            let mu = mus[r].mu;
            mu_min.map_or(true, |lo| mu >= lo) && mu_max.map_or(true, |hi| mu <= hi)
        })
        .collect())
}

pub fn cmd_spectrum(ctx: &mut RunContext) -> Result<(), AppError> {
    ensure_dir(&ctx.out_dir)?;
    let s = ctx.spectrum()?;
    let mut csv = Csv::new(&meta_for(ctx, "spectrum"), &["n", "energy", "parity"]);
    for n in 0..s.dim() {
        csv.row(&[n.to_string(), fmt_f64(s.energies[n]), s.parities[n].to_string()]);
    }
    let mut set = OutputSet::new(ctx, "spectrum");
    set.write("spectrum.csv", csv.bytes())?;
    set.note("converged_count", s.converged_count() as u64);
    set.finish(s.params_hash)?;
    Ok(())
}

pub fn cmd_floquet(ctx: &mut RunContext, dump_states: bool) -> Result<(), AppError> {
    ensure_dir(&ctx.out_dir)?;
    let (s, u, d) = ctx.floquet()?;
    let mut csv = Csv::new(
        &meta_for(ctx, "floquet"),
        &["r", "omega", "parity", "converged", "n_max", "e_max"],
    );
    for r in 0..d.len() {
        let n_max = d.n_max_global(r);
        csv.row(&[
            r.to_string(),
            fmt_f64(d.states[r].omega),
            d.states[r].parity.to_string(),
            (d.states[r].converged as u8).to_string(),
            n_max.to_string(),
            fmt_f64(s.energies[n_max]),
        ]);
    }
    let mut set = OutputSet::new(ctx, "floquet");
    set.write("quasienergies.csv", csv.bytes())?;
    set.note("unitarity_defect", u.unitarity_defect);
    set.note("max_modulus_defect", d.max_modulus_defect);
    set.note("retained_cutoff", u.retained_cutoff as u64);

    if dump_states {
        let dim = d.dim;
        let mut payload = Vec::with_capacity(d.len() * dim);
        for r in 0..d.len() {
            payload.extend_from_slice(&d.density(r));
        }
        let container = MatrixContainer {
            magic: MAGIC_STATES,
            rows: d.len() as u64,
            cols: dim as u64,
            complex: false,
            payload: &payload,
        };
        set.write("state_densities.kwmat", &container.encode())?;
        #[derive(Serialize)]
        struct Sidecar {
            format: &'static str,
            rows: usize,
            cols: usize,
            content: &'static str,
            unitarity_defect: f64,
            code_version: &'static str,
            k: f64,
            v0: f64,
            b_over_pi: f64,
            hbar_s: f64,
            l_max: usize,
        }
        set.write_json(
            "state_densities.json",
            &Sidecar {
                format: "KWSTAT01",
                rows: d.len(),
                cols: dim,
                content: "|c_rn|^2 row-major, states sorted by quasi-energy",
                unitarity_defect: u.unitarity_defect,
                code_version: env!("CARGO_PKG_VERSION"),
                k: ctx.params.k,
                v0: ctx.params.v0,
                b_over_pi: ctx.params.b / std::f64::consts::PI,
                hbar_s: ctx.params.hbar,
                l_max: ctx.truncation.l_max(),
            },
        )?;
    }
    set.finish(s.params_hash)?;
    Ok(())
}

#[derive(Serialize)]
pub struct ProfileReport {
    pub states_averaged: usize,
    pub side: String,
    pub mu_min: Option<f64>,
    pub mu_max: Option<f64>,
    pub exponential: Option<FitOut>,
    pub exponential_error: Option<String>,
    pub powerlaw: Option<FitOut>,
    pub powerlaw_error: Option<String>,
}

pub fn cmd_profiles(
    ctx: &mut RunContext,
    mu_min: Option<f64>,
    mu_max: Option<f64>,
    side: Option<&str>,
    window: Option<&str>,
) -> Result<(), AppError> {
    ensure_dir(&ctx.out_dir)?;
    let side = match side.unwrap_or("symmetrized") {
        "positive" => Side::Positive,
        "negative" => Side::Negative,
        "symmetrized" => Side::Symmetrized,
        other => {
            return Err(AppError::new(
                ErrorClass::Config,
                format!("--side must be positive|negative|symmetrized, got `{other}`"),
            ))
        }
    };
    let window = parse_window(window)?;
    let (s, _u, d) = ctx.floquet()?;
    let mus = classify_mu(&d, &s, &ctx.params, ctx.config.mu_hi);
    let selected = select_states(&d, &mus, mu_min, mu_max, ctx.params.v0)?;
    let prof = shift_and_average(&d, |r| selected.contains(&r), side)?;

    let mut csv = Csv::new(&meta_for(ctx, "profiles"), &["offset", "density", "contributors"]);
    for i in 0..prof.offsets.len() {
        csv.row(&[
            prof.offsets[i].to_string(),
            fmt_f64(prof.density[i]),
            prof.contributors[i].to_string(),
        ]);
    }

    let exp_window = window.unwrap_or_else(|| default_exponential_window(&prof));
    let pow_window = window.unwrap_or_else(|| default_powerlaw_window(&prof));
    let (exp_fit, exp_err) = match fit_exponential(&prof, exp_window) {
        Ok(f) => (Some(FitOut::from(&f)), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let (pow_fit, pow_err) = match fit_powerlaw(&prof, pow_window) {
        Ok(f) => (Some(FitOut::from(&f)), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let report = ProfileReport {
        states_averaged: prof.count,
        side: format!("{side:?}").to_lowercase(),
        mu_min,
        mu_max,
        exponential: exp_fit,
        exponential_error: exp_err,
        powerlaw: pow_fit,
        powerlaw_error: pow_err,
    };

    let mut set = OutputSet::new(ctx, "profiles");
    set.write("profile.csv", csv.bytes())?;
    set.write_json("profile_fits.json", &report)?;
    set.note("mu_hi", ctx.config.mu_hi);
    set.finish(s.params_hash)?;
    Ok(())
}

#[derive(Serialize)]
pub struct CrossoverOut {
    pub n_c: usize,
    pub head: FitOut,
    pub tail: FitOut,
}

pub fn cmd_melements(ctx: &mut RunContext) -> Result<(), AppError> {
    ensure_dir(&ctx.out_dir)?;
    let (s, u, _d) = ctx.floquet()?;
    let curve = matrix_element_decay(&u);
    let cross = detect_crossover(&curve);

    let mut meta = meta_for(ctx, "melements");
    meta.push((
        "definition",
        "M_m = mean over n of |U_{n,n+m}|, n and n+m inside the retained block".into(),
    ));
    if let Some(c) = &cross {
        meta.push(("n_c", c.n_c.to_string()));
    }
    let mut csv = Csv::new(&meta, &["m", "value"]);
    for (m, v) in curve.offsets.iter().zip(&curve.values) {
        csv.row(&[m.to_string(), fmt_f64(*v)]);
    }
    let report = cross.as_ref().map(|c| CrossoverOut {
        n_c: c.n_c,
        head: FitOut::from(&c.head),
        tail: FitOut::from(&c.tail),
    });

    let mut set = OutputSet::new(ctx, "melements");
    set.write("melements.csv", csv.bytes())?;
    set.write_json("crossover.json", &report)?;
    set.finish(s.params_hash)?;
    Ok(())
}

#[derive(Serialize)]
struct PrSummary {
    retained: usize,
    mean_pr_mu_below_1: Option<f64>,
    mean_pr_mu_above_1: Option<f64>,
}

pub fn cmd_pr(ctx: &mut RunContext) -> Result<(), AppError> {
    ensure_dir(&ctx.out_dir)?;
    let (s, _u, d) = ctx.floquet()?;
    let mus = classify_mu(&d, &s, &ctx.params, ctx.config.mu_hi);
    let prs = participation_ratio(&d);
    let retained = d.retained_states();

    let mut csv = Csv::new(
        &meta_for(ctx, "pr"),
        &["state", "omega", "parity", "e_max", "mu", "pr", "retained"],
    );
    for r in 0..d.len() {
        let mu_field = if mus[r].regime == Regime::Undefined {
            String::new()
        } else {
            fmt_f64(mus[r].mu)
        };
        csv.row(&[
            r.to_string(),
            fmt_f64(d.states[r].omega),
            d.states[r].parity.to_string(),
            fmt_f64(mus[r].e_max),
            mu_field,
            fmt_f64(prs[r]),
            (retained.contains(&r) as u8).to_string(),
        ]);
    }

    let mean = |pred: &dyn Fn(usize) -> bool| -> Option<f64> {
        let vals: Vec<f64> = retained.iter().copied().filter(|&r| pred(r)).map(|r| prs[r]).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    };
    let summary = if ctx.params.v0 > 0.0 {
        PrSummary {
            retained: retained.len(),
            mean_pr_mu_below_1: mean(&|r| mus[r].mu <= 1.0),
            mean_pr_mu_above_1: mean(&|r| mus[r].mu > 1.0),
        }
    } else {
        PrSummary { retained: retained.len(), mean_pr_mu_below_1: None, mean_pr_mu_above_1: None }
    };

    let mut set = OutputSet::new(ctx, "pr");
    set.write("pr.csv", csv.bytes())?;
    set.write_json("pr_summary.json", &summary)?;
    set.finish(s.params_hash)?;
    Ok(())
}

#[derive(Serialize)]
pub struct SpacingReport {
    pub parity: String,
    pub source_count: usize,
    pub mu_min: Option<f64>,
    pub mu_max: Option<f64>,
    pub selection: String,
    pub brody_alpha: f64,
    pub brody_alpha_std: f64,
    pub brody_ks_statistic: f64,
    pub brody_ks_p: f64,
    pub poisson_ks_statistic: f64,
    pub poisson_ks_p: f64,
    pub histogram: Option<HistogramOut>,
}

#[derive(Serialize)]
pub struct HistogramOut {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
}

pub fn cmd_spacing(
    ctx: &mut RunContext,
    parity_flag: Option<&str>,
    mu_min: Option<f64>,
    mu_max: Option<f64>,
    bins: Option<usize>,
) -> Result<(), AppError> {
    ensure_dir(&ctx.out_dir)?;
    let parities = parity_of_flag(parity_flag)?;
    let (s, _u, d) = ctx.floquet()?;
    let mus = classify_mu(&d, &s, &ctx.params, ctx.config.mu_hi);
    let selected = select_states(&d, &mus, mu_min, mu_max, ctx.params.v0)?;

    let mut csv = Csv::new(&meta_for(ctx, "spacing"), &["parity", "spacing"]);
    let mut reports = Vec::new();
    for parity in parities {
        let stats = extract_spacings(&d, parity, |r| selected.contains(&r))?;
        for &sp in &stats.spacings {
            csv.row(&[parity.to_string(), fmt_f64(sp)]);
        }
        let fit = brody_fit(&stats)?;
        let poisson = ks_vs_poisson(&stats);
        let histogram = match bins {
            Some(b) => {
                let h = spacing_histogram(&stats, b)?;
                Some(HistogramOut { edges: h.edges, density: h.density })
            }
            None => None,
        };
        reports.push(SpacingReport {
            parity: parity.to_string(),
            source_count: stats.source_count,
            mu_min,
            mu_max,
            selection: "retained states (peak inside the converged half)".into(),
            brody_alpha: fit.alpha,
            brody_alpha_std: fit.alpha_std,
            brody_ks_statistic: fit.ks_fitted.statistic,
            brody_ks_p: fit.ks_fitted.p_value,
            poisson_ks_statistic: poisson.statistic,
            poisson_ks_p: poisson.p_value,
            histogram,
        });
    }

    let mut set = OutputSet::new(ctx, "spacing");
    set.write("spacings.csv", csv.bytes())?;
    set.write_json("spacing_report.json", &reports)?;
    set.note("mu_hi", ctx.config.mu_hi);
    set.finish(s.params_hash)?;
    Ok(())
}

pub fn cmd_tightbinding(ctx: &mut RunContext, max_states: usize) -> Result<(), AppError> {
    ensure_dir(&ctx.out_dir)?;
    let (s, _u, d) = ctx.floquet()?;
    let base = tightbinding::build_base(&s, &ctx.params)?;

    // interior retained states, nearest the bottom of the spectrum first
    let mut states: Vec<usize> = d
        .retained_states()
        .into_iter()
        .filter(|&r| d.n_max_global(r) < d.dim / 3)
        .collect();
    states.sort_by_key(|&r| d.n_max_global(r));
    states.truncate(max_states);
    if states.is_empty() {
        return Err(AppError::new(
            ErrorClass::InsufficientData,
            "no interior retained states to certify",
        ));
    }

    let mut csv = Csv::new(
        &meta_for(ctx, "tightbinding"),
        &["r", "omega", "residual", "excluded_sites", "reliable"],
    );
    for &r in &states {
        let rep = tightbinding::state_residual_with_base(&d, r, &s, &ctx.params, &base)?;
        csv.row(&[
            r.to_string(),
            fmt_f64(d.states[r].omega),
            fmt_f64(rep.value),
            rep.excluded_sites.to_string(),
            (rep.reliable as u8).to_string(),
        ]);
    }

    let mut wcsv = Csv::new(&meta_for(ctx, "tightbinding"), &["n", "w_n"]);
    for (n, w) in base.w_coeffs.iter().take(65).enumerate() {
        wcsv.row(&[n.to_string(), fmt_f64(*w)]);
    }

    let mut set = OutputSet::new(ctx, "tightbinding");
    set.write("tb_residuals.csv", csv.bytes())?;
    set.write("tb_wcoeffs.csv", wcsv.bytes())?;
    set.note("site_order", format!("{:?}", base.site_order));
    set.note("omega_convention", "lattice ω = (2π − floquet ω) mod 2π");
    set.note("states_certified", states.len() as u64);
    set.finish(s.params_hash)?;
    Ok(())
}

pub fn cmd_classical(
    ctx: &mut RunContext,
    trajectories: Option<usize>,
    steps: Option<usize>,
    p_max: Option<f64>,
    grid: Option<usize>,
) -> Result<(), AppError> {
    ensure_dir(&ctx.out_dir)?;
    let trajectories = trajectories.unwrap_or(ctx.config.classical_trajectories);
    let steps = steps.unwrap_or(ctx.config.classical_steps);
    let p_max = p_max.unwrap_or(ctx.config.classical_p_max);
    let grid = grid.unwrap_or(32).max(32);

    let ensemble = stratified_ensemble(ctx.seed, trajectories, p_max);
    let cloud = stroboscopic_section(&ensemble, &ctx.params, steps)?;
    let coverage = coverage_fraction(&cloud, grid, grid, p_max);

    let mut meta = meta_for(ctx, "classical");
    meta.push(("trajectories", trajectories.to_string()));
    meta.push(("steps", steps.to_string()));
    meta.push(("p_max", fmt_f64(p_max)));
    let mut csv = Csv::new(&meta, &["theta", "p", "trajectory", "step"]);
    for (i, &(theta, p)) in cloud.points.iter().enumerate() {
        let (traj, step) = cloud.id_of(i);
        csv.row(&[fmt_f64(theta), fmt_f64(p), traj.to_string(), step.to_string()]);
    }

    #[derive(Serialize)]
    struct ClassicalManifest {
        seed: u64,
        trajectories: usize,
        steps: usize,
        p_max: f64,
        grid: usize,
        coverage_fraction: f64,
        ensemble: &'static str,
    }
    let mut set = OutputSet::new(ctx, "classical");
    set.write("section.csv", csv.bytes())?;
    set.write_json(
        "section_summary.json",
        &ClassicalManifest {
            seed: ctx.seed,
            trajectories,
            steps,
            p_max,
            grid,
            coverage_fraction: coverage,
            ensemble: "stratified momentum strata with seeded jitter, seeded-uniform angles",
        },
    )?;
    set.finish(kwell_core::basis::params_hash(
        ctx.params.v0,
        ctx.params.b,
        ctx.params.hbar,
        ctx.truncation.l_max(),
    ))?;
    Ok(())
}
