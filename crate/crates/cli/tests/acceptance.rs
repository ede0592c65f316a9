//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with the measured numbers (run with `--nocapture` to see them for passing
//! tests). Criteria 1–7, 9 and 11 pass at desk scale; the Brody/KS-rejection
//! legs of criterion 8 and the coverage leg of criterion 10 measure real
//! desk-scale physics that falls short of the stated thresholds — those
//! asserts fail with the measured values in the message rather than being
//! weakened.

use std::sync::OnceLock;
use std::time::Instant;

use kwell_core::basis::{solve_unperturbed, BasisTruncation, Parity, UnperturbedSpectrum};
use kwell_core::classical::{
    coverage_fraction, free_flight, kick_update, period_map, stratified_ensemble,
    stroboscopic_section, ClassicalState,
};
use kwell_core::floquet::{
    apply, build_floquet, diagonalize_floquet, EvolvedState, FloquetDecomposition, FloquetMatrix,
};
use kwell_core::localization::{
    classify_mu, default_exponential_window, default_powerlaw_window, detect_crossover,
    fit_exponential, fit_powerlaw, matrix_element_decay, participation_ratio, shift_and_average,
    DecayProfile, MatrixDecayCurve, Side,
};
use kwell_core::model::{reduce_angle, ModelParams};
use kwell_core::rng::SplitMix64;
use kwell_core::spectral::{brody_fit, extract_spacings, ks_vs_poisson, SpacingStats};
use kwell_core::tightbinding;
use kwell_core::TWO_PI;

const PI: f64 = std::f64::consts::PI;
const B: f64 = 1.4 * PI;

struct Fixture {
    params: ModelParams,
    spectrum: UnperturbedSpectrum,
    matrix: FloquetMatrix,
    decomposition: FloquetDecomposition,
    build_seconds: f64,
}

fn build_fixture(k: f64, v0: f64, hbar: f64, l_max: usize) -> Fixture {
    let start = Instant::now();
    let params = ModelParams::new(k, v0, B, hbar).unwrap();
    let truncation = BasisTruncation::new(l_max).unwrap();
    let spectrum = solve_unperturbed(&params, &truncation).unwrap();
    let matrix = build_floquet(&spectrum, &params).unwrap();
    let decomposition = diagonalize_floquet(&matrix).unwrap();
    Fixture {
        params,
        spectrum,
        matrix,
        decomposition,
        build_seconds: start.elapsed().as_secs_f64(),
    }
}

fn fx_k425_v5000() -> &'static Fixture {
    static FX: OnceLock<Fixture> = OnceLock::new();
    FX.get_or_init(|| build_fixture(4.25, 5000.0, 1.0, 500))
}

fn fx_k025_v5000() -> &'static Fixture {
    static FX: OnceLock<Fixture> = OnceLock::new();
    FX.get_or_init(|| build_fixture(0.25, 5000.0, 1.0, 500))
}

fn fx_kr_v0() -> &'static Fixture {
    static FX: OnceLock<Fixture> = OnceLock::new();
    FX.get_or_init(|| build_fixture(4.25, 0.0, 1.0, 500))
}

fn fx_kr_v05() -> &'static Fixture {
    static FX: OnceLock<Fixture> = OnceLock::new();
    FX.get_or_init(|| build_fixture(4.25, 0.5, 1.0, 500))
}

/// Criterion 8 scale: V0 = 1e5, dim ≈ 2001. ħ_s = 2 keeps the μ>10 class
/// reachable inside the truncation; k = 8.5 keeps the reference kick phase
/// k/ħ_s = 4.25 of the strong-kick runs.
fn fx_spacing() -> &'static Fixture {
    static FX: OnceLock<Fixture> = OnceLock::new();
    FX.get_or_init(|| build_fixture(8.5, 1.0e5, 2.0, 1000))
}

fn retained_profile(fx: &Fixture) -> DecayProfile {
    let retained = fx.decomposition.retained_states();
    shift_and_average(&fx.decomposition, |r| retained.contains(&r), Side::Symmetrized).unwrap()
}

fn mean(vals: &[f64]) -> f64 {
    vals.iter().sum::<f64>() / vals.len() as f64
}

// ---------------------------------------------------------------- criterion 1

#[test]
fn criterion_01_unitarity_and_flat_spectrum() {
    let fx = fx_k425_v5000();
    let defect = fx.matrix.unitarity_defect;
    let modulus = fx.decomposition.max_modulus_defect;

    let retained = fx.decomposition.retained_states();
    let bins = 32usize;
    let mut counts = vec![0usize; bins];
    for &r in &retained {
        let w = fx.decomposition.states[r].omega;
        counts[(((w / TWO_PI) * bins as f64) as usize).min(bins - 1)] += 1;
    }
    let expected = retained.len() as f64 / bins as f64;
    let chi2: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    // 99th percentile of chi-square with 31 degrees of freedom
    let chi2_crit = 52.191;

    println!(
        "criterion 1: {} — unitarity defect {defect:.2e} (< 1e-6), eigenvalue modulus defect \
         {modulus:.2e} (< 1e-8), eigenphase χ² {chi2:.1} (< {chi2_crit}), build {:.1} s (< 300)",
        if defect < 1e-6 && modulus < 1e-8 && chi2 < chi2_crit && fx.build_seconds < 300.0 {
            "PASS"
        } else {
            "FAIL"
        },
        fx.build_seconds,
    );
    assert!(defect < 1e-6, "retained-block unitarity defect {defect:.3e}");
    assert!(modulus < 1e-8, "eigenvalue modulus defect {modulus:.3e}");
    assert!(chi2 < chi2_crit, "eigenphase density not flat: χ² = {chi2:.1}");
    assert!(fx.build_seconds < 300.0, "build took {:.1} s", fx.build_seconds);
}

// ---------------------------------------------------------------- criterion 2

#[test]
fn criterion_02_k_zero_oracle() {
    let params = ModelParams::new(0.0, 37.0, B, 1.0).unwrap();
    let t = BasisTruncation::new(64).unwrap();
    let s = solve_unperturbed(&params, &t).unwrap();
    let u = build_floquet(&s, &params).unwrap();

    let mut worst = 0.0_f64;
    for n in 0..u.dim {
        for m in 0..u.dim {
            let want = if n == m {
                let phase = -s.energies[n] / params.hbar;
                num_complex::Complex64::new(phase.cos(), phase.sin())
            } else {
                num_complex::Complex64::new(0.0, 0.0)
            };
            worst = worst.max((u.entry(n, m) - want).norm());
        }
    }

    let d = diagonalize_floquet(&u).unwrap();
    let mut worst_delta = 0.0_f64;
    for r in 0..d.len() {
        let dens = d.density(r);
        let peak = d.n_max_global(r);
        worst_delta = worst_delta.max((dens[peak] - 1.0).abs());
    }

    println!(
        "criterion 2: {} — |U − diag(e^(−iE/ħ))| = {worst:.2e} (< 1e-12), basis-delta defect \
         {worst_delta:.2e}",
        if worst < 1e-12 && worst_delta < 1e-12 { "PASS" } else { "FAIL" }
    );
    assert!(worst < 1e-12, "k = 0 operator deviates: {worst:.3e}");
    assert!(worst_delta < 1e-12, "k = 0 states are not basis deltas: {worst_delta:.3e}");
}

// ---------------------------------------------------------------- criterion 3

#[test]
fn criterion_03_kr_limit_localization() {
    let izrailev = 4.25_f64 * 4.25 / 2.0; // k²/2ħ² = 9.03

    let mut lines = Vec::new();
    let mut ok = true;
    for (label, fx) in [("V0=0", fx_kr_v0()), ("V0=0.5", fx_kr_v05())] {
        let prof = retained_profile(fx);
        let fit = fit_exponential(&prof, default_exponential_window(&prof)).unwrap();
        let prs = participation_ratio(&fx.decomposition);
        let retained = fx.decomposition.retained_states();
        let pr = mean(&retained.iter().map(|&r| prs[r]).collect::<Vec<_>>());

        let ell_ok = fit.parameter >= izrailev / 2.0 && fit.parameter <= izrailev * 2.0;
        let pr_ok = (pr - 0.11).abs() <= 0.5 * 0.11;
        ok &= ell_ok && pr_ok;
        lines.push(format!(
            "{label}: ℓ = {:.2} (within 2× of {izrailev:.2}: {ell_ok}), mean PR = {pr:.4} \
             (0.11 ± 50%: {pr_ok})",
            fit.parameter
        ));
    }
    println!("criterion 3: {} — {}", if ok { "PASS" } else { "FAIL" }, lines.join("; "));
    assert!(ok, "{}", lines.join("; "));
}

// ---------------------------------------------------------------- criterion 4

/// Power-law fit of the amplitude profile √⟨|c_v|²⟩ on per-bin medians of a
/// 6-per-decade geometric binning (robust against the above-barrier
/// resonance spikes; decay exponents follow the amplitude convention of the
/// matrix-element average M_m = ⟨|U_nm|⟩).
fn binned_amplitude_powerlaw(prof: &DecayProfile) -> (f64, f64) {
    let hi = prof.max_usable_offset();
    let lo = (hi / 100.0).max(1.0);
    let per_decade = 6.0;
    let lg_lo = lo.log10();
    let nbins = ((hi.log10() - lg_lo) * per_decade).ceil() as usize;
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for b in 0..nbins {
        let b_lo = 10f64.powf(lg_lo + b as f64 / per_decade);
        let b_hi = 10f64.powf(lg_lo + (b + 1) as f64 / per_decade);
        let mut sel: Vec<f64> = prof
            .offsets
            .iter()
            .zip(&prof.density)
            .filter(|(&v, &d)| (v as f64) >= b_lo && (v as f64) < b_hi && d > 1e-300)
            .map(|(_, &d)| d.sqrt())
            .collect();
        if sel.is_empty() {
            continue;
        }
        sel.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.push(((b_lo * b_hi).sqrt().ln(), sel[sel.len() / 2].ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let ss_res: f64 = pts
        .iter()
        .map(|p| {
            let e = p.1 - (my + slope * (p.0 - mx));
            e * e
        })
        .sum();
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    (-slope, 1.0 - ss_res / ss_tot)
}

#[test]
fn criterion_04_kriw_power_law() {
    let fx = fx_k025_v5000();
    let prof = retained_profile(fx);
    let (gamma, quality) = binned_amplitude_powerlaw(&prof);
    let ok = (gamma - 2.5).abs() <= 0.5 && quality > 0.95;
    println!(
        "criterion 4: {} — amplitude power-law γ = {gamma:.2} (2.5 ± 0.5), log-log R² = \
         {quality:.3} (> 0.95)",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!((gamma - 2.5).abs() <= 0.5, "γ = {gamma:.3}");
    assert!(quality > 0.95, "R² = {quality:.3}");
}

// ---------------------------------------------------------------- criterion 5

/// n_c of a decay curve: the detected breakpoint, or the single-law limit
/// (0 for power-law-everywhere, curve length for exponential-everywhere).
fn effective_n_c(curve: &MatrixDecayCurve) -> (usize, &'static str) {
    if let Some(cross) = detect_crossover(curve) {
        return (cross.n_c, "crossover");
    }
    let prof = DecayProfile {
        side: Side::Positive,
        offsets: curve.offsets.iter().map(|&m| m as i64).collect(),
        density: curve.values.clone(),
        contributors: vec![1; curve.values.len()],
        count: 1,
    };
    let hi = prof.max_usable_offset();
    let pow = fit_powerlaw(&prof, (1.0, hi)).map(|f| f.quality).unwrap_or(0.0);
    let exp = fit_exponential(&prof, (1.0, hi)).map(|f| f.quality).unwrap_or(0.0);
    if pow >= exp {
        (0, "power-law everywhere")
    } else {
        (curve.offsets.len(), "exponential everywhere")
    }
}

#[test]
fn criterion_05_matrix_element_crossover() {
    let strong = matrix_element_decay(&fx_k425_v5000().matrix);
    let weak = matrix_element_decay(&fx_k025_v5000().matrix);

    let cross = detect_crossover(&strong).expect("no crossover at k = 4.25");
    let gamma = cross.tail.parameter;
    let (n_c_weak, weak_kind) = effective_n_c(&weak);

    let ok = (gamma - 2.7).abs() <= 0.4 && cross.n_c > n_c_weak;
    println!(
        "criterion 5: {} — k=4.25 crossover n_c = {} (head R² {:.2}, tail γ = {gamma:.2} ∈ 2.7 ± \
         0.4); k=0.25: {weak_kind}, n_c = {n_c_weak}; n_c(4.25) > n_c(0.25): {}",
        if ok { "PASS" } else { "FAIL" },
        cross.n_c,
        cross.head.quality,
        cross.n_c > n_c_weak,
    );
    assert!((gamma - 2.7).abs() <= 0.4, "tail exponent {gamma:.3}");
    assert!(cross.n_c > n_c_weak, "n_c ordering: {} vs {n_c_weak}", cross.n_c);
}

// ---------------------------------------------------------------- criterion 6

fn mu_subsets(fx: &Fixture) -> (Vec<usize>, Vec<usize>) {
    let d = &fx.decomposition;
    let mus = classify_mu(d, &fx.spectrum, &fx.params, 10.0);
    let retained = d.retained_states();
    let interior = (0.8 * d.dim as f64) as usize;
    let below: Vec<usize> = retained.iter().copied().filter(|&r| mus[r].mu <= 1.0).collect();
    let above: Vec<usize> = (0..d.len())
        .filter(|&r| mus[r].mu > 10.0 && d.n_max_global(r) < interior)
        .collect();
    (below, above)
}

#[test]
fn criterion_06_mu_resolved_profiles() {
    let fx = fx_k425_v5000();
    let (below, above) = mu_subsets(fx);
    let prof_b =
        shift_and_average(&fx.decomposition, |r| below.contains(&r), Side::Symmetrized).unwrap();
    let prof_a =
        shift_and_average(&fx.decomposition, |r| above.contains(&r), Side::Symmetrized).unwrap();

    // each law on its spec-default window
    let b_pow = fit_powerlaw(&prof_b, default_powerlaw_window(&prof_b)).unwrap();
    let b_exp = fit_exponential(&prof_b, default_exponential_window(&prof_b)).unwrap();
    let a_pow = fit_powerlaw(&prof_a, default_powerlaw_window(&prof_a)).unwrap();
    let a_exp = fit_exponential(&prof_a, default_exponential_window(&prof_a)).unwrap();

    let margin_b = b_pow.quality - b_exp.quality;
    let margin_a = a_exp.quality - a_pow.quality;

    // KR-limit comparison of the exponential length
    let prof_kr = retained_profile(fx_kr_v0());
    let ell_kr = fit_exponential(&prof_kr, default_exponential_window(&prof_kr)).unwrap();
    let ratio = a_exp.parameter / ell_kr.parameter;

    let ok = margin_b >= 0.02 && margin_a >= 0.02 && ratio >= 1.0 / 1.3 && ratio <= 1.3;
    println!(
        "criterion 6: {} — μ≤1 ({} states): power beats exponential by {margin_b:.3}; μ>10 \
         ({} states): exponential beats power by {margin_a:.3}; μ>10 length {:.2} vs V0=0 \
         {:.2} (ratio {ratio:.2} within 30%)",
        if ok { "PASS" } else { "FAIL" },
        below.len(),
        above.len(),
        a_exp.parameter,
        ell_kr.parameter,
    );
    assert!(margin_b >= 0.02, "μ≤1 power-law margin {margin_b:.3}");
    assert!(margin_a >= 0.02, "μ>10 exponential margin {margin_a:.3}");
    assert!(
        ratio >= 1.0 / 1.3 && ratio <= 1.3,
        "ℓ(μ>10) = {:.2} vs ℓ(V0=0) = {:.2}",
        a_exp.parameter,
        ell_kr.parameter
    );
}

// ---------------------------------------------------------------- criterion 7

#[test]
fn criterion_07_participation_ratio_step() {
    let fx = fx_k425_v5000();
    let d = &fx.decomposition;
    let v0 = fx.params.v0;
    let mus = classify_mu(d, &fx.spectrum, &fx.params, 10.0);
    let prs = participation_ratio(d);
    let retained = d.retained_states();

    let below: Vec<f64> =
        retained.iter().copied().filter(|&r| mus[r].mu <= 1.0).map(|r| prs[r]).collect();
    let above: Vec<f64> =
        retained.iter().copied().filter(|&r| mus[r].mu > 1.0).map(|r| prs[r]).collect();
    let mean_below = mean(&below);
    let mean_above = mean(&above);

    // sliding-window mean of PR vs E_max; the step is where it first drops
    // below the midpoint of the two plateaus
    let mut recs: Vec<(f64, f64)> =
        retained.iter().map(|&r| (mus[r].e_max, prs[r])).collect();
    recs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let lo_plateau =
        mean(&recs.iter().filter(|(e, _)| *e < 0.5 * v0).map(|&(_, p)| p).collect::<Vec<_>>());
    let hi_plateau =
        mean(&recs.iter().filter(|(e, _)| *e > 2.0 * v0).map(|&(_, p)| p).collect::<Vec<_>>());
    let midpoint = 0.5 * (lo_plateau + hi_plateau);
    let window = 31;
    let mut crossing = None;
    for i in 0..recs.len().saturating_sub(window) {
        let m = mean(&recs[i..i + window].iter().map(|&(_, p)| p).collect::<Vec<_>>());
        if m < midpoint {
            crossing = Some(recs[i + window / 2].0);
            break;
        }
    }
    let crossing = crossing.expect("no PR step found");
    let within = (crossing - v0).abs() <= 0.1 * v0;

    let ok = mean_below > mean_above && within;
    println!(
        "criterion 7: {} — mean PR: μ≤1 {mean_below:.3} > μ>1 {mean_above:.3}; step at E_max = \
         {crossing:.0} (V0 = {v0:.0} ± 10%: {within})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(mean_below > mean_above);
    assert!(within, "PR step at {crossing:.0}, want within 10% of {v0:.0}");
}

// ---------------------------------------------------------------- criterion 8

#[test]
fn criterion_08_spacing_dichotomy() {
    // Brody fitter self-test on synthetic samples
    let mut rng = SplitMix64::new(2024);
    let poisson: Vec<f64> = (0..2000).map(|_| -(1.0 - rng.next_f64()).ln()).collect();
    let wigner: Vec<f64> = (0..2000)
        .map(|_| (-(4.0 / PI) * (1.0 - rng.next_f64()).ln()).sqrt())
        .collect();
    let fit_p = brody_fit(&SpacingStats::from_raw(poisson, Parity::Even).unwrap()).unwrap();
    let fit_w = brody_fit(&SpacingStats::from_raw(wigner, Parity::Even).unwrap()).unwrap();
    let self_ok = fit_p.alpha.abs() <= 0.1 && (fit_w.alpha - 1.0).abs() <= 0.1;

    let fx = fx_spacing();
    let d = &fx.decomposition;
    let mus = classify_mu(d, &fx.spectrum, &fx.params, 10.0);
    let retained = d.retained_states();
    let interior = (0.8 * d.dim as f64) as usize;

    let mut failures: Vec<String> = Vec::new();
    let mut report = vec![format!(
        "synthetic Brody self-test α̂(Poisson) = {:.3}, α̂(Wigner) = {:.3}: {}",
        fit_p.alpha,
        fit_w.alpha,
        if self_ok { "ok" } else { "FAIL" }
    )];
    if !self_ok {
        failures.push("Brody self-test".into());
    }

    for parity in [Parity::Even, Parity::Odd] {
        let below: Vec<usize> = retained
            .iter()
            .copied()
            .filter(|&r| d.states[r].parity == parity && mus[r].mu <= 1.0)
            .collect();
        let above: Vec<usize> = (0..d.len())
            .filter(|&r| {
                d.states[r].parity == parity
                    && mus[r].mu > 10.0
                    && d.n_max_global(r) < interior
            })
            .collect();

        let stats_b = extract_spacings(d, parity, |r| below.contains(&r)).unwrap();
        let brody_b = brody_fit(&stats_b).unwrap();
        let ks_b = ks_vs_poisson(&stats_b);
        let stats_a = extract_spacings(d, parity, |r| above.contains(&r)).unwrap();
        let ks_a = ks_vs_poisson(&stats_a);

        report.push(format!(
            "{parity} μ≤1 ({} levels): α = {:.3} ± {:.3} (want ≥ 0.5), KS-vs-Poisson p = {:.3} \
             (want < 0.01); μ>10 ({} levels): p = {:.3} (want ≥ 0.01)",
            below.len(),
            brody_b.alpha,
            brody_b.alpha_std,
            ks_b.p_value,
            above.len(),
            ks_a.p_value
        ));
        if brody_b.alpha < 0.5 {
            failures.push(format!("{parity} μ≤1 Brody α = {:.3} < 0.5", brody_b.alpha));
        }
        if ks_b.p_value >= 0.01 {
            failures.push(format!("{parity} μ≤1 KS does not reject Poisson (p = {:.3})", ks_b.p_value));
        }
        if ks_a.p_value < 0.01 {
            failures.push(format!("{parity} μ>10 KS rejects Poisson (p = {:.3})", ks_a.p_value));
        }
    }

    println!(
        "criterion 8: {} — {}",
        if failures.is_empty() { "PASS" } else { "FAIL" },
        report.join(" | ")
    );
    assert!(
        failures.is_empty(),
        "desk-scale spacing dichotomy falls short of the stated thresholds: {}",
        failures.join("; ")
    );
}

// ---------------------------------------------------------------- criterion 9

#[test]
fn criterion_09_tight_binding_identity() {
    let fx = fx_k025_v5000();
    let d = &fx.decomposition;
    let base = tightbinding::build_base(&fx.spectrum, &fx.params).unwrap();

    let mut states: Vec<usize> = d
        .retained_states()
        .into_iter()
        .filter(|&r| d.n_max_global(r) < d.dim / 3)
        .collect();
    states.sort_by_key(|&r| d.n_max_global(r));
    states.truncate(10);
    assert!(states.len() >= 8, "only {} interior states", states.len());

    let mut worst = 0.0_f64;
    let mut worst_excluded = 0.0_f64;
    for &r in &states {
        let rep =
            tightbinding::state_residual_with_base(d, r, &fx.spectrum, &fx.params, &base).unwrap();
        worst = worst.max(rep.value);
        worst_excluded =
            worst_excluded.max(rep.excluded_sites as f64 / rep.total_sites as f64);
        assert!(rep.reliable, "state {r}: unreliable residual");
    }

    // KR-limit reduction: exact Toeplitz hopping on the momentum lattice
    let kr = ModelParams::new(0.25, 0.0, B, 1.0).unwrap();
    let t = BasisTruncation::new(40).unwrap();
    let kr_spectrum = solve_unperturbed(&kr, &t).unwrap();
    let (w, _, order) = tightbinding::hopping_matrix(&kr_spectrum, &kr).unwrap();
    assert_eq!(order, tightbinding::SiteOrder::MomentumLattice);
    let mut toeplitz_defect = 0.0_f64;
    for i in 0..w.rows() - 1 {
        for j in 0..w.cols() - 1 {
            toeplitz_defect = toeplitz_defect.max((w.at(i, j) - w.at(i + 1, j + 1)).abs());
        }
    }

    let ok = worst < 1e-4 && worst_excluded < 0.05 && toeplitz_defect < 1e-12;
    println!(
        "criterion 9: {} — lattice-equation residual ≤ {worst:.2e} over {} interior states (< 1e-4), \
         excluded-site fraction ≤ {worst_excluded:.3} (< 0.05), V0=0 Toeplitz defect \
         {toeplitz_defect:.2e} (< 1e-12)",
        if ok { "PASS" } else { "FAIL" },
        states.len(),
    );
    assert!(worst < 1e-4, "residual {worst:.3e}");
    assert!(worst_excluded < 0.05);
    assert!(toeplitz_defect < 1e-12);
}

// --------------------------------------------------------------- criterion 10

#[test]
fn criterion_10_classical_chaos() {
    let mut failures: Vec<String> = Vec::new();

    // standard-map equivalence at V0 = 0 over 1e6 random states
    let kr = ModelParams::new(4.25, 0.0, B, 1.0).unwrap();
    let mut rng = SplitMix64::new(77);
    let mut worst_map = 0.0_f64;
    for _ in 0..1_000_000 {
        let theta = TWO_PI * rng.next_f64();
        let p = 400.0 * (rng.next_f64() - 0.5);
        let out = period_map(&ClassicalState::new(theta, p), &kr).unwrap();
        let p_want = p + 4.25 * theta.sin();
        let t_want = reduce_angle(theta + p_want);
        let dp = (out.p - p_want).abs();
        let mut dt = (out.theta - t_want).abs();
        dt = dt.min(TWO_PI - dt);
        worst_map = worst_map.max(dp.max(dt));
    }
    if worst_map >= 1e-12 {
        failures.push(format!("standard-map deviation {worst_map:.2e}"));
    }

    // per-flight energy conservation in the well system
    let well = ModelParams::new(0.25, 5000.0, B, 1.0).unwrap();
    let mut worst_energy = 0.0_f64;
    for _ in 0..500 {
        let s = ClassicalState::new(TWO_PI * rng.next_f64(), 300.0 * (rng.next_f64() - 0.5));
        let kicked = kick_update(&s, &well);
        let e0 = kicked.energy(&well);
        let after = free_flight(&kicked, &well).unwrap();
        worst_energy = worst_energy.max((after.energy(&well) - e0).abs());
    }
    if worst_energy >= 1e-10 {
        failures.push(format!("flight energy drift {worst_energy:.2e}"));
    }

    // coverage of the deep-well weak-kick section vs the standard-map calibration
    let ensemble = stratified_ensemble(12345, 20, 150.0);
    let cloud_std = stroboscopic_section(&ensemble, &kr, 5000).unwrap();
    let cov_std = coverage_fraction(&cloud_std, 32, 32, 150.0);
    let cloud_well = stroboscopic_section(&ensemble, &well, 5000).unwrap();
    let cov_well = coverage_fraction(&cloud_well, 32, 32, 150.0);
    let threshold = cov_std - 0.10;
    if cov_well < threshold {
        failures.push(format!(
            "coverage {cov_well:.3} below calibrated threshold {threshold:.3} (standard map \
             {cov_std:.3})"
        ));
    }

    println!(
        "criterion 10: {} — standard-map equivalence {worst_map:.1e} (< 1e-12), energy \
         conservation {worst_energy:.1e} (< 1e-10), coverage well {cov_well:.3} vs threshold \
         {threshold:.3}",
        if failures.is_empty() { "PASS" } else { "FAIL" }
    );
    assert!(
        failures.is_empty(),
        "classical chaos criterion falls short: {}",
        failures.join("; ")
    );
}

// --------------------------------------------------------------- criterion 11

#[test]
fn criterion_11_deterministic_outputs() {
    let bin = env!("CARGO_BIN_EXE_kwell");
    let root = std::env::temp_dir().join(format!("kwell-accept-det-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&root);
    std::fs::create_dir_all(&root).unwrap();
    let config = root.join("run.conf");
    std::fs::write(
        &config,
        "k = 1.1\nV0 = 60.0\nb_over_pi = 1.4\nhbar_s = 1.0\nbasis_l_max = 48\n",
    )
    .unwrap();

    let run = |out: &std::path::Path| {
        for sub in [
            vec!["floquet", "--dump-states"],
            vec!["profiles"],
            vec!["melements"],
            vec!["pr"],
            vec!["classical", "--trajectories", "10", "--steps", "200", "--p-max", "30"],
        ] {
            let status = std::process::Command::new(bin)
                .arg("--config")
                .arg(&config)
                .arg("--out")
                .arg(out)
                .arg("--seed")
                .arg("9")
                .args(&sub)
                .env("SOURCE_DATE_EPOCH", "1700000000")
                .status()
                .unwrap();
            assert!(status.success(), "{sub:?} failed");
        }
    };
    let out_a = root.join("a");
    let out_b = root.join("b");
    run(&out_a);
    run(&out_b);

    let mut compared = 0usize;
    let mut diffs: Vec<String> = Vec::new();
    for entry in std::fs::read_dir(&out_a).unwrap() {
        let entry = entry.unwrap();
        if entry.path().is_dir() {
            continue; // cache directory layout is checked elsewhere
        }
        let name = entry.file_name();
        let a = std::fs::read(entry.path()).unwrap();
        let b = std::fs::read(out_b.join(&name)).unwrap();
        compared += 1;
        if a != b {
            diffs.push(name.to_string_lossy().into_owned());
        }
    }
    assert!(compared >= 10, "only {compared} files compared");
    println!(
        "criterion 11: {} — {compared} output files byte-identical across two runs{}",
        if diffs.is_empty() { "PASS" } else { "FAIL" },
        if diffs.is_empty() { String::new() } else { format!(" (differ: {diffs:?})") }
    );
    assert!(diffs.is_empty(), "files differ: {diffs:?}");
    let _ = std::fs::remove_dir_all(&root);
}
