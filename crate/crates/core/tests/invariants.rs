//! Cross-module invariants at moderate scale: quantum-vs-classical energy
//! growth, parity selection rules, gauge invariance of the observables, and
//! the k = 0 reductions that tie the modules together.

use kwell_core::basis::{solve_unperturbed, BasisTruncation, Parity};
use kwell_core::classical::{period_map, ClassicalState};
use kwell_core::floquet::{
    apply, build_floquet, diagonalize_floquet, mean_energy, EvolvedState,
};
use kwell_core::localization::{classify_mu, matrix_element_decay, participation_ratio};
use kwell_core::model::ModelParams;
use kwell_core::rng::SplitMix64;
use kwell_core::spectral::{circular_spacings, SpacingStats};
use kwell_core::TWO_PI;

const PI: f64 = std::f64::consts::PI;

#[test]
fn dynamical_localization_beats_classical_diffusion() {
    // KR limit: the quantum mean energy saturates after a break time while
    // the classical ensemble keeps heating linearly
    let p = ModelParams::new(4.25, 0.0, 1.4 * PI, 1.0).unwrap();
    let t = BasisTruncation::new(200).unwrap();
    let s = solve_unperturbed(&p, &t).unwrap();
    let u = build_floquet(&s, &p).unwrap();

    let start = EvolvedState::basis_state(u.dim, 0); // ground state, E = 0
    let steps = 300;
    let mut state = start;
    let mut e_quantum = Vec::with_capacity(steps);
    for _ in 0..steps {
        state = apply(&u, &state);
        e_quantum.push(mean_energy(&state, &s));
    }

    let mut rng = SplitMix64::new(31);
    let ensemble: Vec<ClassicalState> =
        (0..400).map(|_| ClassicalState::new(TWO_PI * rng.next_f64(), 0.0)).collect();
    let mut cls = ensemble;
    let mut e_classical = 0.0;
    for _ in 0..steps {
        for c in cls.iter_mut() {
            *c = period_map(c, &p).unwrap();
        }
        e_classical = cls.iter().map(|c| c.energy(&p)).sum::<f64>() / cls.len() as f64;
    }

    let late = e_quantum[steps - 1];
    let mid = e_quantum[steps / 3];
    assert!(
        late < 0.5 * e_classical,
        "no localization: E_q = {late:.1} vs E_cl = {e_classical:.1}"
    );
    // saturation: late-time energy within a factor 2 of the mid-run value
    assert!(late < 2.0 * mid, "still heating: {mid:.1} -> {late:.1}");
}

#[test]
fn parity_blocks_never_couple() {
    let p = ModelParams::new(0.6, 80.0, 1.4 * PI, 1.0).unwrap();
    let t = BasisTruncation::new(48).unwrap();
    let s = solve_unperturbed(&p, &t).unwrap();
    let u = build_floquet(&s, &p).unwrap();
    for n in 0..u.dim {
        for m in 0..u.dim {
            if s.parities[n] != s.parities[m] {
                assert_eq!(u.entry(n, m).norm(), 0.0, "({n},{m}) couples parities");
            }
        }
    }
}

#[test]
fn observables_are_gauge_invariant() {
    // flipping any eigenvector's sign (the only phase freedom of the real
    // eigenpath) leaves densities, PR, μ records and spacings unchanged
    let p = ModelParams::new(0.5, 40.0, 1.4 * PI, 1.0).unwrap();
    let t = BasisTruncation::new(40).unwrap();
    let s = solve_unperturbed(&p, &t).unwrap();
    let u = build_floquet(&s, &p).unwrap();
    let d = diagonalize_floquet(&u).unwrap();

    let mut flipped = d.clone();
    let mut rng = SplitMix64::new(5);
    for st in flipped.states.iter_mut() {
        if rng.next_f64() < 0.5 {
            for q in st.q.iter_mut() {
                *q = -*q;
            }
        }
    }

    let pr_a = participation_ratio(&d);
    let pr_b = participation_ratio(&flipped);
    for (a, b) in pr_a.iter().zip(&pr_b) {
        assert_eq!(a, b);
    }
    for r in 0..d.len() {
        assert_eq!(d.density(r), flipped.density(r));
    }
    let mus_a = classify_mu(&d, &s, &p, 10.0);
    let mus_b = classify_mu(&flipped, &s, &p, 10.0);
    for (a, b) in mus_a.iter().zip(&mus_b) {
        assert_eq!(a.e_max, b.e_max);
    }
}

#[test]
fn k_zero_reductions() {
    let p = ModelParams::new(0.0, 25.0, 1.4 * PI, 1.0).unwrap();
    let t = BasisTruncation::new(32).unwrap();
    let s = solve_unperturbed(&p, &t).unwrap();
    let u = build_floquet(&s, &p).unwrap();
    let d = diagonalize_floquet(&u).unwrap();

    // diagonal operator: no off-diagonal matrix-element weight at any offset
    let curve = matrix_element_decay(&u);
    assert!(curve.values.iter().all(|&v| v == 0.0));

    // every Floquet state is a basis state, so E_max = E_r exactly
    let mus = classify_mu(&d, &s, &p, 10.0);
    for record in &mus {
        let r = record.state_index;
        let n = d.n_max_global(r);
        assert_eq!(record.e_max, s.energies[n]);
        let dens = d.density(r);
        assert!((dens[n] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn single_state_profile_carries_unit_mass() {
    use kwell_core::localization::{shift_and_average, Side};
    let p = ModelParams::new(0.8, 30.0, 1.4 * PI, 1.0).unwrap();
    let t = BasisTruncation::new(36).unwrap();
    let s = solve_unperturbed(&p, &t).unwrap();
    let u = build_floquet(&s, &p).unwrap();
    let d = diagonalize_floquet(&u).unwrap();
    for r in [0usize, 7, 20] {
        let prof = shift_and_average(&d, |x| x == r, Side::Symmetrized).unwrap();
        let mass: f64 = prof
            .density
            .iter()
            .zip(&prof.contributors)
            .map(|(&dn, &c)| dn * c as f64)
            .sum();
        assert!((mass - 1.0).abs() < 1e-8, "state {r} mass {mass}");
    }
}

#[test]
fn shallow_well_section_matches_standard_map_chaos() {
    // V0 = 0.5 under a strong kick: the barrier is a tiny perturbation and
    // the stroboscopic section covers the window like the standard map's
    use kwell_core::classical::{coverage_fraction, stratified_ensemble, stroboscopic_section};
    let kr = ModelParams::new(4.25, 0.0, 1.4 * PI, 1.0).unwrap();
    let shallow = ModelParams::new(4.25, 0.5, 1.4 * PI, 1.0).unwrap();
    let ensemble = stratified_ensemble(99, 20, 150.0);
    let cov_kr = coverage_fraction(
        &stroboscopic_section(&ensemble, &kr, 2000).unwrap(),
        32,
        32,
        150.0,
    );
    let cov_shallow = coverage_fraction(
        &stroboscopic_section(&ensemble, &shallow, 2000).unwrap(),
        32,
        32,
        150.0,
    );
    assert!(cov_kr > 0.95, "standard map coverage {cov_kr}");
    assert!(
        (cov_shallow - cov_kr).abs() < 0.05,
        "shallow well {cov_shallow} vs standard map {cov_kr}"
    );
}

#[test]
fn spacing_invariants_on_synthetic_circles() {
    // merging two rigid sequences halves the mean gap but normalization
    // restores unit mean; count equals phase count on the circle
    let phases_a: Vec<f64> = (0..64).map(|i| TWO_PI * i as f64 / 64.0).collect();
    let spacings = circular_spacings(&phases_a);
    assert_eq!(spacings.len(), 64);
    let stats = SpacingStats::from_raw(spacings, Parity::Even).unwrap();
    assert!((stats.mean() - 1.0).abs() < 1e-12);
}
