//! Eigenstate-profile analyses: shifted-and-averaged decay profiles with
//! exponential/power-law fits, Floquet matrix-element decay with crossover
//! detection, the `μ = E_max/V0` classification and participation ratios.
//!
//! Floquet states carry definite parity, so over the energy-ordered basis
//! their density is exactly zero on opposite-parity slots wherever the level
//! ordering alternates strictly (everywhere below the barrier). Averaged
//! profiles therefore contain structural zeros; the fit routines skip
//! below-floor densities inside the window and only error out when too few
//! usable points remain.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::basis::UnperturbedSpectrum;
use crate::floquet::{FloquetDecomposition, FloquetMatrix};
use crate::fmath;
use crate::model::ModelParams;

/// Densities at or below this are treated as structurally empty.
const DENSITY_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub enum LocError {
    /// The state filter selected nothing.
    EmptyFilter,
    /// Too few usable (positive-density) points in the fit window.
    InsufficientPoints { usable: usize },
    /// The fitted slope does not describe a decay.
    NoDecay { slope: f64 },
    /// V0 = 0: μ undefined.
    MuUndefined,
}

impl fmt::Display for LocError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocError::EmptyFilter => write!(f, "state filter selected no states"),
            LocError::InsufficientPoints { usable } => {
                write!(f, "only {usable} usable points in fit window (need 3)")
            }
            LocError::NoDecay { slope } => {
                write!(f, "fitted slope {slope} is not a decay")
            }
            LocError::MuUndefined => write!(f, "μ = E_max/V0 is undefined at V0 = 0"),
        }
    }
}

impl core::error::Error for LocError {}

/// Which side of the peak a profile describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Positive,
    Negative,
    /// Averaged over ±v (the default).
    Symmetrized,
}

/// Shifted-and-averaged probability profile `⟨|c_v|²⟩`, `v = n − n_max`.
#[derive(Debug, Clone)]
pub struct DecayProfile {
    pub side: Side,
    /// Ascending offsets; magnitudes for `Symmetrized`.
    pub offsets: Vec<i64>,
    pub density: Vec<f64>,
    /// States contributing at each offset (window-edge normalization).
    pub contributors: Vec<u32>,
    /// Number of states averaged.
    pub count: usize,
}

impl DecayProfile {
    /// Largest distance with density above the structural floor.
    pub fn max_usable_offset(&self) -> f64 {
        self.offsets
            .iter()
            .zip(&self.density)
            .filter(|(_, &d)| d > DENSITY_FLOOR)
            .fold(0.0, |m: f64, (&v, _)| m.max(fmath::abs(v as f64)))
    }
}

/// Average the per-state densities after shifting each state by its peak.
///
/// States contribute to an offset only where the shifted window overlaps the
/// basis; densities are divided by the per-offset contributor count.
pub fn shift_and_average(
    d: &FloquetDecomposition,
    mut filter: impl FnMut(usize) -> bool,
    side: Side,
) -> Result<DecayProfile, LocError> {
    let dim = d.dim as i64;
    let selected: Vec<usize> = (0..d.len()).filter(|&r| filter(r)).collect();
    if selected.is_empty() {
        return Err(LocError::EmptyFilter);
    }

    match side {
        Side::Symmetrized => {
            let v_max = (dim - 1) as usize;
            let mut sum = vec![0.0; v_max + 1];
            let mut cnt = vec![0u32; v_max + 1];
            for &r in &selected {
                let dens = d.density(r);
                let n_max = d.n_max_global(r) as i64;
                for v in 0..=v_max as i64 {
                    let mut here = false;
                    let mut acc = 0.0;
                    let plus = n_max + v;
                    if plus < dim {
                        acc += dens[plus as usize];
                        here = true;
                    }
                    if v > 0 {
                        let minus = n_max - v;
                        if minus >= 0 {
                            acc += dens[minus as usize];
                            here = true;
                        }
                    }
                    if here {
                        // count each available side separately so a one-sided
                        // window does not halve the tail
                        let sides = (plus < dim) as u32 + (v > 0 && n_max - v >= 0) as u32;
                        sum[v as usize] += acc;
                        cnt[v as usize] += sides;
                    }
                }
            }
            let mut offsets = Vec::new();
            let mut density = Vec::new();
            let mut contributors = Vec::new();
            for v in 0..=v_max {
                if cnt[v] > 0 {
                    offsets.push(v as i64);
                    density.push(sum[v] / cnt[v] as f64);
                    contributors.push(cnt[v]);
                }
            }
            Ok(DecayProfile { side, offsets, density, contributors, count: selected.len() })
        }
        Side::Positive | Side::Negative => {
            let sign: i64 = if side == Side::Positive { 1 } else { -1 };
            let v_max = (dim - 1) as usize;
            let mut sum = vec![0.0; v_max + 1];
            let mut cnt = vec![0u32; v_max + 1];
            for &r in &selected {
                let dens = d.density(r);
                let n_max = d.n_max_global(r) as i64;
                for v in 0..=v_max as i64 {
                    let n = n_max + sign * v;
                    if n >= 0 && n < dim {
                        sum[v as usize] += dens[n as usize];
                        cnt[v as usize] += 1;
                    }
                }
            }
            let mut offsets = Vec::new();
            let mut density = Vec::new();
            let mut contributors = Vec::new();
            for v in 0..=v_max {
                if cnt[v] > 0 {
                    offsets.push(sign * v as i64);
                    density.push(sum[v] / cnt[v] as f64);
                    contributors.push(cnt[v]);
                }
            }
            if side == Side::Negative {
                offsets.reverse();
                density.reverse();
                contributors.reverse();
            }
            Ok(DecayProfile { side, offsets, density, contributors, count: selected.len() })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitKind {
    Exponential,
    PowerLaw,
}

impl fmt::Display for FitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitKind::Exponential => write!(f, "exponential"),
            FitKind::PowerLaw => write!(f, "powerlaw"),
        }
    }
}

/// Least-squares fit of a decay law on the appropriate log scale.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub kind: FitKind,
    /// Localization length ℓ (exponential) or exponent γ (power law).
    pub parameter: f64,
    pub window: (f64, f64),
    /// Coefficient of determination on the fit scale.
    pub quality: f64,
    /// Usable points that entered the fit.
    pub points: usize,
}

fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in pts {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (x, y) in pts {
        let e = y - (intercept + slope * x);
        ss_res += e * e;
        ss_tot += (y - my) * (y - my);
    }
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 0.0 };
    (slope, intercept, r2, ss_res)
}

/// Parity-suppressed offsets (the structural checkerboard of definite-parity
/// states over the interleaved basis) are dropped when one offset class is
/// geometrically much richer than the other.
fn drop_suppressed_class(pts: Vec<(f64, f64, f64)>) -> Vec<(f64, f64)> {
    const LOG_RATIO: f64 = 1.0986; // ln 3
    let (mut even, mut odd): (Vec<_>, Vec<_>) = (Vec::new(), Vec::new());
    for &(v, dist, d) in &pts {
        if (v as i64).rem_euclid(2) == 0 {
            even.push((dist, d));
        } else {
            odd.push((dist, d));
        }
    }
    if even.len() >= 3 && odd.len() >= 3 {
        let mean_lg = |c: &[(f64, f64)]| {
            c.iter().map(|&(_, d)| fmath::ln(d)).sum::<f64>() / c.len() as f64
        };
        let (le, lo) = (mean_lg(&even), mean_lg(&odd));
        if le - lo > LOG_RATIO {
            return even;
        }
        if lo - le > LOG_RATIO {
            return odd;
        }
    }
    pts.into_iter().map(|(_, dist, d)| (dist, d)).collect()
}

fn fit_on_scale(
    prof: &DecayProfile,
    window: (f64, f64),
    kind: FitKind,
) -> Result<(FitResult, f64), LocError> {
    let lo = if kind == FitKind::PowerLaw { window.0.max(1.0) } else { window.0 };
    let raw: Vec<(f64, f64, f64)> = prof
        .offsets
        .iter()
        .zip(&prof.density)
        .filter_map(|(&v, &d)| {
            let dist = fmath::abs(v as f64);
            (dist >= lo && dist <= window.1 && d > DENSITY_FLOOR)
                .then_some((v as f64, dist, d))
        })
        .collect();
    let pts: Vec<(f64, f64)> = drop_suppressed_class(raw)
        .into_iter()
        .map(|(dist, d)| match kind {
            FitKind::Exponential => (dist, fmath::ln(d)),
            FitKind::PowerLaw => (fmath::ln(dist.max(1e-12)), fmath::ln(d)),
        })
        .collect();
    if pts.len() < 3 {
        return Err(LocError::InsufficientPoints { usable: pts.len() });
    }
    let (slope, _icept, r2, sse) = linear_fit(&pts);
    if slope >= 0.0 {
        return Err(LocError::NoDecay { slope });
    }
    let parameter = match kind {
        FitKind::Exponential => -1.0 / slope,
        FitKind::PowerLaw => -slope,
    };
    Ok((
        FitResult { kind, parameter, window: (lo, window.1), quality: r2, points: pts.len() },
        sse,
    ))
}

/// Fit `P(v) ~ exp(−v/ℓ)` on `(v, log ρ)`; returns ℓ and the log-space R².
pub fn fit_exponential(prof: &DecayProfile, window: (f64, f64)) -> Result<FitResult, LocError> {
    fit_on_scale(prof, window, FitKind::Exponential).map(|(f, _)| f)
}

/// Fit `P(v) ~ v^{−γ}` on `(log v, log ρ)`; returns γ and the log-log R².
pub fn fit_powerlaw(prof: &DecayProfile, window: (f64, f64)) -> Result<FitResult, LocError> {
    fit_on_scale(prof, window, FitKind::PowerLaw).map(|(f, _)| f)
}

/// Default exponential window `[1, 3ℓ̂]`, one iteration from a first-pass
/// slope over the near tail.
pub fn default_exponential_window(prof: &DecayProfile) -> (f64, f64) {
    let v_max = prof.max_usable_offset();
    if v_max < 4.0 {
        return (1.0, v_max.max(1.0));
    }
    match fit_exponential(prof, (1.0, v_max)) {
        Ok(first) => {
            let hi = (3.0 * first.parameter).clamp(4.0, v_max);
            (1.0, hi)
        }
        Err(_) => (1.0, v_max),
    }
}

/// Default power-law window: the last two available decades.
pub fn default_powerlaw_window(prof: &DecayProfile) -> (f64, f64) {
    let v_max = prof.max_usable_offset();
    ((v_max / 100.0).max(1.0), v_max.max(1.0))
}

/// Averaged magnitude of the Floquet matrix elements at fixed offset,
/// `M_m = ⟨|U_{n,n+m}|⟩_n`, restricted to the retained block.
#[derive(Debug, Clone)]
pub struct MatrixDecayCurve {
    pub offsets: Vec<usize>,
    pub values: Vec<f64>,
}

impl MatrixDecayCurve {
    fn as_profile(&self) -> DecayProfile {
        DecayProfile {
            side: Side::Positive,
            offsets: self.offsets.iter().map(|&m| m as i64).collect(),
            density: self.values.clone(),
            contributors: vec![1; self.values.len()],
            count: 1,
        }
    }
}

pub fn matrix_element_decay(u: &FloquetMatrix) -> MatrixDecayCurve {
    let cutoff = u.retained_cutoff;
    let m_max = (u.dim / 2).min(cutoff.saturating_sub(1));
    let mut offsets = Vec::with_capacity(m_max);
    let mut values = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        let count = cutoff - m;
        let mut acc = 0.0;
        for n in 0..count {
            acc += u.abs_entry(n, n + m);
        }
        offsets.push(m);
        values.push(acc / count as f64);
    }
    MatrixDecayCurve { offsets, values }
}

/// Exponential-head / power-law-tail crossover.
#[derive(Debug, Clone)]
pub struct Crossover {
    pub n_c: usize,
    pub head: FitResult,
    pub tail: FitResult,
}

/// Two-segment fit (exponential head, power-law tail) over all breakpoints,
/// minimizing the summed misfit of the two segments. The head start is also
/// scanned a short distance past the curve maximum so the kick's oscillatory
/// Bessel bump at small offsets does not poison the head fit. `None` when the
/// curve spans less than two decades or either segment fails its 0.9 quality
/// gate; each law must additionally beat the competing law on its own
/// segment, so single-law curves report no crossover.
pub fn detect_crossover(curve: &MatrixDecayCurve) -> Option<Crossover> {
    let prof = curve.as_profile();
    let m_max_f = prof.max_usable_offset();
    if m_max_f < 100.0 {
        return None;
    }
    let m_max = m_max_f as usize;
    let argmax = curve
        .offsets
        .iter()
        .zip(&curve.values)
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(core::cmp::Ordering::Equal))
        .map(|(&m, _)| m)
        .unwrap_or(1);
    let h0_hi = (argmax + 10).min(m_max / 12);
    let mb_hi = m_max / 10;
    let mut best: Option<(f64, usize, Crossover)> = None;
    for h0 in argmax..=h0_hi.max(argmax) {
        for m_b in (h0 + 4)..=mb_hi {
            let head = fit_on_scale(&prof, (h0 as f64, m_b as f64), FitKind::Exponential);
            let tail = fit_on_scale(&prof, (m_b as f64 + 1.0, m_max_f), FitKind::PowerLaw);
            if let (Ok((head, _)), Ok((tail, _))) = (head, tail) {
                if head.points < 4 || tail.points < 4 {
                    continue;
                }
                let misfit = (1.0 - head.quality) + (1.0 - tail.quality);
                if best.as_ref().map_or(true, |(s, _, _)| misfit < *s) {
                    best = Some((misfit, h0, Crossover { n_c: m_b, head, tail }));
                }
            }
        }
    }
    let (_, h0, cross) = best?;
    if cross.head.quality < 0.9 || cross.tail.quality < 0.9 {
        return None;
    }
    // each segment must beat the competing law on its own window
    let head_pow = fit_on_scale(&prof, (h0 as f64, cross.n_c as f64), FitKind::PowerLaw);
    if let Ok((alt, _)) = head_pow {
        if alt.quality >= cross.head.quality - 0.01 {
            return None;
        }
    }
    let tail_exp = fit_on_scale(&prof, (cross.n_c as f64 + 1.0, m_max_f), FitKind::Exponential);
    if let Ok((alt, _)) = tail_exp {
        if alt.quality >= cross.tail.quality - 0.01 {
            return None;
        }
    }
    Some(cross)
}

/// Localization regime of a Floquet state relative to the barrier height.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// μ ≤ 1: confined below the barrier.
    Below,
    Intermediate,
    /// μ > μ_hi: far above the barrier, KR-like.
    FarAbove,
    /// V0 = 0.
    Undefined,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::Below => write!(f, "below"),
            Regime::Intermediate => write!(f, "intermediate"),
            Regime::FarAbove => write!(f, "far_above"),
            Regime::Undefined => write!(f, "undefined"),
        }
    }
}

/// Energy scale of one Floquet state: the unperturbed energy of its dominant
/// basis state and the ratio μ = E_max/V0.
#[derive(Debug, Clone)]
pub struct MuRecord {
    pub state_index: usize,
    pub e_max: f64,
    pub mu: f64,
    pub regime: Regime,
}

/// Classify every Floquet state by μ = E_max/V0. `mu_hi` operationalizes the
/// "μ ≫ 1" regime (10 by default in the CLI).
pub fn classify_mu(
    d: &FloquetDecomposition,
    spectrum: &UnperturbedSpectrum,
    p: &ModelParams,
    mu_hi: f64,
) -> Vec<MuRecord> {
    (0..d.len())
        .map(|r| {
            let n_max = d.n_max_global(r);
            let e_max = spectrum.energies[n_max];
            if p.v0 == 0.0 {
                MuRecord { state_index: r, e_max, mu: f64::INFINITY, regime: Regime::Undefined }
            } else {
                let mu = e_max / p.v0;
                let regime = if mu <= 1.0 {
                    Regime::Below
                } else if mu > mu_hi {
                    Regime::FarAbove
                } else {
                    Regime::Intermediate
                };
                MuRecord { state_index: r, e_max, mu, regime }
            }
        })
        .collect()
}

/// Participation ratio `P_r = Σ_n |c_rn|⁴` per state (the inverse-participation
/// convention: 1 for a basis delta, 1/N for a uniform state).
pub fn participation_ratio(d: &FloquetDecomposition) -> Vec<f64> {
    (0..d.len())
        .map(|r| d.states[r].q.iter().map(|&v| v * v * v * v).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Parity;
    use crate::floquet::{FloquetState, SectorMap};

    /// Hand-built decomposition: `dim` slots, even slots `0,2,4,…`, odd slots
    /// `1,3,5,…`, states given as (parity, block-local q).
    fn fake_decomposition(dim: usize, specs: Vec<(Parity, Vec<f64>)>) -> FloquetDecomposition {
        let even: Vec<usize> = (0..dim).step_by(2).collect();
        let odd: Vec<usize> = (1..dim).step_by(2).collect();
        let even_energies: Vec<f64> = even.iter().map(|&g| g as f64).collect();
        let odd_energies: Vec<f64> = odd.iter().map(|&g| g as f64).collect();
        let states = specs
            .into_iter()
            .map(|(parity, q)| FloquetState { omega: 0.0, parity, converged: true, q })
            .collect();
        FloquetDecomposition {
            dim,
            hbar: 1.0,
            retained_cutoff: dim,
            tail_cutoff: dim,
            even: SectorMap { global_indices: even, energies: even_energies },
            odd: SectorMap { global_indices: odd, energies: odd_energies },
            states,
            max_modulus_defect: 0.0,
        }
    }

    fn synthetic_profile(f: impl Fn(f64) -> f64, v_max: i64) -> DecayProfile {
        let offsets: Vec<i64> = (0..=v_max).collect();
        let density: Vec<f64> = offsets.iter().map(|&v| f(v as f64)).collect();
        let contributors = vec![1; offsets.len()];
        DecayProfile { side: Side::Symmetrized, offsets, density, contributors, count: 1 }
    }

    #[test]
    fn delta_state_profile() {
        let mut q = vec![0.0; 5];
        q[2] = 1.0;
        let d = fake_decomposition(9, vec![(Parity::Even, q)]);
        let prof = shift_and_average(&d, |_| true, Side::Symmetrized).unwrap();
        assert_eq!(prof.count, 1);
        assert!((prof.density[0] - 1.0).abs() < 1e-15);
        assert!(prof.density[1..].iter().all(|&d| d == 0.0));
    }

    #[test]
    fn empty_filter_errors() {
        let d = fake_decomposition(5, vec![(Parity::Even, vec![1.0, 0.0, 0.0])]);
        assert!(matches!(
            shift_and_average(&d, |_| false, Side::Symmetrized),
            Err(LocError::EmptyFilter)
        ));
    }

    #[test]
    fn one_sided_profiles_mirror_an_asymmetric_state() {
        // state peaked at global slot 4 with weight spilling to slot 6 only:
        // the positive side sees it, the negative side must not
        let q = vec![0.0, 0.0, 0.8, (1.0_f64 - 0.64).sqrt(), 0.0];
        let d = fake_decomposition(9, vec![(Parity::Even, q)]);
        let pos = shift_and_average(&d, |_| true, Side::Positive).unwrap();
        let neg = shift_and_average(&d, |_| true, Side::Negative).unwrap();
        let at = |prof: &DecayProfile, v: i64| -> f64 {
            let i = prof.offsets.iter().position(|&o| o == v).unwrap();
            prof.density[i]
        };
        assert!((at(&pos, 0) - 0.64).abs() < 1e-15);
        assert!((at(&pos, 2) - 0.36).abs() < 1e-15);
        assert_eq!(at(&pos, 1), 0.0);
        assert!((at(&neg, 0) - 0.64).abs() < 1e-15);
        assert_eq!(at(&neg, -2), 0.0);
        // negative offsets ascend and the window only reaches down to slot 0
        assert_eq!(*neg.offsets.first().unwrap(), -4);
        assert_eq!(*neg.offsets.last().unwrap(), 0);
    }

    #[test]
    fn averaging_is_permutation_invariant() {
        let s1 = (Parity::Even, vec![0.8, 0.6, 0.0]);
        let s2 = (Parity::Odd, vec![0.6, 0.8]);
        let d_a = fake_decomposition(5, vec![s1.clone(), s2.clone()]);
        let d_b = fake_decomposition(5, vec![s2, s1]);
        let pa = shift_and_average(&d_a, |_| true, Side::Symmetrized).unwrap();
        let pb = shift_and_average(&d_b, |_| true, Side::Symmetrized).unwrap();
        assert_eq!(pa.offsets, pb.offsets);
        for (x, y) in pa.density.iter().zip(&pb.density) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn exponential_fit_recovers_length() {
        let prof = synthetic_profile(|v| (-v / 7.0).exp(), 200);
        let fit = fit_exponential(&prof, (1.0, 150.0)).unwrap();
        assert!((fit.parameter - 7.0).abs() < 0.01, "ℓ = {}", fit.parameter);
        assert!(fit.quality > 0.999999);

        // power law fitted as exponential over two decades is poor
        let pl = synthetic_profile(|v| if v < 5.0 { 0.0 } else { v.powf(-2.5) }, 500);
        let bad = fit_exponential(&pl, (5.0, 500.0)).unwrap();
        assert!(bad.quality < 0.98, "R² = {}", bad.quality);
    }

    #[test]
    fn powerlaw_fit_recovers_exponent() {
        let prof = synthetic_profile(|v| if v < 1.0 { 1.0 } else { v.powf(-2.5) }, 500);
        let fit = fit_powerlaw(&prof, (1.0, 500.0)).unwrap();
        assert!((fit.parameter - 2.5).abs() < 0.01, "γ = {}", fit.parameter);
        assert!(fit.quality > 0.999999);

        let ex = synthetic_profile(|v| (-v / 7.0).exp(), 200);
        let bad = fit_powerlaw(&ex, (2.0, 200.0)).unwrap();
        assert!(bad.quality < 0.98, "R² = {}", bad.quality);
    }

    #[test]
    fn fits_are_scale_invariant() {
        let prof = synthetic_profile(|v| (-v / 11.0).exp(), 150);
        let mut scaled = prof.clone();
        for d in scaled.density.iter_mut() {
            *d *= 37.5;
        }
        let a = fit_exponential(&prof, (1.0, 100.0)).unwrap();
        let b = fit_exponential(&scaled, (1.0, 100.0)).unwrap();
        assert!((a.parameter - b.parameter).abs() < 1e-12);

        let pl = synthetic_profile(|v| if v < 1.0 { 1.0 } else { v.powf(-1.8) }, 300);
        let mut pl_scaled = pl.clone();
        for d in pl_scaled.density.iter_mut() {
            *d *= 0.003;
        }
        let a = fit_powerlaw(&pl, (2.0, 300.0)).unwrap();
        let b = fit_powerlaw(&pl_scaled, (2.0, 300.0)).unwrap();
        assert!((a.parameter - b.parameter).abs() < 1e-12);
    }

    #[test]
    fn fit_error_paths() {
        let zero = synthetic_profile(|_| 0.0, 50);
        assert!(matches!(
            fit_exponential(&zero, (1.0, 50.0)),
            Err(LocError::InsufficientPoints { .. })
        ));
        let rising = synthetic_profile(|v| (v / 5.0).exp(), 50);
        assert!(matches!(
            fit_exponential(&rising, (1.0, 50.0)),
            Err(LocError::NoDecay { .. })
        ));
    }

    fn synthetic_curve(f: impl Fn(f64) -> f64, m_max: usize) -> MatrixDecayCurve {
        let offsets: Vec<usize> = (1..=m_max).collect();
        let values = offsets.iter().map(|&m| f(m as f64)).collect();
        MatrixDecayCurve { offsets, values }
    }

    #[test]
    fn crossover_found_on_piecewise_curve() {
        let break_at: f64 = 40.0;
        let ell: f64 = 8.0;
        let gamma: f64 = 2.7;
        let c = (-break_at / ell).exp() * break_at.powf(gamma);
        let curve = synthetic_curve(
            |m| if m <= break_at { (-m / ell).exp() } else { c * m.powf(-gamma) },
            800,
        );
        let cross = detect_crossover(&curve).expect("crossover expected");
        assert!(
            (cross.n_c as f64 - break_at).abs() <= 2.0,
            "n_c = {} vs {break_at}",
            cross.n_c
        );
        assert!((cross.tail.parameter - gamma).abs() < 0.1);
        assert!((cross.head.parameter - ell).abs() < 0.8);
    }

    #[test]
    fn crossover_absent_on_single_laws() {
        let pure_exp = synthetic_curve(|m| (-m / 20.0).exp(), 800);
        assert!(detect_crossover(&pure_exp).is_none(), "pure exponential");
        let pure_pow = synthetic_curve(|m| m.powf(-2.7), 800);
        assert!(detect_crossover(&pure_pow).is_none(), "pure power law");
    }

    #[test]
    fn crossover_requires_two_decades() {
        let curve = synthetic_curve(|m| (-m / 5.0).exp(), 60);
        assert!(detect_crossover(&curve).is_none());
    }

    #[test]
    fn participation_ratio_limits() {
        let n = 8;
        let mut delta = vec![0.0; n];
        delta[3] = 1.0;
        let uniform = vec![1.0 / (n as f64).sqrt(); n];
        let d = fake_decomposition(
            2 * n,
            vec![(Parity::Even, delta), (Parity::Even, uniform)],
        );
        let pr = participation_ratio(&d);
        assert!((pr[0] - 1.0).abs() < 1e-12);
        assert!((pr[1] - 1.0 / n as f64).abs() < 1e-12);
        for &p in &pr {
            assert!(p >= 1.0 / (2 * n) as f64 - 1e-12 && p <= 1.0 + 1e-12);
        }
    }
}
