//! Quasi-energy spacing statistics: parity-resolved circular spacings,
//! Brody-distribution fitting by maximum likelihood, and Kolmogorov–Smirnov
//! comparisons against Poisson.
//!
//! Floquet eigenphases live on a circle with constant density, so no
//! unfolding is performed; the wrap-around gap is included and the spacing
//! count equals the phase count.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::basis::Parity;
use crate::floquet::FloquetDecomposition;
use crate::fmath;
use crate::special::ln_gamma;
use crate::TWO_PI;

#[derive(Debug, Clone, PartialEq)]
pub enum SpectralError {
    TooFewLevels { got: usize, need: usize },
    TooFewBins { got: usize },
    EmptySample,
}

impl fmt::Display for SpectralError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralError::TooFewLevels { got, need } => {
                write!(f, "{got} eigenphases after filtering; need at least {need}")
            }
            SpectralError::TooFewBins { got } => write!(f, "{got} bins; need at least 8"),
            SpectralError::EmptySample => write!(f, "empty spacing sample"),
        }
    }
}

impl core::error::Error for SpectralError {}

/// Nearest-neighbor spacings of one parity class, normalized to unit mean and
/// sorted ascending.
#[derive(Debug, Clone)]
pub struct SpacingStats {
    pub spacings: Vec<f64>,
    /// Eigenphase count that produced the spacings.
    pub source_count: usize,
    pub parity_class: Parity,
}

impl SpacingStats {
    /// Normalize raw spacings to unit mean and sort; scale information is
    /// deliberately discarded.
    pub fn from_raw(mut raw: Vec<f64>, parity_class: Parity) -> Result<Self, SpectralError> {
        if raw.is_empty() {
            return Err(SpectralError::EmptySample);
        }
        let mean: f64 = raw.iter().sum::<f64>() / raw.len() as f64;
        for s in raw.iter_mut() {
            *s /= mean;
        }
        raw.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        Ok(Self { source_count: raw.len(), spacings: raw, parity_class })
    }

    pub fn mean(&self) -> f64 {
        self.spacings.iter().sum::<f64>() / self.spacings.len() as f64
    }
}

/// Circular nearest-neighbor gaps of a set of phases on `[0, 2π)`, including
/// the wrap-around gap; the count equals the phase count.
pub fn circular_spacings(phases: &[f64]) -> Vec<f64> {
    let mut sorted: Vec<f64> = phases.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    let n = sorted.len();
    let mut out = Vec::with_capacity(n);
    for i in 1..n {
        out.push(sorted[i] - sorted[i - 1]);
    }
    if n > 0 {
        out.push(sorted[0] + TWO_PI - sorted[n - 1]);
    }
    out
}

/// Extract the spacing statistics of one parity class, restricted by the
/// caller's state filter (retention policy, μ window). The subset's own mean
/// spacing defines the normalization.
pub fn extract_spacings(
    d: &FloquetDecomposition,
    parity: Parity,
    mut filter: impl FnMut(usize) -> bool,
) -> Result<SpacingStats, SpectralError> {
    let phases: Vec<f64> = (0..d.len())
        .filter(|&r| d.states[r].parity == parity && filter(r))
        .map(|r| d.states[r].omega)
        .collect();
    if phases.len() < 50 {
        return Err(SpectralError::TooFewLevels { got: phases.len(), need: 50 });
    }
    let count = phases.len();
    let mut stats = SpacingStats::from_raw(circular_spacings(&phases), parity)?;
    stats.source_count = count;
    Ok(stats)
}

/// Unit-mean Brody scale factor `a(α) = Γ((2+α)/(1+α))^{1+α}`.
pub fn brody_a(alpha: f64) -> f64 {
    let g = fmath::exp(ln_gamma((2.0 + alpha) / (1.0 + alpha)));
    fmath::powf(g, 1.0 + alpha)
}

/// Unit-mean Brody density `P(s) = (1+α) a s^α exp(−a s^{1+α})`; Poisson at
/// α = 0, the Wigner surmise at α = 1.
pub fn brody_pdf(s: f64, alpha: f64) -> f64 {
    if s < 0.0 {
        return 0.0;
    }
    let a = brody_a(alpha);
    (1.0 + alpha) * a * fmath::powf(s, alpha) * fmath::exp(-a * fmath::powf(s, 1.0 + alpha))
}

/// CDF of the unit-mean Brody density: `F(s) = 1 − exp(−a s^{1+α})`.
pub fn brody_cdf(s: f64, alpha: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    1.0 - fmath::exp(-brody_a(alpha) * fmath::powf(s, 1.0 + alpha))
}

/// Two-sided Kolmogorov–Smirnov comparison of a sample against a CDF.
#[derive(Debug, Clone, Copy)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
}

/// Kolmogorov distribution tail `Q(z)` (CERN TMath::KolmogorovProb branch
/// structure).
fn kolmogorov_q(z: f64) -> f64 {
    if z < 0.2 {
        1.0
    } else if z < 0.755 {
        const W: f64 = 2.506_628_274_631_000_5;
        const C1: f64 = -1.233_700_550_136_169_7;
        const C2: f64 = -11.103_304_951_225_528;
        const C3: f64 = -30.842_513_753_404_244;
        let v = 1.0 / (z * z);
        1.0 - W * (fmath::exp(C1 * v) + fmath::exp(C2 * v) + fmath::exp(C3 * v)) / z
    } else if z < 6.8116 {
        let v = z * z;
        let mut r = [0.0_f64; 4];
        let max_j = (3.0 / z).max(1.0) as usize;
        for (j, rj) in r.iter_mut().enumerate().take(max_j.min(4)) {
            *rj = fmath::exp(-2.0 * ((j + 1) * (j + 1)) as f64 * v);
        }
        2.0 * (r[0] - r[1] + r[2] - r[3])
    } else {
        0.0
    }
}

/// KS test of an ascending sample against `cdf`, with Stephens' small-sample
/// correction on the test statistic.
pub fn ks_test(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> KsTest {
    let n = sorted.len();
    assert!(n > 0);
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        let f = cdf(s);
        let hi = (i + 1) as f64 / nf - f;
        let lo = f - i as f64 / nf;
        d = d.max(hi).max(lo);
    }
    let z = d * (fmath::sqrt(nf) + 0.12 + 0.11 / fmath::sqrt(nf));
    KsTest { statistic: d, p_value: kolmogorov_q(z) }
}

/// KS test against the Poisson spacing law `P(S) = e^{−S}`.
pub fn ks_vs_poisson(stats: &SpacingStats) -> KsTest {
    ks_test(&stats.spacings, |s| 1.0 - fmath::exp(-s))
}

/// Maximum-likelihood Brody fit over α ∈ [0, 1].
#[derive(Debug, Clone)]
pub struct BrodyFit {
    pub alpha: f64,
    /// Curvature-based standard error of α̂ (infinite when the likelihood is
    /// flat or the maximum sits on the boundary).
    pub alpha_std: f64,
    pub log_likelihood: f64,
    /// KS quality of the sample against the fitted Brody CDF.
    pub ks_fitted: KsTest,
}

fn brody_log_likelihood(spacings: &[f64], alpha: f64) -> f64 {
    let a = brody_a(alpha);
    let n = spacings.len() as f64;
    let mut sum_ln = 0.0;
    let mut sum_pow = 0.0;
    for &s in spacings {
        let s = s.max(1e-15);
        sum_ln += fmath::ln(s);
        sum_pow += fmath::powf(s, 1.0 + alpha);
    }
    n * fmath::ln(1.0 + alpha) + n * fmath::ln(a) + alpha * sum_ln - a * sum_pow
}

/// Histogram-independent MLE of the Brody parameter, with a KS check against
/// the fitted distribution.
pub fn brody_fit(stats: &SpacingStats) -> Result<BrodyFit, SpectralError> {
    if stats.spacings.len() < 50 {
        return Err(SpectralError::TooFewLevels { got: stats.spacings.len(), need: 50 });
    }
    let f = |alpha: f64| brody_log_likelihood(&stats.spacings, alpha);

    // golden-section maximization on [0, 1]
    let phi = (fmath::sqrt(5.0) - 1.0) / 2.0;
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..70 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let alpha = 0.5 * (lo + hi);
    let ll = f(alpha);

    let h = 1e-4;
    let (am, ap) = ((alpha - h).max(0.0), (alpha + h).min(1.0));
    let second = (f(ap) - 2.0 * ll + f(am)) / ((0.5 * (ap - am)) * (0.5 * (ap - am)));
    let alpha_std = if second < 0.0 { 1.0 / fmath::sqrt(-second) } else { f64::INFINITY };

    let ks_fitted = ks_test(&stats.spacings, |s| brody_cdf(s, alpha));
    Ok(BrodyFit { alpha, alpha_std, log_likelihood: ll, ks_fitted })
}

/// Unit-area spacing histogram over `[0, s_max]`.
#[derive(Debug, Clone)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn area(&self) -> f64 {
        self.density
            .iter()
            .enumerate()
            .map(|(i, d)| d * (self.edges[i + 1] - self.edges[i]))
            .sum()
    }
}

pub fn spacing_histogram(stats: &SpacingStats, bins: usize) -> Result<Histogram, SpectralError> {
    if bins < 8 {
        return Err(SpectralError::TooFewBins { got: bins });
    }
    let n = stats.spacings.len();
    if n == 0 {
        return Err(SpectralError::EmptySample);
    }
    let s_max = *stats.spacings.last().unwrap();
    let s_max = if s_max > 0.0 { s_max } else { 1.0 };
    let width = s_max / bins as f64;
    let mut counts = vec![0usize; bins];
    for &s in &stats.spacings {
        let mut b = (s / width) as usize;
        if b >= bins {
            b = bins - 1;
        }
        counts[b] += 1;
    }
    let edges: Vec<f64> = (0..=bins).map(|i| i as f64 * width).collect();
    let density: Vec<f64> = counts.iter().map(|&c| c as f64 / (n as f64 * width)).collect();
    Ok(Histogram { edges, counts, density })
}
