//! Tight-binding rewriting of the Floquet eigenproblem: `W(θ) = −tan(V(θ)/2ħ)`
//! and its Fourier coefficients, on-site energies `T_m = tan((ω − E_m/ħ)/2)`,
//! the hopping matrix `W_ml`, and a numerical residual certifying the lattice
//! equation against computed Floquet states.
//!
//! The construction is only bounded for kick phases `k/ħ_s < π` (the tangent
//! hits a pole otherwise); stronger kicks are refused. On-site tangent poles
//! are guarded site-by-site: affected sites are excluded from residuals and
//! counted.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::basis::{Parity, UnperturbedSpectrum};
use crate::floquet::FloquetDecomposition;
use crate::fmath;
use crate::linalg::RMat;
use crate::model::ModelParams;
use crate::TWO_PI;

/// Pole guard on tangent arguments, in radians.
const POLE_GUARD: f64 = 1e-6;
/// Quadrature grid for `W_n`; `W` is analytic for `k/ħ < π` so the trapezoid
/// rule converges spectrally.
const QUAD_POINTS: usize = 8192;
/// Residuals with more than this fraction of pole-excluded sites are flagged.
const EXCLUDED_LIMIT: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub enum TbError {
    /// `k/ħ_s ≥ π`: `W(θ)` is unbounded and the mapping is only formal.
    SingularRegime { kick_phase: f64 },
    /// A tangent argument came within the guard of a pole.
    NearPole { argument: f64 },
}

impl fmt::Display for TbError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TbError::SingularRegime { kick_phase } => {
                write!(f, "kick phase k/ħ = {kick_phase} ≥ π: W(θ) is singular")
            }
            TbError::NearPole { argument } => {
                write!(f, "tangent argument {argument} within {POLE_GUARD} of a pole")
            }
        }
    }
}

impl core::error::Error for TbError {}

fn check_regular(p: &ModelParams) -> Result<(), TbError> {
    let z = p.kick_phase();
    if z >= core::f64::consts::PI {
        return Err(TbError::SingularRegime { kick_phase: z });
    }
    Ok(())
}

/// Distance of `x` to the nearest tangent pole `π/2 + kπ`.
fn pole_distance(x: f64) -> f64 {
    let period = core::f64::consts::PI;
    let r = x % period;
    let r = if r < 0.0 { r + period } else { r };
    fmath::abs(r - period / 2.0)
}

/// `W(θ) = −tan(k cosθ / 2ħ)`, the kick factor in tangent form.
pub fn w_theta(p: &ModelParams, theta: f64) -> Result<f64, TbError> {
    let arg = 0.5 * p.kick_phase() * fmath::cos(theta);
    if pole_distance(arg) < POLE_GUARD {
        return Err(TbError::NearPole { argument: arg });
    }
    Ok(-fmath::tan(arg))
}

/// Fourier coefficients `W_n = (1/2π)∫ W(θ) e^{−inθ} dθ` for `n = 0..=n_max`.
/// `W` is real and even, so the coefficients are real and symmetric.
pub fn w_fourier(p: &ModelParams, n_max: usize) -> Result<Vec<f64>, TbError> {
    check_regular(p)?;
    let mut grid = Vec::with_capacity(QUAD_POINTS);
    for j in 0..QUAD_POINTS {
        let th = TWO_PI * j as f64 / QUAD_POINTS as f64;
        grid.push(w_theta(p, th)?);
    }
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut acc = 0.0;
        for (j, &w) in grid.iter().enumerate() {
            let th = TWO_PI * j as f64 / QUAD_POINTS as f64;
            acc += w * fmath::cos(n as f64 * th);
        }
        out.push(acc / QUAD_POINTS as f64);
    }
    Ok(out)
}

/// On-site energy `T_m = tan((ω − E_m)/2)`; `E_m` is expected in the same
/// scaled units as ω (i.e. already divided by ħ_s).
pub fn onsite_energy(omega: f64, e_scaled: f64) -> Result<f64, TbError> {
    let arg = 0.5 * (omega - e_scaled);
    if pole_distance(arg) < POLE_GUARD {
        return Err(TbError::NearPole { argument: arg });
    }
    Ok(fmath::tan(arg))
}

/// How the lattice sites of a tight-binding system are indexed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteOrder {
    /// Sites are the unperturbed eigenstates in global energy order.
    EnergyBasis,
    /// `V0 = 0` reduction: sites are momentum states `l = −l_max..l_max`, so
    /// the hopping matrix is exactly Toeplitz.
    MomentumLattice,
}

fn lookup(coeffs: &[f64], n: i64) -> f64 {
    let d = n.unsigned_abs() as usize;
    if d < coeffs.len() {
        coeffs[d]
    } else {
        0.0
    }
}

/// Hopping matrix `W_ml = Σ a*_mp a_lq W_{p−q}` plus the coefficient list and
/// the site ordering used. At `V0 = 0` the momentum-lattice reduction is
/// taken and the result is exactly Toeplitz.
pub fn hopping_matrix(
    spectrum: &UnperturbedSpectrum,
    p: &ModelParams,
) -> Result<(RMat, Vec<f64>, SiteOrder), TbError> {
    check_regular(p)?;
    let l_max = spectrum.l_max;
    let coeffs = w_fourier(p, 2 * l_max)?;
    let dim = spectrum.dim();

    if p.v0 == 0.0 {
        let mut w = RMat::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                let li = i as i64 - l_max as i64;
                let lj = j as i64 - l_max as i64;
                w.set(i, j, lookup(&coeffs, li - lj));
            }
        }
        return Ok((w, coeffs, SiteOrder::MomentumLattice));
    }

    // parity-symmetrized circulant blocks, rotated by the block eigenvectors
    let mut w = RMat::zeros(dim, dim);
    for parity in [Parity::Even, Parity::Odd] {
        let block = spectrum.block(parity);
        let size = block.len();
        if size == 0 {
            continue;
        }
        let mut circ = RMat::zeros(size, size);
        match parity {
            Parity::Even => {
                let sqrt2 = fmath::sqrt(2.0);
                circ.set(0, 0, lookup(&coeffs, 0));
                for b in 1..=l_max {
                    let v = sqrt2 * lookup(&coeffs, b as i64);
                    circ.set(0, b, v);
                    circ.set(b, 0, v);
                }
                for a in 1..=l_max {
                    for b in a..=l_max {
                        let v = lookup(&coeffs, a as i64 - b as i64)
                            + lookup(&coeffs, (a + b) as i64);
                        circ.set(a, b, v);
                        circ.set(b, a, v);
                    }
                }
            }
            Parity::Odd => {
                for a in 1..=l_max {
                    for b in a..=l_max {
                        let v = lookup(&coeffs, a as i64 - b as i64)
                            - lookup(&coeffs, (a + b) as i64);
                        circ.set(a - 1, b - 1, v);
                        circ.set(b - 1, a - 1, v);
                    }
                }
            }
        }
        let rotated = block.vectors.mul(&circ).mul_transpose_b(&block.vectors);
        for (bi, &gi) in block.global_indices.iter().enumerate() {
            for (bj, &gj) in block.global_indices.iter().enumerate() {
                w.set(gi, gj, rotated.at(bi, bj));
            }
        }
    }
    Ok((w, coeffs, SiteOrder::EnergyBasis))
}

/// A tight-binding system at one quasi-energy (the §-convention ω for which
/// `T_m(ω = E_m/ħ) = 0`, i.e. the negative of the Floquet eigenphase).
#[derive(Debug, Clone)]
pub struct TightBindingSystem {
    pub omega: f64,
    /// `tan((ω − E_m/ħ)/2)` per site; `None` marks a pole-excluded site.
    pub onsite: Vec<Option<f64>>,
    pub excluded_sites: usize,
    pub hopping: RMat,
    pub w_coeffs: Vec<f64>,
    pub site_order: SiteOrder,
    /// Scaled site energies `E_m/ħ` in site order.
    pub site_energies: Vec<f64>,
}

/// The ω-independent part of a tight-binding system: hopping, coefficients
/// and scaled site energies. One base serves every quasi-energy.
#[derive(Debug, Clone)]
pub struct TbBase {
    pub hopping: RMat,
    pub w_coeffs: Vec<f64>,
    pub site_order: SiteOrder,
    pub site_energies: Vec<f64>,
}

pub fn build_base(spectrum: &UnperturbedSpectrum, p: &ModelParams) -> Result<TbBase, TbError> {
    let (hopping, w_coeffs, site_order) = hopping_matrix(spectrum, p)?;
    let dim = spectrum.dim();
    let site_energies: Vec<f64> = match site_order {
        SiteOrder::EnergyBasis => spectrum.energies.iter().map(|e| e / p.hbar).collect(),
        SiteOrder::MomentumLattice => (0..dim)
            .map(|i| {
                let l = i as f64 - spectrum.l_max as f64;
                0.5 * p.hbar * l * l
            })
            .collect(),
    };
    Ok(TbBase { hopping, w_coeffs, site_order, site_energies })
}

impl TbBase {
    /// Instantiate the on-site energies at one quasi-energy.
    pub fn at_omega(&self, omega: f64) -> TightBindingSystem {
        let mut excluded = 0usize;
        let onsite: Vec<Option<f64>> = self
            .site_energies
            .iter()
            .map(|&e| match onsite_energy(omega, e) {
                Ok(t) => Some(t),
                Err(_) => {
                    excluded += 1;
                    None
                }
            })
            .collect();
        TightBindingSystem {
            omega,
            onsite,
            excluded_sites: excluded,
            hopping: self.hopping.clone(),
            w_coeffs: self.w_coeffs.clone(),
            site_order: self.site_order,
            site_energies: self.site_energies.clone(),
        }
    }
}

/// Build the tight-binding system for one quasi-energy.
pub fn build_system(
    spectrum: &UnperturbedSpectrum,
    p: &ModelParams,
    omega: f64,
) -> Result<TightBindingSystem, TbError> {
    Ok(build_base(spectrum, p)?.at_omega(omega))
}

/// Residual of the lattice equation for one state.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    /// `max|T_m u_m + Σ_l W_ml u_l| / max|u_m|` over included interior sites.
    pub value: f64,
    pub excluded_sites: usize,
    pub total_sites: usize,
    /// False when more than 5% of sites were pole-excluded.
    pub reliable: bool,
}

/// Lattice amplitudes `u_m = ⟨ψ_m| φ/(1 − iW) ⟩` for a state given by its
/// energy-basis amplitudes.
fn lattice_amplitudes(
    spectrum: &UnperturbedSpectrum,
    p: &ModelParams,
    amplitudes: &[Complex64],
    site_order: SiteOrder,
) -> Result<Vec<Complex64>, TbError> {
    let dim = spectrum.dim();
    assert_eq!(amplitudes.len(), dim);
    let l_max = spectrum.l_max;

    // momentum coefficients g_l = Σ_n a_nl c_n
    let mut g = vec![Complex64::new(0.0, 0.0); dim];
    for n in 0..dim {
        let c = amplitudes[n];
        if c.norm_sqr() == 0.0 {
            continue;
        }
        let row = spectrum.momentum_row(n);
        for (gl, &a) in g.iter_mut().zip(&row) {
            *gl += c * a;
        }
    }

    // ū(θ) = φ(θ)/(1 − iW(θ)) on a uniform grid, then back to momentum space
    let npts = QUAD_POINTS;
    let mut ubar = vec![Complex64::new(0.0, 0.0); npts];
    for (j, ub) in ubar.iter_mut().enumerate() {
        let th = TWO_PI * j as f64 / npts as f64;
        let mut phi = Complex64::new(0.0, 0.0);
        for (i, &gl) in g.iter().enumerate() {
            let l = i as f64 - l_max as f64;
            let (s, c) = fmath::sincos(l * th);
            phi += gl * Complex64::new(c, s);
        }
        let w = w_theta(p, th)?;
        *ub = phi / Complex64::new(1.0, -w);
    }
    let mut u_momentum = vec![Complex64::new(0.0, 0.0); dim];
    for (i, um) in u_momentum.iter_mut().enumerate() {
        let l = i as f64 - l_max as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &ub) in ubar.iter().enumerate() {
            let th = TWO_PI * j as f64 / npts as f64;
            let (s, c) = fmath::sincos(-l * th);
            acc += ub * Complex64::new(c, s);
        }
        *um = acc / npts as f64;
    }

    match site_order {
        SiteOrder::MomentumLattice => Ok(u_momentum),
        SiteOrder::EnergyBasis => {
            let mut u = vec![Complex64::new(0.0, 0.0); dim];
            for (n, un) in u.iter_mut().enumerate() {
                let row = spectrum.momentum_row(n);
                let mut acc = Complex64::new(0.0, 0.0);
                for (&a, &g) in row.iter().zip(&u_momentum) {
                    acc += g * a;
                }
                *un = acc;
            }
            Ok(u)
        }
    }
}

/// Evaluate the lattice-equation residual for a state (energy-basis
/// amplitudes) against a system built at the matching quasi-energy. Sites at
/// or beyond `interior_cutoff` are truncation-contaminated and ignored.
pub fn residual(
    tb: &TightBindingSystem,
    spectrum: &UnperturbedSpectrum,
    p: &ModelParams,
    amplitudes: &[Complex64],
    interior_cutoff: usize,
) -> Result<ResidualReport, TbError> {
    let u = lattice_amplitudes(spectrum, p, amplitudes, tb.site_order)?;
    let dim = u.len();
    let cutoff = interior_cutoff.min(dim);

    let mut max_res: f64 = 0.0;
    let mut max_u: f64 = 0.0;
    let mut excluded = 0usize;
    for m in 0..cutoff {
        let Some(t_m) = tb.onsite[m] else {
            excluded += 1;
            continue;
        };
        let mut hop = Complex64::new(0.0, 0.0);
        let row = tb.hopping.row(m);
        for (&w, &ul) in row.iter().zip(&u) {
            hop += ul * w;
        }
        let r = u[m] * t_m + hop;
        max_res = max_res.max(r.norm());
        max_u = max_u.max(u[m].norm());
    }
    let value = if max_u > 0.0 { max_res / max_u } else { 0.0 };
    Ok(ResidualReport {
        value,
        excluded_sites: excluded,
        total_sites: cutoff,
        reliable: (excluded as f64) <= EXCLUDED_LIMIT * cutoff as f64,
    })
}

/// Lattice-convention quasi-energy of a Floquet eigenphase: the negative,
/// reduced to `[0, 2π)` (fixed by the `k = 0` oracle `T_m(ω = E_m/ħ) = 0`).
pub fn lattice_omega(floquet_omega: f64) -> f64 {
    let mut omega = TWO_PI - floquet_omega;
    if omega >= TWO_PI {
        omega -= TWO_PI;
    }
    omega
}

/// Certify the lattice equation for one state against a prebuilt
/// ω-independent base.
pub fn state_residual_with_base(
    d: &FloquetDecomposition,
    r: usize,
    spectrum: &UnperturbedSpectrum,
    p: &ModelParams,
    base: &TbBase,
) -> Result<ResidualReport, TbError> {
    let tb = base.at_omega(lattice_omega(d.states[r].omega));
    let amps = d.amplitudes(r);
    residual(&tb, spectrum, p, &amps, d.retained_cutoff)
}

/// Build the system at a Floquet state's quasi-energy and certify the
/// lattice equation for it.
pub fn state_residual(
    d: &FloquetDecomposition,
    r: usize,
    spectrum: &UnperturbedSpectrum,
    p: &ModelParams,
) -> Result<ResidualReport, TbError> {
    let base = build_base(spectrum, p)?;
    state_residual_with_base(d, r, spectrum, p, &base)
}
