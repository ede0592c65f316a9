//! One-period Floquet operator in the unperturbed energy basis, its
//! diagonalization, and stroboscopic evolution.
//!
//! The operator is `U = D · A K Aᵀ` with `D = diag(e^{−iE_n/ħ})` the free
//! flight, `K` the kick factor (Jacobi–Anger Bessel coefficients of
//! `e^{−i(k/ħ)cosθ}`) and `A` the real coefficient matrix of the unperturbed
//! states. `M = A K Aᵀ` is complex symmetric and unitary, so
//! `Ũ = D^{1/2} M D^{1/2}` — diagonally similar to `U` — is a complex
//! symmetric unitary whose real and imaginary parts `X`, `Y` are commuting
//! real symmetric matrices with `X² + Y² = I`. Diagonalizing `X` and
//! resolving near-degenerate clusters with the projected `Y` yields a real
//! orthonormal eigenbasis and unit-circle eigenvalues `x + iy = e^{iω}`; the
//! Floquet states in the energy basis are `c = D^{1/2} q`, so `|c_n| = |q_n|`
//! and all density-based analyses can work directly on `q`.
//!
//! Parity keeps everything block-diagonal: the kick commutes with the
//! reflection through the barrier center, so even and odd sectors never mix
//! and are processed independently.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::basis::{params_hash, Parity, UnperturbedSpectrum};
use crate::fmath;
use crate::linalg::{dot, sym_eigen, CMat, LinalgError, RMat};
use crate::model::ModelParams;
use crate::special::bessel_j_upto;
use crate::TWO_PI;

/// Fraction of the energy basis whose states carry a strict tail-weight
/// convergence flag.
const TAIL_FRACTION: f64 = 0.9;
/// Tail weight beyond the tail cutoff that marks a state unconverged.
const TAIL_WEIGHT_LIMIT: f64 = 1e-8;
/// Unitarity defect on the retained block above which a build is rejected.
const UNITARITY_LIMIT: f64 = 1e-6;
/// Eigenvalues of `X = Re Ũ` closer than this are split with the projected
/// imaginary part; wide enough that unclustered eigenvectors are clean.
const CLUSTER_TOL: f64 = 2e-4;

#[derive(Debug, Clone, PartialEq)]
pub enum FloquetError {
    /// Spectrum was solved for different (V0, b, ħ_s, l_max).
    ParamsMismatch { expected: u64, got: u64 },
    /// Retained-block unitarity defect too large to diagonalize.
    Unitarity { defect: f64 },
    Eigensolver(LinalgError),
    /// An eigenpair failed the unit-modulus check.
    OffUnitCircle { modulus: f64 },
}

impl fmt::Display for FloquetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FloquetError::ParamsMismatch { expected, got } => write!(
                f,
                "spectrum/params fingerprint mismatch: spectrum {expected:#x}, params {got:#x}"
            ),
            FloquetError::Unitarity { defect } => {
                write!(f, "retained-block unitarity defect {defect:.3e} exceeds 1e-6")
            }
            FloquetError::Eigensolver(e) => write!(f, "eigensolver failure: {e}"),
            FloquetError::OffUnitCircle { modulus } => {
                write!(f, "Floquet eigenvalue modulus {modulus} off the unit circle")
            }
        }
    }
}

impl core::error::Error for FloquetError {}

impl From<LinalgError> for FloquetError {
    fn from(e: LinalgError) -> Self {
        FloquetError::Eigensolver(e)
    }
}

/// One parity sector of the Floquet operator.
#[derive(Debug, Clone)]
pub struct FloquetBlock {
    pub parity: Parity,
    /// Real part of `M = A K Aᵀ` in the block energy basis.
    pub m_re: RMat,
    /// Imaginary part of `M`.
    pub m_im: RMat,
    /// Unperturbed energies of the block states.
    pub energies: Vec<f64>,
    /// Global energy-ordered index of each block state.
    pub global_indices: Vec<usize>,
    /// How many leading block states fall below the retained cutoff.
    pub retained: usize,
}

impl FloquetBlock {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }
}

/// The Floquet operator, parity-blocked, with the free-evolution phase kept
/// as a separate diagonal (`U_nm = e^{−iE_n/ħ} M_nm`, so `|U_nm| = |M_nm|`).
#[derive(Debug, Clone)]
pub struct FloquetMatrix {
    pub params: ModelParams,
    pub dim: usize,
    /// Size of the retained principal block: the converged half of the basis.
    /// Matrix statistics and residual checks are restricted to it.
    pub retained_cutoff: usize,
    /// Global index past which tail weight counts against the per-state
    /// convergence flag (`0.9·dim`).
    pub tail_cutoff: usize,
    /// `max |(U†U − I)_{nm}|` over the retained principal block.
    pub unitarity_defect: f64,
    pub even: FloquetBlock,
    pub odd: FloquetBlock,
    block_of: Vec<(Parity, usize)>,
}

impl FloquetMatrix {
    pub fn block(&self, parity: Parity) -> &FloquetBlock {
        match parity {
            Parity::Even => &self.even,
            Parity::Odd => &self.odd,
        }
    }

    /// `U_nm` in global energy-ordered indices.
    pub fn entry(&self, n: usize, m: usize) -> Complex64 {
        let (pn, i) = self.block_of[n];
        let (pm, j) = self.block_of[m];
        if pn != pm {
            return Complex64::new(0.0, 0.0);
        }
        let block = self.block(pn);
        let m_val = Complex64::new(block.m_re.at(i, j), block.m_im.at(i, j));
        let phase = -block.energies[i] / self.params.hbar;
        let (s, c) = fmath::sincos(phase);
        Complex64::new(c, s) * m_val
    }

    /// `|U_nm|`; zero across parity sectors.
    pub fn abs_entry(&self, n: usize, m: usize) -> f64 {
        let (pn, i) = self.block_of[n];
        let (pm, j) = self.block_of[m];
        if pn != pm {
            return 0.0;
        }
        let block = self.block(pn);
        fmath::hypot(block.m_re.at(i, j), block.m_im.at(i, j))
    }
}

/// Jacobi–Anger coefficient `(−i)^{|Δ|} J_{|Δ|}(z)` of `e^{−iz cosθ}`.
fn kick_coefficient(j: &[f64], delta: i64) -> Complex64 {
    let d = delta.unsigned_abs() as usize;
    let val = if d < j.len() { j[d] } else { 0.0 };
    match d % 4 {
        0 => Complex64::new(val, 0.0),
        1 => Complex64::new(0.0, -val),
        2 => Complex64::new(-val, 0.0),
        _ => Complex64::new(0.0, val),
    }
}

/// Kick factor `⟨l| e^{−i(k/ħ)cosθ} |l'⟩` in the full momentum basis.
pub fn kick_matrix(p: &ModelParams, t: &crate::basis::BasisTruncation) -> CMat {
    let l_max = t.l_max() as i64;
    let j = bessel_j_upto(p.kick_phase(), 2 * t.l_max());
    CMat::from_fn(t.dim(), t.dim(), |a, b| {
        kick_coefficient(&j, (a as i64 - l_max) - (b as i64 - l_max))
    })
}

/// Kick factor in one parity sector of the symmetrized basis.
fn kick_block(j: &[f64], l_max: usize, parity: Parity) -> (RMat, RMat) {
    match parity {
        Parity::Even => {
            let size = l_max + 1;
            let sqrt2 = fmath::sqrt(2.0);
            let mut re = RMat::zeros(size, size);
            let mut im = RMat::zeros(size, size);
            let k00 = kick_coefficient(j, 0);
            re.set(0, 0, k00.re);
            im.set(0, 0, k00.im);
            for b in 1..=l_max {
                let v = kick_coefficient(j, b as i64) * sqrt2;
                re.set(0, b, v.re);
                re.set(b, 0, v.re);
                im.set(0, b, v.im);
                im.set(b, 0, v.im);
            }
            for a in 1..=l_max {
                for b in a..=l_max {
                    let v = kick_coefficient(j, a as i64 - b as i64)
                        + kick_coefficient(j, (a + b) as i64);
                    re.set(a, b, v.re);
                    re.set(b, a, v.re);
                    im.set(a, b, v.im);
                    im.set(b, a, v.im);
                }
            }
            (re, im)
        }
        Parity::Odd => {
            let mut re = RMat::zeros(l_max, l_max);
            let mut im = RMat::zeros(l_max, l_max);
            for a in 1..=l_max {
                for b in a..=l_max {
                    let v = kick_coefficient(j, a as i64 - b as i64)
                        - kick_coefficient(j, (a + b) as i64);
                    re.set(a - 1, b - 1, v.re);
                    re.set(b - 1, a - 1, v.re);
                    im.set(a - 1, b - 1, v.im);
                    im.set(b - 1, a - 1, v.im);
                }
            }
            (re, im)
        }
    }
}

/// Width of the high-momentum corner that carries the entire truncation
/// defect of the kick block: beyond `z + 80` the Bessel coefficients
/// underflow to exact zeros.
fn corner_width(z: f64, nb: usize) -> usize {
    ((z as usize) + 80).min(nb)
}

/// Inverse square root of a Hermitian matrix near the identity
/// (Newton–Schulz; converges for ‖G − I‖₂ < 1).
fn inv_sqrt_near_identity(g: &CMat) -> CMat {
    let w = g.rows();
    let ident = CMat::from_fn(w, w, |i, j| {
        Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)
    });
    let mut y = g.clone();
    let mut z = ident.clone();
    for _ in 0..40 {
        let zy = z.mul(&y);
        let mut defect: f64 = 0.0;
        let mut t = CMat::zeros(w, w);
        for i in 0..w {
            for j in 0..w {
                let idv = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((zy.at(i, j) - Complex64::new(idv, 0.0)).norm());
                t.set(i, j, (Complex64::new(3.0 * idv, 0.0) - zy.at(i, j)) * 0.5);
            }
        }
        if defect < 1e-15 {
            break;
        }
        y = y.mul(&t);
        z = t.mul(&z);
    }
    z
}

/// Corner Gram matrix `(K†K)` restricted to the last `w` columns.
fn corner_gram(k_re: &RMat, k_im: &RMat, w: usize) -> CMat {
    let nb = k_re.rows();
    let c0 = nb - w;
    let mut g = CMat::zeros(w, w);
    for m in 0..nb {
        let re = &k_re.row(m)[c0..];
        let im = &k_im.row(m)[c0..];
        for a in 0..w {
            let ka = Complex64::new(re[a], -im[a]);
            if ka.norm_sqr() == 0.0 {
                continue;
            }
            for b in 0..w {
                let v = g.at(a, b) + ka * Complex64::new(re[b], im[b]);
                g.set(a, b, v);
            }
        }
    }
    g
}

fn build_block(
    spectrum: &UnperturbedSpectrum,
    j: &[f64],
    parity: Parity,
    cutoff: usize,
    kick_phase: f64,
    polar_correct: bool,
) -> (FloquetBlock, f64) {
    let sblock = spectrum.block(parity);
    if kick_phase == 0.0 {
        // no kick: M = A·I·Aᵀ = I exactly
        let nb = sblock.len();
        let retained =
            sblock.global_indices.iter().take_while(|&&g| g < cutoff).count();
        return (
            FloquetBlock {
                parity,
                m_re: RMat::identity(nb),
                m_im: RMat::zeros(nb, nb),
                energies: sblock.energies.clone(),
                global_indices: sblock.global_indices.clone(),
                retained,
            },
            0.0,
        );
    }
    let (mut k_re, mut k_im) = kick_block(j, spectrum.l_max, parity);
    let nb = k_re.rows();
    let w = corner_width(kick_phase, nb);
    let c0 = nb - w;
    let g = corner_gram(&k_re, &k_im, w);

    let retained = sblock
        .global_indices
        .iter()
        .take_while(|&&g| g < cutoff)
        .count();

    // raw truncation defect on the retained block before polar correction:
    // M†M − I = A (K†K − I) Aᵀ, and K†K − I lives on the corner
    let mut t = alloc::vec![Complex64::new(0.0, 0.0); retained * w];
    for r in 0..retained {
        let arow = &sblock.vectors.row(r)[c0..];
        for b in 0..w {
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, &av) in arow.iter().enumerate() {
                let e = g.at(a, b) - Complex64::new(if a == b { 1.0 } else { 0.0 }, 0.0);
                acc += e * av;
            }
            t[r * w + b] = acc;
        }
    }
    let mut defect: f64 = 0.0;
    for r in 0..retained {
        for s in 0..retained {
            let brow = &sblock.vectors.row(s)[c0..];
            let mut acc = Complex64::new(0.0, 0.0);
            for (b, &bv) in brow.iter().enumerate() {
                acc += t[r * w + b] * bv;
            }
            defect = defect.max(acc.norm());
        }
    }

    // exact polar factor: G^{-1/2} differs from the identity only on the
    // corner, so only corner columns mix; K stays complex symmetric and the
    // interior is untouched
    if polar_correct {
        let s_corr = inv_sqrt_near_identity(&g);
        let mut buf_re = alloc::vec![0.0; w];
        let mut buf_im = alloc::vec![0.0; w];
        for m in 0..nb {
            {
                let re = &k_re.row(m)[c0..];
                let im = &k_im.row(m)[c0..];
                for jx in 0..w {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for tx in 0..w {
                        acc += Complex64::new(re[tx], im[tx]) * s_corr.at(tx, jx);
                    }
                    buf_re[jx] = acc.re;
                    buf_im[jx] = acc.im;
                }
            }
            k_re.row_mut(m)[c0..].copy_from_slice(&buf_re);
            k_im.row_mut(m)[c0..].copy_from_slice(&buf_im);
        }
    }

    let t_re = sblock.vectors.mul(&k_re);
    let t_im = sblock.vectors.mul(&k_im);
    let mut m_re = t_re.mul_transpose_b(&sblock.vectors);
    let mut m_im = t_im.mul_transpose_b(&sblock.vectors);
    // remove rounding asymmetry so the symmetric eigenpath sees exact M = Mᵀ
    for i in 0..nb {
        for jx in (i + 1)..nb {
            let re = 0.5 * (m_re.at(i, jx) + m_re.at(jx, i));
            m_re.set(i, jx, re);
            m_re.set(jx, i, re);
            let im = 0.5 * (m_im.at(i, jx) + m_im.at(jx, i));
            m_im.set(i, jx, im);
            m_im.set(jx, i, im);
        }
    }

    (
        FloquetBlock {
            parity,
            m_re,
            m_im,
            energies: sblock.energies.clone(),
            global_indices: sblock.global_indices.clone(),
            retained,
        },
        defect,
    )
}

/// Assemble the Floquet operator from a solved spectrum.
///
/// The recorded `unitarity_defect` is the raw truncation defect on the
/// retained block; the operator itself carries the polar-corrected kick
/// factor (unitary to machine precision, interior untouched).
pub fn build_floquet(
    spectrum: &UnperturbedSpectrum,
    p: &ModelParams,
) -> Result<FloquetMatrix, FloquetError> {
    build_floquet_inner(spectrum, p, true)
}

/// Raw construction without the corner polar correction; used by tests that
/// compare against the dense explicit product.
#[cfg(test)]
pub(crate) fn build_floquet_raw(
    spectrum: &UnperturbedSpectrum,
    p: &ModelParams,
) -> Result<FloquetMatrix, FloquetError> {
    build_floquet_inner(spectrum, p, false)
}

fn build_floquet_inner(
    spectrum: &UnperturbedSpectrum,
    p: &ModelParams,
    polar_correct: bool,
) -> Result<FloquetMatrix, FloquetError> {
    let expected = spectrum.params_hash;
    let got = params_hash(p.v0, p.b, p.hbar, spectrum.l_max);
    if expected != got {
        return Err(FloquetError::ParamsMismatch { expected, got });
    }
    let dim = spectrum.dim();
    let cutoff = dim / 2;
    let tail_cutoff = (TAIL_FRACTION * dim as f64) as usize;
    let j = bessel_j_upto(p.kick_phase(), 2 * spectrum.l_max);

    let z = p.kick_phase();
    let (even, defect_even) =
        build_block(spectrum, &j, Parity::Even, cutoff, z, polar_correct);
    let (odd, defect_odd) = build_block(spectrum, &j, Parity::Odd, cutoff, z, polar_correct);

    let block_of: Vec<(Parity, usize)> =
        (0..dim).map(|n| spectrum.block_index(n)).collect();

    Ok(FloquetMatrix {
        params: *p,
        dim,
        retained_cutoff: cutoff,
        tail_cutoff,
        unitarity_defect: defect_even.max(defect_odd),
        even,
        odd,
        block_of,
    })
}

/// One Floquet eigenstate. `q` holds the real amplitudes over the parity
/// block's energy states; the energy-basis coefficients are
/// `c_n = e^{−iE_n/2ħ} q_n`, so `|c_n|² = q_n²`.
#[derive(Debug, Clone)]
pub struct FloquetState {
    /// Quasi-energy in `[0, 2π)`: the eigenvalue is `e^{iω}`.
    pub omega: f64,
    pub parity: Parity,
    pub converged: bool,
    pub q: Vec<f64>,
}

/// Sector bookkeeping shared by all states of one parity.
#[derive(Debug, Clone)]
pub struct SectorMap {
    pub global_indices: Vec<usize>,
    pub energies: Vec<f64>,
}

/// Eigen-decomposition of the Floquet operator.
#[derive(Debug, Clone)]
pub struct FloquetDecomposition {
    pub dim: usize,
    pub hbar: f64,
    /// Converged half of the basis; statistics select states peaked below it.
    pub retained_cutoff: usize,
    /// Tail-mask cutoff (`0.9·dim`) behind the per-state `converged` flag.
    pub tail_cutoff: usize,
    pub even: SectorMap,
    pub odd: SectorMap,
    /// States sorted by quasi-energy.
    pub states: Vec<FloquetState>,
    /// Worst `| |e^{iω}| − 1 |` over all eigenpairs.
    pub max_modulus_defect: f64,
}

impl FloquetDecomposition {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn sector(&self, parity: Parity) -> &SectorMap {
        match parity {
            Parity::Even => &self.even,
            Parity::Odd => &self.odd,
        }
    }

    /// `|c_rn|²` of state `r` over the global energy-ordered basis.
    pub fn density(&self, r: usize) -> Vec<f64> {
        let state = &self.states[r];
        let sector = self.sector(state.parity);
        let mut out = vec![0.0; self.dim];
        for (i, &g) in sector.global_indices.iter().enumerate() {
            out[g] = state.q[i] * state.q[i];
        }
        out
    }

    /// Global index of the basis state with the largest overlap.
    pub fn n_max_global(&self, r: usize) -> usize {
        let state = &self.states[r];
        let sector = self.sector(state.parity);
        let mut best = 0usize;
        let mut best_v = -1.0;
        for (i, &qv) in state.q.iter().enumerate() {
            let d = qv * qv;
            if d > best_v {
                best_v = d;
                best = i;
            }
        }
        sector.global_indices[best]
    }

    /// Complex energy-basis coefficients `c_rn` over the global basis.
    pub fn amplitudes(&self, r: usize) -> Vec<Complex64> {
        let state = &self.states[r];
        let sector = self.sector(state.parity);
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for (i, &g) in sector.global_indices.iter().enumerate() {
            let phase = -sector.energies[i] / (2.0 * self.hbar);
            let (s, c) = fmath::sincos(phase);
            out[g] = Complex64::new(c, s) * state.q[i];
        }
        out
    }

    /// Statistics default: states peaked inside the converged half of the
    /// basis. Power-law states never pass the strict tail mask, so peak
    /// position is the selection that works in every regime.
    pub fn retained_states(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&r| self.n_max_global(r) < self.retained_cutoff)
            .collect()
    }

    /// States passing the strict tail-weight mask (exponentially localized
    /// states well inside the basis).
    pub fn tail_converged_states(&self) -> Vec<usize> {
        (0..self.len()).filter(|&r| self.states[r].converged).collect()
    }
}

fn diagonalize_block(
    block: &FloquetBlock,
    hbar: f64,
    tail_cutoff: usize,
) -> Result<(Vec<FloquetState>, f64), FloquetError> {
    let n = block.len();
    if n == 0 {
        return Ok((Vec::new(), 0.0));
    }
    // Ũ = D^{1/2} M D^{1/2}: X = Re Ũ, Y = Im Ũ with φ_i = E_i / 2ħ
    let phases: Vec<f64> = block.energies.iter().map(|e| e / (2.0 * hbar)).collect();
    let mut x = RMat::zeros(n, n);
    let mut y = RMat::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let (s, c) = fmath::sincos(phases[a] + phases[b]);
            let mre = block.m_re.at(a, b);
            let mim = block.m_im.at(a, b);
            x.set(a, b, c * mre + s * mim);
            y.set(a, b, c * mim - s * mre);
        }
    }

    let eig = sym_eigen(&x)?;
    let xs = eig.values;
    let mut q = eig.vectors;

    // y projections: T = Q Y, y_r = T_r · q_r
    let t = q.mul(&y);
    let mut ys: Vec<f64> = (0..n).map(|r| dot(t.row(r), q.row(r))).collect();
    let mut xs = xs;

    // split near-degenerate clusters of X with the projected Y
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && xs[end] - xs[end - 1] < CLUSTER_TOL {
            end += 1;
        }
        let g = end - start;
        if g > 1 {
            let mut b = RMat::zeros(g, g);
            for i in 0..g {
                for jx in 0..g {
                    b.set(i, jx, dot(t.row(start + i), q.row(start + jx)));
                }
            }
            // symmetrize rounding noise
            let bs = RMat::from_fn(g, g, |i, jx| 0.5 * (b.at(i, jx) + b.at(jx, i)));
            let sub = sym_eigen(&bs)?;
            let mut rotated: Vec<Vec<f64>> = Vec::with_capacity(g);
            for i in 0..g {
                let coefs = sub.vectors.row(i);
                let mut row = vec![0.0; n];
                for (jx, &w) in coefs.iter().enumerate() {
                    let src = q.row(start + jx);
                    for (o, &v) in row.iter_mut().zip(src) {
                        *o += w * v;
                    }
                }
                rotated.push(row);
            }
            for (i, row) in rotated.into_iter().enumerate() {
                ys[start + i] = sub.values[i];
                // Rayleigh-quotient X value for the rotated vector
                let xrow = x.mul_vec(&row);
                xs[start + i] = dot(&row, &xrow);
                q.row_mut(start + i).copy_from_slice(&row);
            }
        }
        start = end;
    }

    let mut max_defect: f64 = 0.0;
    let mut states = Vec::with_capacity(n);
    for r in 0..n {
        let modulus = fmath::hypot(xs[r], ys[r]);
        max_defect = max_defect.max(fmath::abs(modulus - 1.0));
        let mut omega = fmath::atan2(ys[r], xs[r]);
        if omega < 0.0 {
            omega += TWO_PI;
        }
        if omega >= TWO_PI {
            omega -= TWO_PI;
        }
        let qv = q.row(r).to_vec();
        let tail: f64 = block
            .global_indices
            .iter()
            .zip(&qv)
            .filter(|(&g, _)| g >= tail_cutoff)
            .map(|(_, &v)| v * v)
            .sum();
        states.push(FloquetState {
            omega,
            parity: block.parity,
            converged: tail <= TAIL_WEIGHT_LIMIT,
            q: qv,
        });
    }
    Ok((states, max_defect))
}

/// Diagonalize the Floquet operator into quasi-energies and states.
pub fn diagonalize_floquet(u: &FloquetMatrix) -> Result<FloquetDecomposition, FloquetError> {
    if u.unitarity_defect > UNITARITY_LIMIT {
        return Err(FloquetError::Unitarity { defect: u.unitarity_defect });
    }
    let hbar = u.params.hbar;
    let (mut states_even, defect_even) =
        diagonalize_block(&u.even, hbar, u.tail_cutoff)?;
    let (mut states_odd, defect_odd) = diagonalize_block(&u.odd, hbar, u.tail_cutoff)?;
    let max_modulus_defect = defect_even.max(defect_odd);
    if max_modulus_defect > 1e-8 {
        return Err(FloquetError::OffUnitCircle { modulus: 1.0 + max_modulus_defect });
    }

    let mut states = Vec::with_capacity(states_even.len() + states_odd.len());
    states.append(&mut states_even);
    states.append(&mut states_odd);
    states.sort_by(|a, b| {
        a.omega
            .partial_cmp(&b.omega)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then_with(|| (a.parity == Parity::Odd).cmp(&(b.parity == Parity::Odd)))
    });

    Ok(FloquetDecomposition {
        dim: u.dim,
        hbar,
        retained_cutoff: u.retained_cutoff,
        tail_cutoff: u.tail_cutoff,
        even: SectorMap {
            global_indices: u.even.global_indices.clone(),
            energies: u.even.energies.clone(),
        },
        odd: SectorMap {
            global_indices: u.odd.global_indices.clone(),
            energies: u.odd.energies.clone(),
        },
        states,
        max_modulus_defect,
    })
}

/// A stroboscopically evolved state over the global energy basis.
#[derive(Debug, Clone)]
pub struct EvolvedState {
    pub amplitudes: Vec<Complex64>,
    pub time: u64,
}

impl EvolvedState {
    /// The basis state `|ψ_n⟩`.
    pub fn basis_state(dim: usize, n: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[n] = Complex64::new(1.0, 0.0);
        Self { amplitudes, time: 0 }
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes, time: 0 }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Apply `U` once.
pub fn apply(u: &FloquetMatrix, state: &EvolvedState) -> EvolvedState {
    assert_eq!(state.amplitudes.len(), u.dim);
    let mut out = vec![Complex64::new(0.0, 0.0); u.dim];
    for block in [&u.even, &u.odd] {
        let nb = block.len();
        if nb == 0 {
            continue;
        }
        let mut v_re = vec![0.0; nb];
        let mut v_im = vec![0.0; nb];
        for (i, &g) in block.global_indices.iter().enumerate() {
            v_re[i] = state.amplitudes[g].re;
            v_im[i] = state.amplitudes[g].im;
        }
        // w = M v, then the free-flight phase per row
        for i in 0..nb {
            let re_row = block.m_re.row(i);
            let im_row = block.m_im.row(i);
            let mut wr = 0.0;
            let mut wi = 0.0;
            for k in 0..nb {
                wr += re_row[k] * v_re[k] - im_row[k] * v_im[k];
                wi += re_row[k] * v_im[k] + im_row[k] * v_re[k];
            }
            let (s, c) = fmath::sincos(-block.energies[i] / u.params.hbar);
            out[block.global_indices[i]] =
                Complex64::new(c * wr - s * wi, c * wi + s * wr);
        }
    }
    EvolvedState { amplitudes: out, time: state.time + 1 }
}

/// Repeatedly apply `U`, returning the state after each kick.
pub fn evolve(u: &FloquetMatrix, state: &EvolvedState, steps: usize) -> Vec<EvolvedState> {
    let mut out = Vec::with_capacity(steps);
    let mut cur = state.clone();
    for _ in 0..steps {
        cur = apply(u, &cur);
        out.push(cur.clone());
    }
    out
}

/// Mean energy `Σ_m E_m |b_m|²` with respect to the unperturbed spectrum.
pub fn mean_energy(state: &EvolvedState, spectrum: &UnperturbedSpectrum) -> f64 {
    assert_eq!(state.amplitudes.len(), spectrum.dim());
    state
        .amplitudes
        .iter()
        .zip(&spectrum.energies)
        .map(|(a, &e)| e * a.norm_sqr())
        .sum()
}
