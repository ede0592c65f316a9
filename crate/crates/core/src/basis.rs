//! Unperturbed eigenproblem `H0 |ψ_n⟩ = E_n |ψ_n⟩` in a truncated momentum
//! basis on the ring.
//!
//! The barrier is centered on θ = π for every parameter set, so `H0` commutes
//! with the reflection `θ → 2π − θ` (momentum flip `l → −l`) and its momentum
//! matrix is real symmetric. The solver therefore works in the symmetrized
//! basis — `|0⟩`, `(|l⟩ ± |−l⟩)/√2` — where `H0` splits into an even and an
//! odd block. This keeps every eigenvector real, assigns parity exactly, and
//! resolves the double degeneracies of the `V0 = 0` limit by symmetry instead
//! of by numerical accident.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::fmath;
use crate::linalg::{sym_eigen, CMat, LinalgError, RMat};
use crate::model::{ModelParams, PotentialSpec};
use crate::TWO_PI;

/// Momentum cutoff; the basis holds `l = −l_max … +l_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisTruncation {
    l_max: usize,
}

impl BasisTruncation {
    pub fn new(l_max: usize) -> Result<Self, BasisError> {
        if l_max == 0 {
            return Err(BasisError::TruncationTooSmall);
        }
        Ok(Self { l_max })
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    /// Basis size `2 l_max + 1`, always odd.
    pub fn dim(&self) -> usize {
        2 * self.l_max + 1
    }

    /// Convergence floor for production runs; smaller bases are fine for
    /// tests but give unconverged physics.
    pub fn is_production_scale(&self) -> bool {
        self.dim() >= 64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Even => write!(f, "even"),
            Parity::Odd => write!(f, "odd"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BasisError {
    TruncationTooSmall,
    Eigensolver(LinalgError),
    /// Barrier not symmetric about π; parity is undefined.
    AsymmetricBarrier { center: f64 },
    /// State is not within tolerance of either reflection eigenvalue.
    MixedParity { even_defect: f64, odd_defect: f64 },
}

impl fmt::Display for BasisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisError::TruncationTooSmall => write!(f, "momentum cutoff must be at least 1"),
            BasisError::Eigensolver(e) => write!(f, "eigensolver failure: {e}"),
            BasisError::AsymmetricBarrier { center } => {
                write!(f, "barrier center {center} is not π; parity undefined")
            }
            BasisError::MixedParity { even_defect, odd_defect } => write!(
                f,
                "state has mixed parity (even defect {even_defect:.3e}, odd defect {odd_defect:.3e})"
            ),
        }
    }
}

impl core::error::Error for BasisError {}

impl From<LinalgError> for BasisError {
    fn from(e: LinalgError) -> Self {
        BasisError::Eigensolver(e)
    }
}

/// Fingerprint of everything the unperturbed spectrum depends on. The kick
/// strength is deliberately absent: spectra are reused across `k` sweeps.
pub fn params_hash(v0: f64, b: f64, hbar: f64, l_max: usize) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |bytes: &[u8]| {
        for &byte in bytes {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    eat(&v0.to_le_bytes());
    eat(&b.to_le_bytes());
    eat(&hbar.to_le_bytes());
    eat(&(l_max as u64).to_le_bytes());
    h
}

/// Eigenstates of one parity sector.
#[derive(Debug, Clone)]
pub struct ParityBlock {
    pub parity: Parity,
    /// Ascending within the block.
    pub energies: Vec<f64>,
    /// Row `i` = coefficients of the block's `i`-th state over the
    /// symmetrized basis (even: `l = 0..=l_max`; odd: `l = 1..=l_max`).
    pub vectors: RMat,
    /// Position of each block state in the global energy ordering.
    pub global_indices: Vec<usize>,
}

impl ParityBlock {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }
}

/// Full spectrum of `H0` at one parameter set.
#[derive(Debug, Clone)]
pub struct UnperturbedSpectrum {
    pub l_max: usize,
    pub v0: f64,
    pub b: f64,
    pub hbar: f64,
    pub params_hash: u64,
    /// Global ascending energies.
    pub energies: Vec<f64>,
    /// Parity label per global state.
    pub parities: Vec<Parity>,
    pub even: ParityBlock,
    pub odd: ParityBlock,
    /// Global index → (parity, index inside that block).
    block_of: Vec<(Parity, usize)>,
}

impl UnperturbedSpectrum {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn block(&self, parity: Parity) -> &ParityBlock {
        match parity {
            Parity::Even => &self.even,
            Parity::Odd => &self.odd,
        }
    }

    pub fn block_index(&self, n: usize) -> (Parity, usize) {
        self.block_of[n]
    }

    /// Momentum-basis coefficients `a_nl` of global state `n`; slot `j`
    /// corresponds to `l = j − l_max`.
    pub fn momentum_row(&self, n: usize) -> Vec<f64> {
        let dim = self.dim();
        let mut row = vec![0.0; dim];
        let (parity, i) = self.block_of[n];
        let inv_sqrt2 = 1.0 / fmath::sqrt(2.0);
        match parity {
            Parity::Even => {
                let v = self.even.vectors.row(i);
                row[self.l_max] = v[0];
                for l in 1..=self.l_max {
                    let amp = v[l] * inv_sqrt2;
                    row[self.l_max + l] = amp;
                    row[self.l_max - l] = amp;
                }
            }
            Parity::Odd => {
                let v = self.odd.vectors.row(i);
                for l in 1..=self.l_max {
                    let amp = v[l - 1] * inv_sqrt2;
                    row[self.l_max + l] = amp;
                    row[self.l_max - l] = -amp;
                }
            }
        }
        row
    }

    /// Dense `dim × dim` coefficient matrix, row `n` = `a_nl`.
    pub fn coefficient_matrix(&self) -> RMat {
        let dim = self.dim();
        let mut m = RMat::zeros(dim, dim);
        for n in 0..dim {
            m.row_mut(n).copy_from_slice(&self.momentum_row(n));
        }
        m
    }

    /// Count of states the truncation protocol treats as converged: the
    /// lowest `dim/2` (high-momentum rows of a truncated `H0` are always
    /// unconverged).
    pub fn converged_count(&self) -> usize {
        self.dim() / 2
    }
}

/// Position-space amplitude `ψ(θ) = Σ_l a_l e^{ilθ} / √2π` of a momentum row.
pub fn position_amplitude(row: &[f64], l_max: usize, theta: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, &a) in row.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let l = j as f64 - l_max as f64;
        let (s, c) = fmath::sincos(l * theta);
        acc += Complex64::new(a * c, a * s);
    }
    acc / Complex64::new(fmath::sqrt(TWO_PI), 0.0)
}

/// The full momentum-basis matrix of `H0`:
/// `(l, l') = (ħ²l²/2) δ_{ll'} + V̂(l − l')`. Hermitian by construction.
pub fn build_h0_matrix(p: &ModelParams, t: &BasisTruncation) -> CMat {
    let l_max = t.l_max() as i64;
    let dim = t.dim();
    let mut coefs: Vec<Complex64> = Vec::with_capacity(4 * t.l_max() + 1);
    for d in -(2 * l_max)..=(2 * l_max) {
        coefs.push(crate::model::square_well_fourier(p, d));
    }
    CMat::from_fn(dim, dim, |i, j| {
        let li = i as i64 - l_max;
        let lj = j as i64 - l_max;
        let mut v = coefs[(li - lj + 2 * l_max) as usize];
        if i == j {
            v += Complex64::new(0.5 * p.hbar * p.hbar * (li * li) as f64, 0.0);
        }
        v
    })
}

fn fourier_real(p: &ModelParams, n: i64) -> f64 {
    crate::model::square_well_fourier(p, n).re
}

fn build_even_block(p: &ModelParams, l_max: usize) -> RMat {
    let size = l_max + 1;
    let sqrt2 = fmath::sqrt(2.0);
    let mut m = RMat::zeros(size, size);
    m.set(0, 0, fourier_real(p, 0));
    for b in 1..=l_max {
        let v = sqrt2 * fourier_real(p, b as i64);
        m.set(0, b, v);
        m.set(b, 0, v);
    }
    for a in 1..=l_max {
        for b in a..=l_max {
            let mut v = fourier_real(p, (a as i64) - (b as i64))
                + fourier_real(p, (a + b) as i64);
            if a == b {
                v += 0.5 * p.hbar * p.hbar * (a * a) as f64;
            }
            m.set(a, b, v);
            m.set(b, a, v);
        }
    }
    m
}

fn build_odd_block(p: &ModelParams, l_max: usize) -> RMat {
    let mut m = RMat::zeros(l_max, l_max);
    for a in 1..=l_max {
        for b in a..=l_max {
            let mut v = fourier_real(p, (a as i64) - (b as i64))
                - fourier_real(p, (a + b) as i64);
            if a == b {
                v += 0.5 * p.hbar * p.hbar * (a * a) as f64;
            }
            m.set(a - 1, b - 1, v);
            m.set(b - 1, a - 1, v);
        }
    }
    m
}

/// Flip each eigenvector's sign so its largest-magnitude component is
/// positive; makes coefficients reproducible across backends and cache runs.
fn fix_phases(vectors: &mut RMat) {
    for i in 0..vectors.rows() {
        let row = vectors.row_mut(i);
        let mut best = 0usize;
        let mut best_abs = 0.0;
        for (j, &v) in row.iter().enumerate() {
            let a = fmath::abs(v);
            if a > best_abs {
                best_abs = a;
                best = j;
            }
        }
        if row[best] < 0.0 {
            for v in row.iter_mut() {
                *v = -*v;
            }
        }
    }
}

/// Merge solved parity blocks into global energy order; exact ties put the
/// even member first. Shared by the solver and cache reconstruction.
fn merge_blocks(
    l_max: usize,
    v0: f64,
    b: f64,
    hbar: f64,
    even_eig: (Vec<f64>, RMat),
    odd_eig: (Vec<f64>, RMat),
) -> UnperturbedSpectrum {
    let (even_vals, even_vecs) = even_eig;
    let (odd_vals, odd_vecs) = odd_eig;
    let dim = even_vals.len() + odd_vals.len();
    let mut energies = Vec::with_capacity(dim);
    let mut parities = Vec::with_capacity(dim);
    let mut block_of = Vec::with_capacity(dim);
    let mut even_glob = vec![0usize; even_vals.len()];
    let mut odd_glob = vec![0usize; odd_vals.len()];
    let (mut ie, mut io) = (0usize, 0usize);
    for n in 0..dim {
        let take_even = if ie == even_vals.len() {
            false
        } else if io == odd_vals.len() {
            true
        } else {
            even_vals[ie] <= odd_vals[io]
        };
        if take_even {
            energies.push(even_vals[ie]);
            parities.push(Parity::Even);
            block_of.push((Parity::Even, ie));
            even_glob[ie] = n;
            ie += 1;
        } else {
            energies.push(odd_vals[io]);
            parities.push(Parity::Odd);
            block_of.push((Parity::Odd, io));
            odd_glob[io] = n;
            io += 1;
        }
    }
    UnperturbedSpectrum {
        l_max,
        v0,
        b,
        hbar,
        params_hash: params_hash(v0, b, hbar, l_max),
        energies,
        parities,
        even: ParityBlock {
            parity: Parity::Even,
            energies: even_vals,
            vectors: even_vecs,
            global_indices: even_glob,
        },
        odd: ParityBlock {
            parity: Parity::Odd,
            energies: odd_vals,
            vectors: odd_vecs,
            global_indices: odd_glob,
        },
        block_of,
    }
}

impl UnperturbedSpectrum {
    /// Rebuild a spectrum from stored parity blocks (cache deserialization);
    /// the global ordering is re-derived deterministically.
    pub fn from_blocks(
        l_max: usize,
        v0: f64,
        b: f64,
        hbar: f64,
        even: (Vec<f64>, RMat),
        odd: (Vec<f64>, RMat),
    ) -> Self {
        merge_blocks(l_max, v0, b, hbar, even, odd)
    }
}

/// Solve the unperturbed eigenproblem at the given truncation.
pub fn solve_unperturbed(
    p: &ModelParams,
    t: &BasisTruncation,
) -> Result<UnperturbedSpectrum, BasisError> {
    let l_max = t.l_max();
    let even_h = build_even_block(p, l_max);
    let odd_h = build_odd_block(p, l_max);

    let mut even_eig = sym_eigen(&even_h)?;
    let mut odd_eig = sym_eigen(&odd_h)?;
    fix_phases(&mut even_eig.vectors);
    fix_phases(&mut odd_eig.vectors);

    Ok(merge_blocks(
        l_max,
        p.v0,
        p.b,
        p.hbar,
        (even_eig.values, even_eig.vectors),
        (odd_eig.values, odd_eig.vectors),
    ))
}

/// Parity of a momentum-basis coefficient row under `θ → 2π − θ`
/// (`a_l ↔ a_{−l}`). Errors if the barrier is not centered at π or the state
/// mixes parities beyond tolerance.
pub fn classify_parity(row: &[f64], spec: &PotentialSpec) -> Result<Parity, BasisError> {
    let center = spec.center();
    if fmath::abs(center - core::f64::consts::PI) > 1e-9 {
        return Err(BasisError::AsymmetricBarrier { center });
    }
    let dim = row.len();
    assert!(dim % 2 == 1, "momentum row length must be odd");
    let l_max = dim / 2;
    let mut norm = 0.0;
    let mut even_defect = 0.0;
    let mut odd_defect = 0.0;
    for j in 0..dim {
        let a = row[j];
        let ar = row[2 * l_max - j];
        norm += a * a;
        even_defect += (a - ar) * (a - ar);
        odd_defect += (a + ar) * (a + ar);
    }
    let norm = fmath::sqrt(norm);
    let even_defect = fmath::sqrt(even_defect);
    let odd_defect = fmath::sqrt(odd_defect);
    let tol = 1e-8 * norm.max(1e-300);
    if even_defect <= tol {
        Ok(Parity::Even)
    } else if odd_defect <= tol {
        Ok(Parity::Odd)
    } else {
        Err(BasisError::MixedParity { even_defect, odd_defect })
    }
}

/// Doubling-based convergence check: the maximum relative change of the
/// lowest `dim/2` eigenvalues when `l_max` is doubled.
pub fn doubling_convergence(p: &ModelParams, t: &BasisTruncation) -> Result<f64, BasisError> {
    let coarse = solve_unperturbed(p, t)?;
    let fine = solve_unperturbed(p, &BasisTruncation::new(2 * t.l_max())?)?;
    let keep = coarse.converged_count();
    let mut worst: f64 = 0.0;
    for n in 0..keep {
        let a = coarse.energies[n];
        let b = fine.energies[n];
        let scale = fmath::abs(b).max(1.0);
        worst = worst.max(fmath::abs(a - b) / scale);
    }
    Ok(worst)
}
