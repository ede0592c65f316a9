//! Quantum and classical dynamics of a periodically kicked particle in a
//! finite square-well ring potential.
//!
//! The crate builds the unperturbed spectrum of `H0 = p²/2 + V_sq(θ)` in a
//! truncated momentum basis, assembles and diagonalizes the one-period Floquet
//! operator, and provides the analyses that characterize its eigenstates:
//! shifted-and-averaged decay profiles with exponential/power-law fits,
//! matrix-element decay with crossover detection, participation ratios and the
//! `μ = E_max/V0` classification, quasi-energy spacing statistics with a Brody
//! fit, the tight-binding rewriting of the eigenproblem, and the classical
//! stroboscopic map.
//!
//! Everything here is pure computation on `alloc` containers; file formats,
//! caching and the command-line front end live in the companion `kwell-cli`
//! crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub(crate) mod fmath;

pub mod basis;
pub mod classical;
pub mod floquet;
pub mod linalg;
pub mod localization;
pub mod model;
pub mod rng;
pub mod special;
pub mod spectral;
pub mod tightbinding;

pub use basis::{BasisTruncation, Parity, UnperturbedSpectrum};
pub use floquet::{EvolvedState, FloquetDecomposition, FloquetMatrix};
pub use localization::{DecayProfile, FitKind, FitResult, MatrixDecayCurve, MuRecord, Regime};
pub use model::{ModelParams, PotentialSpec};
pub use spectral::SpacingStats;

/// Full angle of the ring; the kicking-field wavelength is fixed to this.
pub const TWO_PI: f64 = core::f64::consts::TAU;
