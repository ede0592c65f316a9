//! Model parameters and the stationary square-well potential on the ring.
//!
//! The well/barrier geometry is fixed by the barrier width `b` alone: with the
//! kicking wavelength set to 2π and `b + w = 2π`, the barrier occupies
//! `[Rπ, Rπ + b]` with `R = w/2π`, which is always centered on `θ = π`. That
//! reflection symmetry is what the parity machinery downstream relies on.

use core::fmt;

use num_complex::Complex64;

use crate::fmath;
use crate::TWO_PI;

/// Physical parameter set of the kicked particle in a finite square well.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Kick strength.
    pub k: f64,
    /// Barrier height (dimensionless energy).
    pub v0: f64,
    /// Barrier width in radians.
    pub b: f64,
    /// Well width, always `2π − b`.
    pub w: f64,
    /// Scaled Planck constant.
    pub hbar: f64,
    /// Well-width ratio `w / 2π`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    NonFinite,
    BarrierWidth { b: f64 },
    NegativeHeight { v0: f64 },
    NegativeKick { k: f64 },
    NonPositiveHbar { hbar: f64 },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::NonFinite => write!(f, "parameters must be finite"),
            ModelError::BarrierWidth { b } => {
                write!(f, "barrier width b = {b} outside (0, 2π)")
            }
            ModelError::NegativeHeight { v0 } => write!(f, "negative barrier height V0 = {v0}"),
            ModelError::NegativeKick { k } => write!(f, "negative kick strength k = {k}"),
            ModelError::NonPositiveHbar { hbar } => {
                write!(f, "scaled Planck constant must be positive, got {hbar}")
            }
        }
    }
}

impl core::error::Error for ModelError {}

impl ModelParams {
    /// Validate a raw parameter tuple; `w` and `R` are derived from `b`.
    pub fn new(k: f64, v0: f64, b: f64, hbar: f64) -> Result<Self, ModelError> {
        if !(k.is_finite() && v0.is_finite() && b.is_finite() && hbar.is_finite()) {
            return Err(ModelError::NonFinite);
        }
        if !(b > 0.0 && b < TWO_PI) {
            return Err(ModelError::BarrierWidth { b });
        }
        if v0 < 0.0 {
            return Err(ModelError::NegativeHeight { v0 });
        }
        if k < 0.0 {
            return Err(ModelError::NegativeKick { k });
        }
        if hbar <= 0.0 {
            return Err(ModelError::NonPositiveHbar { hbar });
        }
        let w = TWO_PI - b;
        Ok(Self { k, v0, b, w, hbar, ratio: w / TWO_PI })
    }

    /// Barrier interval `[Rπ, Rπ + b]`.
    pub fn potential_spec(&self) -> PotentialSpec {
        let start = self.ratio * core::f64::consts::PI;
        PotentialSpec { barrier_start: start, barrier_end: start + self.b }
    }

    /// Kick phase `k/ħ_s`, the argument of the Bessel factors.
    pub fn kick_phase(&self) -> f64 {
        self.k / self.hbar
    }
}

/// Barrier interval of the stationary potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSpec {
    pub barrier_start: f64,
    pub barrier_end: f64,
}

impl PotentialSpec {
    /// The barrier midpoint; π for every valid parameter set.
    pub fn center(&self) -> f64 {
        0.5 * (self.barrier_start + self.barrier_end)
    }
}

/// Reduce an angle into `[0, 2π)`.
pub fn reduce_angle(theta: f64) -> f64 {
    let mut t = theta - TWO_PI * fmath::floor(theta / TWO_PI);
    // floor rounding can land exactly on 2π for tiny negative inputs
    if t >= TWO_PI {
        t -= TWO_PI;
    }
    if t < 0.0 {
        t += TWO_PI;
    }
    t
}

/// The square-well potential `V_sq(θ)`: `V0` on the barrier, 0 in the well,
/// right-continuous at both edges.
pub fn eval_square_well(p: &ModelParams, theta: f64) -> f64 {
    let t = reduce_angle(theta);
    let spec = p.potential_spec();
    if t >= spec.barrier_start && t < spec.barrier_end {
        p.v0
    } else {
        0.0
    }
}

/// Fourier coefficient `(1/2π) ∫ V_sq(θ) e^{−inθ} dθ` in closed form.
///
/// With the barrier centered at π the coefficients are real:
/// `c_0 = V0·b/2π`, `c_n = (−1)^n V0 sin(n b/2) / (π n)`.
pub fn square_well_fourier(p: &ModelParams, n: i64) -> Complex64 {
    if n == 0 {
        return Complex64::new(p.v0 * p.b / TWO_PI, 0.0);
    }
    let nf = n as f64;
    let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let re = sign * p.v0 * fmath::sin(nf * p.b / 2.0) / (core::f64::consts::PI * nf);
    Complex64::new(re, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = core::f64::consts::PI;

    fn paper_params() -> ModelParams {
        ModelParams::new(4.25, 5000.0, 1.4 * PI, 1.0).unwrap()
    }

    #[test]
    fn validates_paper_parameters() {
        let p = paper_params();
        assert!((p.w - 0.6 * PI).abs() < 1e-15);
        assert!((p.ratio - 0.3).abs() < 1e-15);
        let spec = p.potential_spec();
        assert!((spec.barrier_start - 0.3 * PI).abs() < 1e-15);
        assert!((spec.barrier_end - 1.7 * PI).abs() < 1e-15);
        assert!((spec.center() - PI).abs() < 1e-12);
    }

    #[test]
    fn accepts_free_particle_limit() {
        let p = ModelParams::new(0.0, 0.0, PI, 1.0).unwrap();
        assert_eq!(p.v0, 0.0);
        assert_eq!(p.k, 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            ModelParams::new(1.0, 1.0, 2.5 * PI, 1.0),
            Err(ModelError::BarrierWidth { .. })
        ));
        assert!(matches!(
            ModelParams::new(1.0, -1.0, PI, 1.0),
            Err(ModelError::NegativeHeight { .. })
        ));
        assert!(matches!(
            ModelParams::new(-1.0, 1.0, PI, 1.0),
            Err(ModelError::NegativeKick { .. })
        ));
        assert!(matches!(
            ModelParams::new(1.0, 1.0, PI, 0.0),
            Err(ModelError::NonPositiveHbar { .. })
        ));
        assert!(matches!(
            ModelParams::new(f64::NAN, 1.0, PI, 1.0),
            Err(ModelError::NonFinite)
        ));
    }

    #[test]
    fn square_well_values() {
        let p = paper_params();
        assert_eq!(eval_square_well(&p, PI), 5000.0);
        assert_eq!(eval_square_well(&p, 0.0), 0.0);
        // right-continuity at the edges
        let spec = p.potential_spec();
        assert_eq!(eval_square_well(&p, spec.barrier_start), 5000.0);
        assert_eq!(eval_square_well(&p, spec.barrier_end), 0.0);
        // KR limit
        let free = ModelParams::new(4.25, 0.0, 1.4 * PI, 1.0).unwrap();
        for i in 0..32 {
            assert_eq!(eval_square_well(&free, TWO_PI * i as f64 / 32.0), 0.0);
        }
    }

    #[test]
    fn angle_reduction() {
        assert_eq!(reduce_angle(0.0), 0.0);
        assert!((reduce_angle(3.0 * PI) - PI).abs() < 1e-14);
        assert!((reduce_angle(-0.5) - (TWO_PI - 0.5)).abs() < 1e-14);
        let r = reduce_angle(-1e-18);
        assert!((0.0..TWO_PI).contains(&r));
    }

    fn quadrature_fourier(p: &ModelParams, n: i64) -> Complex64 {
        // midpoint rule; the integrand is piecewise constant so integrate the
        // two analytic pieces with fine sampling instead
        let m = 400_000;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..m {
            let th = TWO_PI * (j as f64 + 0.5) / m as f64;
            let v = eval_square_well(p, th);
            let (s, c) = fmath::sincos(-(n as f64) * th);
            acc += Complex64::new(v * c, v * s);
        }
        acc / Complex64::new(m as f64, 0.0)
    }

    #[test]
    fn fourier_closed_form_matches_quadrature() {
        let p = paper_params();
        for n in [0_i64, 1, 2, 3, 5, 8, 13] {
            let closed = square_well_fourier(&p, n);
            let quad = quadrature_fourier(&p, n);
            assert!(
                (closed - quad).norm() < 2e-2,
                "n = {n}: closed {closed} quad {quad}"
            );
        }
        // sharper oracle on n = 3 via the exact piecewise integral
        let spec = p.potential_spec();
        let n = 3.0;
        let exact = Complex64::new(0.0, 1.0) * p.v0 / (TWO_PI * n)
            * (Complex64::new(0.0, -n * spec.barrier_end).exp()
                - Complex64::new(0.0, -n * spec.barrier_start).exp());
        assert!((square_well_fourier(&p, 3) - exact).norm() < 1e-10);
    }

    #[test]
    fn fourier_zero_mode_and_symmetries() {
        let p = paper_params();
        assert!((square_well_fourier(&p, 0).re - p.v0 * p.b / TWO_PI).abs() < 1e-9);
        let free = ModelParams::new(1.0, 0.0, PI, 1.0).unwrap();
        for n in -6..=6 {
            assert_eq!(square_well_fourier(&free, n), Complex64::new(0.0, 0.0));
        }
        for n in 1..=64 {
            let plus = square_well_fourier(&p, n);
            let minus = square_well_fourier(&p, -n);
            assert!((plus - minus.conj()).norm() < 1e-14);
            // reflection symmetry about π: c_n e^{inπ} real
            assert!(plus.im.abs() < 1e-14);
        }
    }

    #[test]
    fn parseval_partial_sums() {
        let p = paper_params();
        let target = p.v0 * p.v0 * p.b / TWO_PI;
        let mut sum = square_well_fourier(&p, 0).norm_sqr();
        let mut prev = sum;
        for n in 1..=4000_i64 {
            sum += 2.0 * square_well_fourier(&p, n).norm_sqr();
            assert!(sum >= prev);
            prev = sum;
        }
        assert!(sum <= target + 1e-9);
        assert!((target - sum) / target < 1e-3, "tail {}", (target - sum) / target);
    }

    #[test]
    fn truncated_series_converges_in_l2() {
        let p = paper_params();
        let grid = 4096;
        let mse = |order: i64| -> f64 {
            let mut acc = 0.0;
            for j in 0..grid {
                let th = TWO_PI * j as f64 / grid as f64;
                let mut v = square_well_fourier(&p, 0).re;
                for n in 1..=order {
                    let c = square_well_fourier(&p, n).re;
                    v += 2.0 * c * fmath::cos(n as f64 * th);
                }
                let d = v - eval_square_well(&p, th);
                acc += d * d;
            }
            acc / grid as f64
        };
        let coarse = mse(16);
        let mid = mse(64);
        let fine = mse(256);
        assert!(mid < coarse);
        assert!(fine < mid);
    }
}
