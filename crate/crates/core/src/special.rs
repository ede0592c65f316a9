//! Special functions needed by the kick propagator and the Brody fit.

use alloc::vec;
use alloc::vec::Vec;

use crate::fmath;

/// Bessel functions of the first kind `J_0(z) ... J_{n_max}(z)` for `z >= 0`,
/// by Miller's downward recurrence with the `J_0 + 2 Σ J_2k = 1`
/// normalization. Orders whose magnitude underflows are returned as exact
/// zeros.
pub fn bessel_j_upto(z: f64, n_max: usize) -> Vec<f64> {
    assert!(z >= 0.0 && z.is_finite());
    let mut out = vec![0.0; n_max + 1];
    if z == 0.0 {
        out[0] = 1.0;
        return out;
    }

    // Smallest order beyond which |J_n(z)| ~ (z/2)^n / n! is below 1e-305.
    let mut n_cut = z as usize + 2;
    let lhalf = fmath::ln(z / 2.0);
    while n_cut < n_max + 2 {
        let ln_mag = n_cut as f64 * lhalf - ln_gamma(n_cut as f64 + 1.0);
        if ln_mag < -702.0 {
            break;
        }
        n_cut += 1;
    }
    let top = n_cut + 20 + (2.0 * fmath::sqrt(n_cut as f64)) as usize;

    let mut work = vec![0.0_f64; top + 2];
    work[top + 1] = 0.0;
    work[top] = 1e-300;
    for n in (1..=top).rev() {
        let next = 2.0 * n as f64 / z * work[n] - work[n + 1];
        work[n - 1] = next;
        if fmath::abs(next) > 1e260 {
            let inv = 1e-260;
            for w in work[n - 1..].iter_mut() {
                *w *= inv;
            }
        }
    }
    let mut norm = work[0];
    let mut k = 2;
    while k <= top {
        norm += 2.0 * work[k];
        k += 2;
    }
    let inv_norm = 1.0 / norm;
    let copy_to = n_max.min(n_cut);
    for n in 0..=copy_to {
        out[n] = work[n] * inv_norm;
    }
    // beyond n_cut the true values underflow; leave them at zero
    out
}

/// Natural log of the gamma function (Lanczos, g = 7, 9 terms).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    const PI: f64 = core::f64::consts::PI;
    if x < 0.5 {
        // reflection
        return fmath::ln(PI / fmath::sin(PI * x)) - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * fmath::ln(2.0 * PI) + (x + 0.5) * fmath::ln(t) - t + fmath::ln(acc)
}
