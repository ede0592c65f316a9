//! Dense real matrices and a real-symmetric eigensolver.
//!
//! The solver is the classical Householder tridiagonalization followed by the
//! implicit-shift QL iteration, with the transform accumulated row-wise so the
//! hot rotation loop stays contiguous. Everything downstream (unperturbed
//! spectra and Floquet decompositions) reduces to this one primitive.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::fmath;

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct RMat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    #[inline(always)]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline(always)]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline(always)]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline(always)]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline(always)]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline(always)]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Two distinct rows, mutably.
    fn rows_pair_mut(&mut self, i: usize, j: usize) -> (&mut [f64], &mut [f64]) {
        assert!(i < j);
        let c = self.cols;
        let (lo, hi) = self.data.split_at_mut(j * c);
        (&mut lo[i * c..(i + 1) * c], &mut hi[..c])
    }

    /// `self * b`.
    pub fn mul(&self, b: &RMat) -> RMat {
        assert_eq!(self.cols, b.rows);
        let mut out = RMat::zeros(self.rows, b.cols);
        let n = b.cols;
        for i in 0..self.rows {
            let arow = self.row(i);
            let orow = &mut out.data[i * n..(i + 1) * n];
            for (k, &aik) in arow.iter().enumerate() {
                if aik == 0.0 {
                    continue;
                }
                let brow = &b.data[k * n..(k + 1) * n];
                for (o, &bv) in orow.iter_mut().zip(brow) {
                    *o += aik * bv;
                }
            }
        }
        out
    }

    /// `self * bᵀ`, computed as row-by-row dot products.
    pub fn mul_transpose_b(&self, b: &RMat) -> RMat {
        assert_eq!(self.cols, b.cols);
        let mut out = RMat::zeros(self.rows, b.rows);
        for i in 0..self.rows {
            let arow = self.row(i);
            let orow = &mut out.data[i * b.rows..(i + 1) * b.rows];
            for (j, o) in orow.iter_mut().enumerate() {
                *o = dot(arow, b.row(j));
            }
        }
        out
    }

    /// `self * v` for a dense vector.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `selfᵀ * v`.
    pub fn transpose_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += vi * a;
            }
        }
        out
    }

    pub fn transpose(&self) -> RMat {
        let mut out = RMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &v| m.max(fmath::abs(v)))
    }
}

#[inline(always)]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

/// Dense row-major complex matrix. Used by the explicit operator builders and
/// by tests; the production Floquet path keeps real/imaginary parts in `RMat`
/// pairs instead.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline(always)]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline(always)]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline(always)]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline(always)]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, b: &CMat) -> CMat {
        assert_eq!(self.cols, b.rows);
        let n = b.cols;
        let mut out = CMat::zeros(self.rows, n);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.data[i * self.cols + k];
                if aik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let brow = &b.data[k * n..(k + 1) * n];
                let orow = &mut out.data[i * n..(i + 1) * n];
                for (o, &bv) in orow.iter_mut().zip(brow) {
                    *o += aik * bv;
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMat {
        let mut out = CMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinalgError {
    /// QL iteration failed to converge on some eigenvalue.
    NoConvergence { index: usize },
    NotSquare,
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::NoConvergence { index } => {
                write!(f, "QL iteration did not converge at eigenvalue {index}")
            }
            LinalgError::NotSquare => write!(f, "matrix is not square"),
        }
    }
}

impl core::error::Error for LinalgError {}

/// Eigendecomposition of a real symmetric matrix.
///
/// `values` are ascending; row `r` of `vectors` is the unit eigenvector for
/// `values[r]`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: RMat,
}

/// Full eigendecomposition of a real symmetric matrix (upper triangle is
/// trusted; the lower one is ignored). O(n³) time, O(n²) space.
pub fn sym_eigen(a: &RMat) -> Result<SymEigen, LinalgError> {
    if a.rows != a.cols {
        return Err(LinalgError::NotSquare);
    }
    let n = a.rows;
    if n == 0 {
        return Ok(SymEigen { values: Vec::new(), vectors: RMat::zeros(0, 0) });
    }
    // symmetrize into working storage
    let mut w = RMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = if i <= j { a.at(i, j) } else { a.at(j, i) };
            w.set(i, j, v);
        }
    }

    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut h = vec![0.0; n];
    tridiagonalize(&mut w, &mut d, &mut e, &mut h);

    // accumulate Q = P_{n-1} … P_1 with rows of `qt` holding columns of Q
    let mut qt = RMat::identity(n);
    let mut u = vec![0.0; n];
    for i in 1..n {
        if h[i] == 0.0 {
            continue;
        }
        let inv_h = 1.0 / h[i];
        u[..i].copy_from_slice(&w.row(i)[..i]);
        for j in 0..i {
            let qrow = &mut qt.row_mut(j)[..i];
            let g = dot(&u[..i], qrow) * inv_h;
            for (q, &uv) in qrow.iter_mut().zip(&u[..i]) {
                *q -= g * uv;
            }
        }
    }

    ql_implicit(&mut d, &mut e, &mut qt)?;

    // sort ascending, permuting eigenvector rows
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(core::cmp::Ordering::Equal));
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = RMat::zeros(n, n);
    for (r, &src) in order.iter().enumerate() {
        vectors.row_mut(r).copy_from_slice(qt.row(src));
    }
    Ok(SymEigen { values, vectors })
}

/// Householder reduction to tridiagonal form. On return `d` holds the
/// diagonal, `e[1..]` the subdiagonal, `h[i]` the Householder norm of step
/// `i`, and row `i` of `w` (first `i` entries) the scaled reflector.
fn tridiagonalize(w: &mut RMat, d: &mut [f64], e: &mut [f64], h: &mut [f64]) {
    let n = d.len();
    let mut p = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        if l == 0 {
            e[i] = w.at(i, 0);
            h[i] = 0.0;
            continue;
        }
        let scale: f64 = w.row(i)[..=l].iter().map(|v| fmath::abs(*v)).sum();
        if scale == 0.0 {
            e[i] = w.at(i, l);
            h[i] = 0.0;
            continue;
        }
        let inv_scale = 1.0 / scale;
        for v in w.row_mut(i)[..=l].iter_mut() {
            *v *= inv_scale;
        }
        let mut sigma = 0.0;
        for &v in &w.row(i)[..=l] {
            sigma += v * v;
        }
        let f = w.at(i, l);
        let g = -fmath::copysign(fmath::sqrt(sigma), f);
        e[i] = scale * g;
        let hh = sigma - f * g;
        h[i] = hh;
        w.set(i, l, f - g);

        // p = A v / h over the leading block
        let inv_h = 1.0 / hh;
        for j in 0..=l {
            let mut s = 0.0;
            // row j of the symmetric block: use stored upper rows
            for k in 0..=l {
                let a_jk = if k <= j { w.at(j, k) } else { w.at(k, j) };
                s += a_jk * w.at(i, k);
            }
            p[j] = s * inv_h;
        }
        let kappa: f64 =
            (0..=l).map(|j| p[j] * w.at(i, j)).sum::<f64>() * (0.5 * inv_h);
        for j in 0..=l {
            p[j] -= kappa * w.at(i, j);
        }
        // rank-2 update A -= v qᵀ + q vᵀ; the lower triangle is authoritative
        // from here on and all reads above respect that
        for j in 0..=l {
            let vj = w.at(i, j);
            let qj = p[j];
            for k in 0..=j {
                let upd = vj * p[k] + qj * w.at(i, k);
                let cur = w.at(j, k);
                w.set(j, k, cur - upd);
            }
        }
    }
    e[0] = 0.0;
    for j in 0..n {
        d[j] = w.at(j, j);
    }
}

/// Implicit-shift QL on the tridiagonal (`d`, `e`), rotating the rows of `qt`
/// (columns of the accumulated transform).
fn ql_implicit(d: &mut [f64], e: &mut [f64], qt: &mut RMat) -> Result<(), LinalgError> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = fmath::abs(d[m]) + fmath::abs(d[m + 1]);
                if fmath::abs(e[m]) <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(LinalgError::NoConvergence { index: l });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = fmath::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + fmath::copysign(r, g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = fmath::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;

                let (row_i, row_i1) = qt.rows_pair_mut(i, i + 1);
                for (a, b2) in row_i.iter_mut().zip(row_i1.iter_mut()) {
                    f = *b2;
                    *b2 = s * *a + c * f;
                    *a = c * *a - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
