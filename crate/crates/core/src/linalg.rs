// Copyright 2026 rydeit Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra sized for small Hilbert spaces.
//!
//! Everything here targets matrices of dimension <= 81 (the vectorized
//! two-atom Liouvillian), so the implementations are straightforward
//! dense loops: LU with partial pivoting plus one step of iterative
//! refinement for the solver, and cyclic Jacobi for Hermitian
//! eigenvalues.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::Error;
use crate::Result;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = CMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Rank-one |i><j| basis matrix scaled by `value`.
    pub fn ket_bra(dim: usize, i: usize, j: usize, value: Complex64) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(i, j)] = value;
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == Complex64::ZERO {
                    continue;
                }
                let row_out = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                let row_rhs = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, r) in row_out.iter_mut().zip(row_rhs) {
                    *o += a * r;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "mul_vec dimension mismatch");
        let mut out = vec![Complex64::ZERO; self.rows];
        for (out_i, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            let mut acc = Complex64::ZERO;
            for (a, x) in row.iter().zip(v) {
                acc += a * x;
            }
            *out_i = acc;
        }
        out
    }

    pub fn add(&self, rhs: &CMatrix) -> CMatrix {
        self.add_scaled(rhs, Complex64::ONE)
    }

    pub fn sub(&self, rhs: &CMatrix) -> CMatrix {
        self.add_scaled(rhs, -Complex64::ONE)
    }

    pub fn add_scaled(&self, rhs: &CMatrix, factor: Complex64) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        out.add_scaled_in_place(rhs, factor);
        out
    }

    pub fn add_scaled_in_place(&mut self, rhs: &CMatrix, factor: Complex64) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (o, r) in self.data.iter_mut().zip(&rhs.data) {
            *o += factor * r;
        }
    }

    pub fn scale(&self, factor: Complex64) -> CMatrix {
        let mut out = self.clone();
        for x in &mut out.data {
            *x *= factor;
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> CMatrix {
        let mut out = self.clone();
        for x in &mut out.data {
            *x = x.conj();
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        let worst = self.data.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        libm::sqrt(worst)
    }

    /// max_ij |A[i,j] - conj(A[j,i])|.
    pub fn hermiticity_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
                worst = worst.max(d);
            }
        }
        libm::sqrt(worst)
    }

    /// Kronecker product; entry ((a*cols_b + b), (c*cols_b + d)) = A[a,c] B[b,d].
    pub fn kron(&self, rhs: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows * rhs.rows, self.cols * rhs.cols);
        for a in 0..self.rows {
            for c in 0..self.cols {
                let s = self[(a, c)];
                if s == Complex64::ZERO {
                    continue;
                }
                for b in 0..rhs.rows {
                    for d in 0..rhs.cols {
                        out[(a * rhs.rows + b, c * rhs.cols + d)] = s * rhs[(b, d)];
                    }
                }
            }
        }
        out
    }

    /// Ascending eigenvalues of a Hermitian matrix (cyclic Jacobi on the
    /// Hermitian average, flat working buffer).
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = vec![Complex64::ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                // Hermitian average so tiny asymmetries cannot stall the
                // rotations.
                a[i * n + j] = 0.5 * (self.data[i * self.cols + j] + self.data[j * self.cols + i].conj());
            }
        }
        let scale_sq = a.iter().map(|z| z.norm_sqr()).fold(1.0, f64::max);
        let tol_sq = 1e-30 * scale_sq;
        for _sweep in 0..60 {
            let mut off_sq = 0.0f64;
            for p in 0..n {
                for q in (p + 1)..n {
                    off_sq = off_sq.max(a[p * n + q].norm_sqr());
                }
            }
            if off_sq < tol_sq {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    let mag_sq = apq.norm_sqr();
                    if mag_sq < tol_sq * 1e-4 {
                        continue;
                    }
                    let mag = libm::sqrt(mag_sq);
                    let phase = apq / mag;
                    let app = a[p * n + p].re;
                    let aqq = a[q * n + q].re;
                    let tau = (aqq - app) / (2.0 * mag);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + libm::sqrt(1.0 + tau * tau))
                    } else {
                        -1.0 / (-tau + libm::sqrt(1.0 + tau * tau))
                    };
                    let c = 1.0 / libm::sqrt(1.0 + t * t);
                    let s = t * c;
                    let s_phase = s * phase;
                    // Column update A <- A J.
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s_phase.conj() * akq;
                        a[k * n + q] = s_phase * akp + c * akq;
                    }
                    // Row update A <- J^dag A.
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s_phase * aqk;
                        a[q * n + k] = s_phase.conj() * apk + c * aqk;
                    }
                    a[p * n + q] = Complex64::ZERO;
                    a[q * n + p] = Complex64::ZERO;
                }
            }
        }
        let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
        eig.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
        eig
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factors of a square matrix with partial pivoting, stored flat.
pub struct LuFactors {
    n: usize,
    data: Vec<Complex64>,
    pivots: Vec<usize>,
    /// max |U_ii| / min |U_ii|; a cheap conditioning proxy.
    pub cond_proxy: f64,
}

impl LuFactors {
    pub fn factor(a: &CMatrix) -> Result<LuFactors> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                found: a.cols(),
            });
        }
        let n = a.rows();
        let mut data = a.data().to_vec();
        let mut pivots = vec![0usize; n];
        for col in 0..n {
            let mut best = col;
            let mut best_mag = data[col * n + col].norm_sqr();
            for row in (col + 1)..n {
                let mag = data[row * n + col].norm_sqr();
                if mag > best_mag {
                    best = row;
                    best_mag = mag;
                }
            }
            if best_mag == 0.0 {
                return Err(Error::SingularSystem);
            }
            pivots[col] = best;
            if best != col {
                for j in 0..n {
                    data.swap(col * n + j, best * n + j);
                }
            }
            let (upper, lower) = data.split_at_mut((col + 1) * n);
            let pivot_row = &upper[col * n..(col + 1) * n];
            let pivot_inv = pivot_row[col].finv();
            for row_chunk in lower.chunks_exact_mut(n) {
                let factor = row_chunk[col] * pivot_inv;
                row_chunk[col] = factor;
                if factor == Complex64::ZERO {
                    continue;
                }
                for (x, p) in row_chunk[col + 1..].iter_mut().zip(&pivot_row[col + 1..]) {
                    *x -= factor * p;
                }
            }
        }
        let mut umax = 0.0f64;
        let mut umin = f64::INFINITY;
        for i in 0..n {
            let mag = data[i * n + i].norm_sqr();
            umax = umax.max(mag);
            umin = umin.min(mag);
        }
        let (umax, umin) = (libm::sqrt(umax), libm::sqrt(umin));
        let cond_proxy = if umin > 0.0 { umax / umin } else { f64::INFINITY };
        Ok(LuFactors {
            n,
            data,
            pivots,
            cond_proxy,
        })
    }

    /// Solve using the stored factors (forward/back substitution).
    pub fn solve_factored(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<Complex64> = b.to_vec();
        for col in 0..n {
            x.swap(col, self.pivots[col]);
        }
        // Ly = Pb
        for i in 1..n {
            let row = &self.data[i * n..i * n + i];
            let mut acc = x[i];
            for (l, xj) in row.iter().zip(&x[..i]) {
                acc -= l * xj;
            }
            x[i] = acc;
        }
        // Ux = y
        for i in (0..n).rev() {
            let mut acc = x[i];
            let row = &self.data[i * n + i + 1..(i + 1) * n];
            for (u, xj) in row.iter().zip(&x[i + 1..]) {
                acc -= u * xj;
            }
            x[i] = acc * self.data[i * n + i].finv();
        }
        x
    }

    /// Solve `a x = b` with one step of iterative refinement against the
    /// original matrix.
    pub fn solve(&self, a: &CMatrix, b: &[Complex64]) -> Vec<Complex64> {
        let mut x = self.solve_factored(b);
        let ax = a.mul_vec(&x);
        let r: Vec<Complex64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let dx = self.solve_factored(&r);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
        x
    }
}
