// Copyright 2026 rydeit Contributors
// SPDX-License-Identifier: Apache-2.0

//! Lindblad generators over small tensor-product Hilbert spaces and the
//! direct steady-state solve.
//!
//! The master equation is
//!
//!   drho/dt = -i [H, rho] + sum_k gamma_k (L_k rho L_k^dag
//!             - 1/2 {L_k^dag L_k, rho})
//!
//! assembled in vectorized (superoperator) form. Vectorization is
//! column-stacking: vec(rho)[j*d + i] = rho[i, j], so that
//! vec(A rho B) = (B^T kron A) vec(rho). With every entry of H and every
//! rate expressed in the same frequency unit (MHz here), the kernel of
//! the generator is the physical steady state.
//!
//! The steady state is obtained by replacing the first row of the
//! generator with the trace constraint and solving the dense linear
//! system; for the 9-level pair model that system is 81 x 81.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::Error;
use crate::linalg::{CMatrix, LuFactors};
use crate::Result;

/// Tolerances enforced on every steady-state solve.
#[derive(Debug, Clone, Copy)]
pub struct NumericalSettings {
    /// Max |rho - rho^dag| entry allowed on the raw solution.
    pub hermiticity_tol: f64,
    /// Allowed deviation of trace(rho) from one.
    pub trace_tol: f64,
    /// Most negative admissible eigenvalue of rho.
    pub eigenvalue_floor: f64,
    /// Max |L vec(rho)| entry allowed on the returned solution.
    pub residual_tol: f64,
    /// Conditioning proxy above which the steady state is reported
    /// non-unique.
    pub cond_threshold: f64,
    /// Generators whose largest entry exceeds this (MHz) are normalized
    /// down to it before solving and checking. The kernel is invariant
    /// under the rescaling; without it, multi-GHz Stark-shift outliers
    /// would make an f64 residual of 1e-9 unreachable.
    pub scale_reference_mhz: f64,
}

impl Default for NumericalSettings {
    fn default() -> Self {
        NumericalSettings {
            hermiticity_tol: 1e-10,
            trace_tol: 1e-10,
            eigenvalue_floor: -1e-9,
            residual_tol: 1e-9,
            cond_threshold: 1e12,
            scale_reference_mhz: 100.0,
        }
    }
}

/// One dissipation channel: collapse operator plus rate.
#[derive(Debug, Clone)]
pub struct LindbladTerm {
    pub operator: CMatrix,
    /// Rate in the same frequency unit as the Hamiltonian entries (MHz).
    pub rate_mhz: f64,
}

impl LindbladTerm {
    pub fn new(operator: CMatrix, rate_mhz: f64) -> Result<Self> {
        if !operator.is_square() {
            return Err(Error::DimensionMismatch {
                expected: operator.rows(),
                found: operator.cols(),
            });
        }
        if !rate_mhz.is_finite() || rate_mhz < 0.0 {
            return Err(Error::invalid("rate_mhz", alloc::format!("must be >= 0, got {rate_mhz}")));
        }
        Ok(LindbladTerm { operator, rate_mhz })
    }
}

/// Vectorized Liouvillian acting on column-stacked density matrices.
#[derive(Debug, Clone)]
pub struct Superoperator {
    hilbert_dim: usize,
    mat: CMatrix,
}

impl Superoperator {
    /// Wrap an already assembled generator matrix (dimension d^2 x d^2).
    pub(crate) fn from_matrix(hilbert_dim: usize, mat: CMatrix) -> Self {
        debug_assert_eq!(mat.rows(), hilbert_dim * hilbert_dim);
        Superoperator { hilbert_dim, mat }
    }

    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    /// Dimension of the vectorized space (d^2).
    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    /// Apply the generator: returns unvec(L vec(rho)).
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let v = vectorize(rho);
        unvectorize(&self.mat.mul_vec(&v), self.hilbert_dim)
    }
}

/// Validated density matrix: Hermitian, unit trace, positive within floor.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validate an arbitrary matrix against the physicality tolerances.
    pub fn new(mat: CMatrix, settings: &NumericalSettings) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch {
                expected: mat.rows(),
                found: mat.cols(),
            });
        }
        let defect = mat.hermiticity_defect();
        if defect > settings.hermiticity_tol {
            return Err(Error::NotHermitian {
                defect,
                tol: settings.hermiticity_tol,
            });
        }
        let trace_dev = (mat.trace() - Complex64::ONE).norm();
        if trace_dev > settings.trace_tol {
            return Err(Error::HygieneViolation {
                check: "trace",
                value: trace_dev,
                tol: settings.trace_tol,
            });
        }
        let min_eig = mat.hermitian_eigenvalues()[0];
        if min_eig < settings.eigenvalue_floor {
            return Err(Error::HygieneViolation {
                check: "min_eigenvalue",
                value: min_eig,
                tol: settings.eigenvalue_floor,
            });
        }
        Ok(DensityMatrix { mat })
    }

    /// Wrap a matrix known to satisfy the invariants by construction
    /// (e.g. a partial trace of an already validated state).
    fn from_validated(mat: CMatrix) -> Self {
        DensityMatrix { mat }
    }

    /// Pure-state projector |psi><psi| from normalized amplitudes.
    pub fn pure_state(amplitudes: &[Complex64]) -> Self {
        let d = amplitudes.len();
        let mat = CMatrix::from_fn(d, d, |i, j| amplitudes[i] * amplitudes[j].conj());
        DensityMatrix { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn element(&self, i: usize, j: usize) -> Complex64 {
        self.mat[(i, j)]
    }

    pub fn population(&self, i: usize) -> f64 {
        self.mat[(i, i)].re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.mat.hermitian_eigenvalues()[0]
    }
}

/// Diagnostics from one steady-state solve, before any cleanup was
/// applied to the raw linear-system solution.
#[derive(Debug, Clone, Copy)]
pub struct SolveReport {
    pub hermiticity_defect: f64,
    pub trace_deviation: f64,
    pub min_eigenvalue: f64,
    pub residual_inf: f64,
    pub cond_proxy: f64,
}

/// Column-stacked vectorization index of element (i, j).
pub fn vec_index(i: usize, j: usize, dim: usize) -> usize {
    j * dim + i
}

pub fn vectorize(rho: &CMatrix) -> Vec<Complex64> {
    let d = rho.rows();
    let mut v = vec![Complex64::ZERO; d * d];
    for i in 0..d {
        for j in 0..d {
            v[vec_index(i, j, d)] = rho[(i, j)];
        }
    }
    v
}

pub fn unvectorize(v: &[Complex64], dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |i, j| v[vec_index(i, j, dim)])
}

/// Tensor product with subsystem-1-major ordering: basis state
/// |i>_1 (x) |j>_2 sits at index i * dim(B) + j.
pub fn tensor_product(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert!(a.is_square() && b.is_square(), "tensor_product wants square operators");
    a.kron(b)
}

/// Assemble the vectorized generator for Hamiltonian `h` (entries in
/// MHz) and the given dissipation channels.
pub fn build_liouvillian(h: &CMatrix, terms: &[LindbladTerm]) -> Result<Superoperator> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch {
            expected: h.rows(),
            found: h.cols(),
        });
    }
    let d = h.rows();
    let defect = h.hermiticity_defect();
    if defect > 1e-10 * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian {
            defect,
            tol: 1e-10,
        });
    }
    for term in terms {
        if term.operator.rows() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: term.operator.rows(),
            });
        }
    }

    let eye = CMatrix::identity(d);
    // -i (vec(H rho) - vec(rho H)) = -i ((I kron H) - (H^T kron I)) vec(rho)
    let mut l = eye
        .kron(h)
        .sub(&h.transpose().kron(&eye))
        .scale(Complex64::new(0.0, -1.0));
    for term in terms {
        if term.rate_mhz == 0.0 {
            continue;
        }
        let rate = Complex64::new(term.rate_mhz, 0.0);
        let op = &term.operator;
        let op_dag_op = op.dagger().matmul(op);
        // gamma (conj(L) kron L) vec(rho) = gamma vec(L rho L^dag)
        l.add_scaled_in_place(&op.conj().kron(op), rate);
        l.add_scaled_in_place(&eye.kron(&op_dag_op), -0.5 * rate);
        l.add_scaled_in_place(&op_dag_op.transpose().kron(&eye), -0.5 * rate);
    }
    Ok(Superoperator {
        hilbert_dim: d,
        mat: l,
    })
}

/// Steady state of the generator (see module docs for the method).
pub fn steady_state(l: &Superoperator, settings: &NumericalSettings) -> Result<DensityMatrix> {
    steady_state_with_report(l, settings).map(|(rho, _)| rho)
}

/// Steady state plus solver diagnostics.
pub fn steady_state_with_report(
    l: &Superoperator,
    settings: &NumericalSettings,
) -> Result<(DensityMatrix, SolveReport)> {
    let d = l.hilbert_dim();
    let n = l.dim();

    let overscale = (l.matrix().max_abs() / settings.scale_reference_mhz).max(1.0);
    let generator = if overscale > 1.0 {
        l.matrix().scale(Complex64::new(1.0 / overscale, 0.0))
    } else {
        l.matrix().clone()
    };

    // Replace the drho_00/dt row with the trace constraint. Trace
    // preservation makes the diagonal-element rows of L linearly
    // dependent, so no information is lost.
    let mut a = generator.clone();
    for col in 0..n {
        a[(0, col)] = Complex64::ZERO;
    }
    for i in 0..d {
        a[(0, vec_index(i, i, d))] = Complex64::ONE;
    }
    let mut b = vec![Complex64::ZERO; n];
    b[0] = Complex64::ONE;

    let lu = match LuFactors::factor(&a) {
        Ok(lu) => lu,
        Err(Error::SingularSystem) => {
            return Err(Error::NonUniqueSteadyState {
                cond: f64::INFINITY,
                threshold: settings.cond_threshold,
            })
        }
        Err(e) => return Err(e),
    };
    if lu.cond_proxy > settings.cond_threshold {
        return Err(Error::NonUniqueSteadyState {
            cond: lu.cond_proxy,
            threshold: settings.cond_threshold,
        });
    }
    let x = lu.solve(&a, &b);
    let raw = unvectorize(&x, d);

    // Raw-solution diagnostics, checked before cleanup.
    let hermiticity_defect = raw.hermiticity_defect();
    if hermiticity_defect > settings.hermiticity_tol {
        return Err(Error::HygieneViolation {
            check: "hermiticity",
            value: hermiticity_defect,
            tol: settings.hermiticity_tol,
        });
    }
    let trace_raw = raw.trace();
    let trace_deviation = (trace_raw - Complex64::ONE).norm();
    if trace_deviation > settings.trace_tol {
        return Err(Error::HygieneViolation {
            check: "trace",
            value: trace_deviation,
            tol: settings.trace_tol,
        });
    }

    // Exact Hermitian part, renormalized; this is what gets returned.
    let mut rho = raw.add(&raw.dagger()).scale(Complex64::new(0.5, 0.0));
    let trace = rho.trace().re;
    rho = rho.scale(Complex64::new(1.0 / trace, 0.0));

    let residual_inf = libm::sqrt(
        generator
            .mul_vec(&vectorize(&rho))
            .iter()
            .map(|z| z.norm_sqr())
            .fold(0.0f64, f64::max),
    );
    if residual_inf > settings.residual_tol {
        return Err(Error::HygieneViolation {
            check: "residual",
            value: residual_inf,
            tol: settings.residual_tol,
        });
    }
    let min_eigenvalue = rho.hermitian_eigenvalues()[0];
    if min_eigenvalue < settings.eigenvalue_floor {
        return Err(Error::HygieneViolation {
            check: "min_eigenvalue",
            value: min_eigenvalue,
            tol: settings.eigenvalue_floor,
        });
    }

    let report = SolveReport {
        hermiticity_defect,
        trace_deviation,
        min_eigenvalue,
        residual_inf,
        cond_proxy: lu.cond_proxy,
    };
    Ok((DensityMatrix::from_validated(rho), report))
}

/// Which subsystem a partial trace keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Reduced density matrix over one factor of a bipartite space with
/// subsystem dimensions `dims`.
pub fn partial_trace(
    rho: &DensityMatrix,
    keep: Subsystem,
    dims: (usize, usize),
) -> Result<DensityMatrix> {
    let (d1, d2) = dims;
    if rho.dim() != d1 * d2 {
        return Err(Error::DimensionMismatch {
            expected: d1 * d2,
            found: rho.dim(),
        });
    }
    let m = rho.matrix();
    let reduced = match keep {
        Subsystem::First => CMatrix::from_fn(d1, d1, |a, c| {
            (0..d2).map(|b| m[(a * d2 + b, c * d2 + b)]).sum()
        }),
        Subsystem::Second => CMatrix::from_fn(d2, d2, |b, d| {
            (0..d1).map(|a| m[(a * d2 + b, a * d2 + d)]).sum()
        }),
    };
    Ok(DensityMatrix::from_validated(reduced))
}
