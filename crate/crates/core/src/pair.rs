// Copyright 2026 rydeit Contributors
// SPDX-License-Identifier: Apache-2.0

//! The interacting-pair model: two ladder atoms (|g>, |e>, |r>) driven by
//! probe and coupling lasers, with the doubly excited Rydberg state
//! shifted by the pair interaction.
//!
//! Single-atom rotating-frame Hamiltonian (entries in MHz, ordinary
//! frequency):
//!
//!   H1 = -dp |e><e| - (dp + dc) |r><r|
//!        + (Wp/2)(|g><e| + h.c.) + (Wc/2)(|e><r| + h.c.)
//!
//! Pair Hamiltonian: H = H1 (x) I + I (x) H1 + v |rr><rr|, with v > 0 for
//! the repulsive van der Waals convention used throughout.
//!
//! Decoherence per atom: spontaneous decay e -> g at Gamma_e and r -> g
//! at Gamma_r, plus pure-dephasing projectors |e><e| and |r><r| whose
//! rates are chosen so the g-e coherence acquires the probe linewidth
//! and the g-r coherence the probe-coupling relative linewidth. The
//! dephasing projectors also damp the e-r coherence by the same amounts;
//! that side effect comes with the minimal pure-dephasing model.
//!
//! The probe susceptibility is read off the reduced single-atom
//! coherence: chi = -2 N d^2 / (eps0 hbar Wp) * rho_eg. The minus sign
//! pairs with the +Wp/2 coupling convention above (the drive enters the
//! rotating frame with a pi field phase), so that a resonant two-level
//! absorber has chi_I > 0 and the dispersion Re chi is positive below
//! resonance, matching the classical Lorentz-oscillator convention.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::Error;
use crate::linalg::CMatrix;
use crate::lindblad::{
    build_liouvillian, partial_trace, steady_state_with_report, tensor_product, DensityMatrix,
    LindbladTerm, NumericalSettings, SolveReport, Subsystem, Superoperator,
};
use crate::units;
use crate::Result;

/// Single-atom levels, in basis order.
pub const G: usize = 0;
pub const E: usize = 1;
pub const R: usize = 2;

/// Pair-basis index of |i>_1 (x) |j>_2 under the tensor-product
/// ordering, i.e. (gg, ge, gr, eg, ee, er, rg, re, rr).
pub fn pair_index(i: usize, j: usize) -> usize {
    3 * i + j
}

/// Probe and coupling drive parameters. All values are ordinary
/// frequencies in MHz (omega/2pi).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserParams {
    /// Probe Rabi frequency.
    pub omega_p_mhz: f64,
    /// Coupling Rabi frequency.
    pub omega_c_mhz: f64,
    /// Probe detuning.
    pub delta_p_mhz: f64,
    /// Coupling detuning.
    pub delta_c_mhz: f64,
    /// Probe laser linewidth (extra decay of the g-e coherence).
    pub gamma_p_mhz: f64,
    /// Probe-coupling relative linewidth (extra decay of the g-r coherence).
    pub gamma_rel_mhz: f64,
}

impl LaserParams {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("omega_p_mhz", self.omega_p_mhz),
            ("omega_c_mhz", self.omega_c_mhz),
            ("gamma_p_mhz", self.gamma_p_mhz),
            ("gamma_rel_mhz", self.gamma_rel_mhz),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::invalid(name, alloc::format!("must be >= 0, got {value}")));
            }
        }
        if !self.delta_p_mhz.is_finite() || !self.delta_c_mhz.is_finite() {
            return Err(Error::invalid("delta", "detunings must be finite"));
        }
        Ok(())
    }

    pub fn with_delta_p(mut self, delta_p_mhz: f64) -> Self {
        self.delta_p_mhz = delta_p_mhz;
        self
    }

    pub fn with_delta_c(mut self, delta_c_mhz: f64) -> Self {
        self.delta_c_mhz = delta_c_mhz;
        self
    }

    pub fn with_omega_p(mut self, omega_p_mhz: f64) -> Self {
        self.omega_p_mhz = omega_p_mhz;
        self
    }
}

/// Per-atom constants of the probe transition and the Rydberg decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomParams {
    /// Excited-state decay rate, MHz.
    pub gamma_e_mhz: f64,
    /// Rydberg decay rate, MHz (routed entirely to |g>).
    pub gamma_r_mhz: f64,
    /// Probe transition dipole moment, C m.
    pub dipole_cm: f64,
    /// Probe wavelength, m.
    pub lambda_p_m: f64,
}

impl AtomParams {
    /// Rb 5P3/2 probe transition with the dipole moment fixed by the
    /// resonant-cross-section relation, and the given Rydberg lifetime.
    pub fn rb87(rydberg_lifetime_us: f64) -> Self {
        let gamma_e_mhz = 6.07;
        let lambda_p_m = 780.241e-9;
        AtomParams {
            gamma_e_mhz,
            gamma_r_mhz: units::lifetime_us_to_rate_mhz(rydberg_lifetime_us),
            dipole_cm: units::dipole_from_cross_section(gamma_e_mhz, lambda_p_m),
            lambda_p_m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("gamma_e_mhz", self.gamma_e_mhz),
            ("gamma_r_mhz", self.gamma_r_mhz),
            ("dipole_cm", self.dipole_cm),
            ("lambda_p_m", self.lambda_p_m),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::invalid(name, alloc::format!("must be > 0, got {value}")));
            }
        }
        Ok(())
    }

    /// Probe wave-vector 2 pi / lambda, 1/m.
    pub fn wavevector(&self) -> f64 {
        2.0 * core::f64::consts::PI / self.lambda_p_m
    }
}

/// Rotating-frame single-atom Hamiltonian (3x3, MHz).
pub fn single_atom_hamiltonian(lasers: &LaserParams) -> CMatrix {
    single_atom_hamiltonian_with_phase(lasers, 0.0)
}

/// Single-atom Hamiltonian with the probe carrying the relative
/// probe-coupling phase `phi_r`: the probe raising operator picks up
/// e^{-i phi_r}. With this gauge the analytic dark and blockaded states
/// below are exact null vectors for every phi_r, and phi_r = 0
/// reproduces the real-coupling form.
pub fn single_atom_hamiltonian_with_phase(lasers: &LaserParams, phi_r: f64) -> CMatrix {
    let mut h = CMatrix::zeros(3, 3);
    h[(E, E)] = Complex64::new(-lasers.delta_p_mhz, 0.0);
    h[(R, R)] = Complex64::new(-(lasers.delta_p_mhz + lasers.delta_c_mhz), 0.0);
    let probe = 0.5 * lasers.omega_p_mhz * Complex64::new(libm::cos(phi_r), -libm::sin(phi_r));
    h[(E, G)] = probe;
    h[(G, E)] = probe.conj();
    let coupling = Complex64::new(0.5 * lasers.omega_c_mhz, 0.0);
    h[(R, E)] = coupling;
    h[(E, R)] = coupling;
    h
}

/// Pair Hamiltonian H1 (x) I + I (x) H1 + v |rr><rr| (9x9, MHz).
/// Positive `v_mhz` is the repulsive van der Waals convention.
pub fn pair_hamiltonian(lasers: &LaserParams, v_mhz: f64) -> CMatrix {
    pair_hamiltonian_with_phase(lasers, v_mhz, 0.0)
}

pub fn pair_hamiltonian_with_phase(lasers: &LaserParams, v_mhz: f64, phi_r: f64) -> CMatrix {
    let h1 = single_atom_hamiltonian_with_phase(lasers, phi_r);
    let eye = CMatrix::identity(3);
    let mut h = tensor_product(&h1, &eye);
    h.add_scaled_in_place(&tensor_product(&eye, &h1), Complex64::ONE);
    let rr = pair_index(R, R);
    h[(rr, rr)] += Complex64::new(v_mhz, 0.0);
    h
}

/// Restriction of a pair operator to the 8-dimensional blockade
/// subspace (the |rr> row and column deleted).
pub fn blockade_restrict(h: &CMatrix) -> CMatrix {
    let rr = pair_index(R, R);
    CMatrix::from_fn(8, 8, |i, j| {
        let si = if i >= rr { i + 1 } else { i };
        let sj = if j >= rr { j + 1 } else { j };
        h[(si, sj)]
    })
}

/// Single-atom dissipation channels: decay e->g at Gamma_e, decay r->g
/// at Gamma_r, dephasing projectors |e><e| at 2 gamma_p and |r><r| at
/// 2 gamma_rel. Zero-rate channels are dropped.
pub fn single_atom_decoherence(atom: &AtomParams, lasers: &LaserParams) -> Vec<LindbladTerm> {
    let candidates = [
        (CMatrix::ket_bra(3, G, E, Complex64::ONE), atom.gamma_e_mhz),
        (CMatrix::ket_bra(3, G, R, Complex64::ONE), atom.gamma_r_mhz),
        (CMatrix::ket_bra(3, E, E, Complex64::ONE), 2.0 * lasers.gamma_p_mhz),
        (CMatrix::ket_bra(3, R, R, Complex64::ONE), 2.0 * lasers.gamma_rel_mhz),
    ];
    candidates
        .into_iter()
        .filter(|(_, rate)| *rate > 0.0)
        .map(|(op, rate)| LindbladTerm::new(op, rate).expect("valid channel"))
        .collect()
}

/// The single-atom channels lifted to pair space on both atoms.
pub fn decoherence_terms(atom: &AtomParams, lasers: &LaserParams) -> Vec<LindbladTerm> {
    let eye = CMatrix::identity(3);
    let mut terms = Vec::new();
    for term in single_atom_decoherence(atom, lasers) {
        terms.push(
            LindbladTerm::new(tensor_product(&term.operator, &eye), term.rate_mhz)
                .expect("valid channel"),
        );
        terms.push(
            LindbladTerm::new(tensor_product(&eye, &term.operator), term.rate_mhz)
                .expect("valid channel"),
        );
    }
    terms
}

/// Normalized pair state over the tensor-product basis
/// (gg, ge, gr, eg, ee, er, rg, re, rr).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 9 {
            return Err(Error::DimensionMismatch {
                expected: 9,
                found: amps.len(),
            });
        }
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "amplitudes",
                alloc::format!("norm^2 deviates from 1 by {:.2e}", norm_sq - 1.0),
            ));
        }
        Ok(StateVector { amps })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Amplitude on |i>_1 (x) |j>_2.
    pub fn amp(&self, i: usize, j: usize) -> Complex64 {
        self.amps[pair_index(i, j)]
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix::pure_state(&self.amps)
    }
}

/// Two-atom dark state at two-photon resonance, with tan t = Wp / Wc:
/// cos^2 t |gg> - sin t cos t e^{-i phi} (|gr> + |rg>) plus
/// sin^2 t e^{-2 i phi} |rr>. The doubly excited amplitude carries
/// e^{-2 i phi} so the state stays a null vector of the phase-consistent
/// pair Hamiltonian for every phi (the conventions coincide at phi = 0).
pub fn dark_state(theta: f64, phi: f64) -> StateVector {
    let (s, c) = (libm::sin(theta), libm::cos(theta));
    let phase = Complex64::new(libm::cos(phi), -libm::sin(phi));
    let mut amps = alloc::vec![Complex64::ZERO; 9];
    amps[pair_index(G, G)] = Complex64::new(c * c, 0.0);
    amps[pair_index(G, R)] = -s * c * phase;
    amps[pair_index(R, G)] = -s * c * phase;
    amps[pair_index(R, R)] = s * s * phase * phase;
    StateVector { amps }
}

/// Blockaded zero-energy eigenstate: the doubly excited Rydberg
/// component is replaced by |ee>, giving (cos^2 t - sin^2 t)|gg>
/// minus sin t cos t e^{-i phi}(|gr> + |rg>) plus
/// sin^2 t e^{-2 i phi} |ee>, normalized by sqrt(cos^4 t + 2 sin^4 t).
pub fn blockaded_state(theta: f64, phi: f64) -> StateVector {
    let (s, c) = (libm::sin(theta), libm::cos(theta));
    let norm = libm::sqrt(c * c * c * c + 2.0 * s * s * s * s);
    let phase = Complex64::new(libm::cos(phi), -libm::sin(phi));
    let mut amps = alloc::vec![Complex64::ZERO; 9];
    amps[pair_index(G, G)] = Complex64::new((c * c - s * s) / norm, 0.0);
    amps[pair_index(G, R)] = -s * c / norm * phase;
    amps[pair_index(R, G)] = -s * c / norm * phase;
    amps[pair_index(E, E)] = s * s / norm * phase * phase;
    StateVector { amps }
}

/// Complex probe susceptibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Susceptibility {
    value: Complex64,
}

impl Susceptibility {
    /// Wraps a computed value, enforcing passivity (chi_I above -1e-12).
    pub fn new(value: Complex64) -> Result<Self> {
        if value.im < -1e-12 {
            return Err(Error::HygieneViolation {
                check: "chi_imag_passivity",
                value: value.im,
                tol: -1e-12,
            });
        }
        Ok(Susceptibility { value })
    }

    pub fn value(&self) -> Complex64 {
        self.value
    }

    pub fn chi_r(&self) -> f64 {
        self.value.re
    }

    pub fn chi_i(&self) -> f64 {
        self.value.im
    }
}

/// 2 N d^2 / (eps0 hbar Wp): the real prefactor of the susceptibility.
/// `omega_p_mhz` converts to rad/s internally.
pub fn susceptibility_prefactor(atom: &AtomParams, density_m3: f64, omega_p_mhz: f64) -> f64 {
    let omega_rad = units::mhz_to_rad_per_s(omega_p_mhz);
    2.0 * density_m3 * atom.dipole_cm * atom.dipole_cm / (units::EPSILON_0 * units::HBAR * omega_rad)
}

/// chi from a solved density matrix: prefactor times -rho_eg (see the
/// module docs for the sign convention).
fn chi_from_state(prefactor: f64, rho: &DensityMatrix) -> Result<Susceptibility> {
    Susceptibility::new(-prefactor * rho.element(E, G))
}

fn check_chi_inputs(lasers: &LaserParams, atom: &AtomParams, density_m3: f64) -> Result<()> {
    lasers.validate()?;
    atom.validate()?;
    if !density_m3.is_finite() || density_m3 <= 0.0 {
        return Err(Error::invalid(
            "density_m3",
            alloc::format!("must be > 0, got {density_m3}"),
        ));
    }
    if lasers.omega_p_mhz <= 0.0 {
        return Err(Error::invalid(
            "omega_p_mhz",
            "susceptibility is defined via the probe field; omega_p must be > 0",
        ));
    }
    Ok(())
}

/// Reusable three-level solver: the dissipator block of the generator
/// depends only on rates, so sweeps over detunings rebuild just the
/// Hamiltonian part.
pub struct SingleAtomEit {
    lasers: LaserParams,
    atom: AtomParams,
    density_m3: f64,
    prefactor: f64,
    dissipator: Superoperator,
}

impl SingleAtomEit {
    pub fn new(lasers: LaserParams, atom: AtomParams, density_m3: f64) -> Result<Self> {
        check_chi_inputs(&lasers, &atom, density_m3)?;
        let terms = single_atom_decoherence(&atom, &lasers);
        let dissipator = build_liouvillian(&CMatrix::zeros(3, 3), &terms)?;
        let prefactor = susceptibility_prefactor(&atom, density_m3, lasers.omega_p_mhz);
        Ok(SingleAtomEit {
            lasers,
            atom,
            density_m3,
            prefactor,
            dissipator,
        })
    }

    pub fn atom(&self) -> &AtomParams {
        &self.atom
    }

    pub fn density_m3(&self) -> f64 {
        self.density_m3
    }

    /// Steady state at the given detunings (other parameters fixed).
    pub fn steady_state_at(
        &self,
        delta_p_mhz: f64,
        delta_c_mhz: f64,
        settings: &NumericalSettings,
    ) -> Result<(DensityMatrix, SolveReport)> {
        let lasers = self
            .lasers
            .with_delta_p(delta_p_mhz)
            .with_delta_c(delta_c_mhz);
        let h = single_atom_hamiltonian(&lasers);
        let l = add_hamiltonian(&self.dissipator, &h)?;
        steady_state_with_report(&l, settings)
    }

    pub fn chi_at(
        &self,
        delta_p_mhz: f64,
        delta_c_mhz: f64,
        settings: &NumericalSettings,
    ) -> Result<(Susceptibility, SolveReport)> {
        let (rho, report) = self.steady_state_at(delta_p_mhz, delta_c_mhz, settings)?;
        let chi = chi_from_state(self.prefactor, &rho)?;
        Ok((chi, report))
    }
}

/// Reusable pair solver; see `SingleAtomEit` for the caching rationale.
pub struct PairEit {
    lasers: LaserParams,
    prefactor: f64,
    dissipator: Superoperator,
}

impl PairEit {
    pub fn new(lasers: LaserParams, atom: AtomParams, density_m3: f64) -> Result<Self> {
        check_chi_inputs(&lasers, &atom, density_m3)?;
        let terms = decoherence_terms(&atom, &lasers);
        let dissipator = build_liouvillian(&CMatrix::zeros(9, 9), &terms)?;
        let prefactor = susceptibility_prefactor(&atom, density_m3, lasers.omega_p_mhz);
        Ok(PairEit {
            lasers,
            prefactor,
            dissipator,
        })
    }

    /// Pair steady state at probe detuning `delta_p_mhz` and interaction
    /// `v_mhz` (coupling detuning from the stored parameters).
    pub fn steady_state_at(
        &self,
        delta_p_mhz: f64,
        v_mhz: f64,
        settings: &NumericalSettings,
    ) -> Result<(DensityMatrix, SolveReport)> {
        let lasers = self.lasers.with_delta_p(delta_p_mhz);
        let h = pair_hamiltonian(&lasers, v_mhz);
        let l = add_hamiltonian(&self.dissipator, &h)?;
        steady_state_with_report(&l, settings)
    }

    /// Susceptibility from the reduced atom-1 coherence.
    pub fn chi_at(
        &self,
        delta_p_mhz: f64,
        v_mhz: f64,
        settings: &NumericalSettings,
    ) -> Result<(Susceptibility, SolveReport)> {
        let (rho, report) = self.steady_state_at(delta_p_mhz, v_mhz, settings)?;
        let reduced = partial_trace(&rho, Subsystem::First, (3, 3))?;
        let chi = chi_from_state(self.prefactor, &reduced)?;
        Ok((chi, report))
    }
}

/// Dissipator-plus-Hamiltonian assembly shared by the two solvers: adds
/// the commutator part -i((I kron H) - (H^T kron I)) entrywise onto a
/// copy of the precomputed dissipator. Equivalent to going through
/// `build_liouvillian`, but this runs once per grid point so it skips
/// the intermediate Kronecker products.
fn add_hamiltonian(dissipator: &Superoperator, h: &CMatrix) -> Result<Superoperator> {
    let d = h.rows();
    debug_assert_eq!(d * d, dissipator.dim());
    let mut m = dissipator.matrix().clone();
    for a in 0..d {
        for b in 0..d {
            let row = a * d + b;
            for c in 0..d {
                for e in 0..d {
                    let mut v = Complex64::ZERO;
                    if a == c {
                        v += h[(b, e)];
                    }
                    if b == e {
                        v -= h[(c, a)];
                    }
                    if v != Complex64::ZERO {
                        // -i v
                        m[(row, c * d + e)] += Complex64::new(v.im, -v.re);
                    }
                }
            }
        }
    }
    Ok(Superoperator::from_matrix(d, m))
}

/// Steady-state pair susceptibility at the given interaction strength.
pub fn pair_susceptibility(
    lasers: &LaserParams,
    atom: &AtomParams,
    v_mhz: f64,
    density_m3: f64,
    settings: &NumericalSettings,
) -> Result<Susceptibility> {
    let solver = PairEit::new(*lasers, *atom, density_m3)?;
    solver
        .chi_at(lasers.delta_p_mhz, v_mhz, settings)
        .map(|(chi, _)| chi)
}

/// Non-interacting three-level susceptibility.
pub fn single_atom_susceptibility(
    lasers: &LaserParams,
    atom: &AtomParams,
    density_m3: f64,
    settings: &NumericalSettings,
) -> Result<Susceptibility> {
    let solver = SingleAtomEit::new(*lasers, *atom, density_m3)?;
    solver
        .chi_at(lasers.delta_p_mhz, lasers.delta_c_mhz, settings)
        .map(|(chi, _)| chi)
}

/// Residual |H psi|_inf of a candidate null vector, used by tests and
/// the acceptance suite.
pub fn null_vector_residual(h: &CMatrix, state: &[Complex64]) -> f64 {
    h.mul_vec(state).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig2_lasers(omega_p_mhz: f64) -> LaserParams {
        LaserParams {
            omega_p_mhz,
            omega_c_mhz: 2.0,
            delta_p_mhz: 0.0,
            delta_c_mhz: 0.0,
            gamma_p_mhz: 0.3,
            gamma_rel_mhz: 0.15,
        }
    }

    fn atom_48s() -> AtomParams {
        AtomParams::rb87(58.0)
    }

    fn rand_unit(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 33) as f64) / (u32::MAX as f64)
    }

    #[test]
    fn hamiltonian_zero_params_is_zero() {
        let lasers = LaserParams {
            omega_p_mhz: 0.0,
            omega_c_mhz: 0.0,
            delta_p_mhz: 0.0,
            delta_c_mhz: 0.0,
            gamma_p_mhz: 0.0,
            gamma_rel_mhz: 0.0,
        };
        assert_eq!(single_atom_hamiltonian(&lasers).max_abs(), 0.0);
    }

    #[test]
    fn hamiltonian_resonant_equal_rabi_eigenvalues() {
        // Characteristic polynomial gives {0, +-Wp/sqrt(2)}.
        let lasers = fig2_lasers(2.0);
        let h = single_atom_hamiltonian(&lasers);
        assert!(h.hermiticity_defect() < 1e-15);
        let eig = h.hermitian_eigenvalues();
        assert_relative_eq!(eig[0], -2.0 / core::f64::consts::SQRT_2, epsilon = 1e-12);
        assert_relative_eq!(eig[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(eig[2], 2.0 / core::f64::consts::SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn single_atom_dark_state_is_null_vector_for_any_phase() {
        let mut seed = 21;
        for _ in 0..20 {
            let theta = 0.1 + 1.2 * rand_unit(&mut seed);
            let phi = 2.0 * core::f64::consts::PI * rand_unit(&mut seed);
            let omega_c = 2.0;
            let lasers = fig2_lasers(omega_c * libm::tan(theta));
            let h = single_atom_hamiltonian_with_phase(&lasers, phi);
            let dark = [
                Complex64::new(libm::cos(theta), 0.0),
                Complex64::ZERO,
                -libm::sin(theta) * Complex64::new(libm::cos(phi), -libm::sin(phi)),
            ];
            assert!(null_vector_residual(&h, &dark) < 1e-12);
        }
    }

    #[test]
    fn pair_hamiltonian_v_zero_is_sum_of_singles() {
        let lasers = fig2_lasers(1.0).with_delta_p(-3.0).with_delta_c(0.7);
        let h1 = single_atom_hamiltonian(&lasers);
        let eye = CMatrix::identity(3);
        let expected = tensor_product(&h1, &eye).add(&tensor_product(&eye, &h1));
        let h = pair_hamiltonian(&lasers, 0.0);
        assert!(h.sub(&expected).max_abs() < 1e-15);
        // Exchange symmetry of the pair Hamiltonian.
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let a = h[(pair_index(i, j), pair_index(k, l))];
                        let b = h[(pair_index(j, i), pair_index(l, k))];
                        assert!((a - b).norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn dark_state_examples_and_null_vector() {
        // theta = 0 is |gg>.
        let gg = dark_state(0.0, 0.0);
        assert_relative_eq!(gg.amp(G, G).re, 1.0, epsilon = 1e-15);

        // theta = pi/4, phi = 0: (1/2, -1/2, -1/2, 1/2) on (gg, gr, rg, rr).
        let d = dark_state(core::f64::consts::FRAC_PI_4, 0.0);
        assert_relative_eq!(d.amp(G, G).re, 0.5, epsilon = 1e-12);
        assert_relative_eq!(d.amp(G, R).re, -0.5, epsilon = 1e-12);
        assert_relative_eq!(d.amp(R, G).re, -0.5, epsilon = 1e-12);
        assert_relative_eq!(d.amp(R, R).re, 0.5, epsilon = 1e-12);

        // Null vector of the resonant pair Hamiltonian with v = 0 for
        // random theta, phi.
        let mut seed = 33;
        for _ in 0..20 {
            let theta = 0.1 + 1.2 * rand_unit(&mut seed);
            let phi = 2.0 * core::f64::consts::PI * rand_unit(&mut seed);
            let lasers = fig2_lasers(2.0 * libm::tan(theta));
            let h = pair_hamiltonian_with_phase(&lasers, 0.0, phi);
            let state = dark_state(theta, phi);
            assert!(null_vector_residual(&h, state.amplitudes()) < 1e-12);
            let norm_sq: f64 = state.amplitudes().iter().map(|a| a.norm_sqr()).sum();
            assert_relative_eq!(norm_sq, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn blockaded_state_examples_and_null_vector() {
        let gg = blockaded_state(0.0, 0.0);
        assert_relative_eq!(gg.amp(G, G).re, 1.0, epsilon = 1e-15);

        // theta = pi/4: the |gg> component vanishes and the rest is
        // (0, -1/sqrt(3), -1/sqrt(3), 1/sqrt(3)) on (gg, gr, rg, ee).
        let b = blockaded_state(core::f64::consts::FRAC_PI_4, 0.0);
        let inv_sqrt3 = 1.0 / libm::sqrt(3.0);
        assert!(b.amp(G, G).norm() < 1e-15);
        assert_relative_eq!(b.amp(G, R).re, -inv_sqrt3, epsilon = 1e-12);
        assert_relative_eq!(b.amp(R, G).re, -inv_sqrt3, epsilon = 1e-12);
        assert_relative_eq!(b.amp(E, E).re, inv_sqrt3, epsilon = 1e-12);
        assert!(b.amp(R, R).norm() < 1e-15);

        // Annihilated by the blockade-restricted resonant Hamiltonian.
        let mut seed = 55;
        for _ in 0..20 {
            let theta = 0.1 + 1.2 * rand_unit(&mut seed);
            let phi = 2.0 * core::f64::consts::PI * rand_unit(&mut seed);
            let lasers = fig2_lasers(2.0 * libm::tan(theta));
            let h8 = blockade_restrict(&pair_hamiltonian_with_phase(&lasers, 0.0, phi));
            let state = blockaded_state(theta, phi);
            let restricted: alloc::vec::Vec<Complex64> = state.amplitudes()[..8].to_vec();
            assert!(null_vector_residual(&h8, &restricted) < 1e-12);
        }
    }

    #[test]
    fn decoherence_channels_drop_zero_rates() {
        let atom = AtomParams {
            gamma_r_mhz: 1e-6,
            ..atom_48s()
        };
        let lasers = LaserParams {
            gamma_p_mhz: 0.0,
            gamma_rel_mhz: 0.0,
            ..fig2_lasers(1.0)
        };
        // Only the two spontaneous-decay channels per atom survive.
        assert_eq!(single_atom_decoherence(&atom, &lasers).len(), 2);
        assert_eq!(decoherence_terms(&atom, &lasers).len(), 4);

        let full = decoherence_terms(&atom_48s(), &fig2_lasers(1.0));
        assert_eq!(full.len(), 8);
    }

    #[test]
    fn rydberg_rate_from_48s_lifetime() {
        let atom = atom_48s();
        assert_relative_eq!(atom.gamma_r_mhz, 1.0 / (2.0 * core::f64::consts::PI * 58.0), epsilon = 1e-15);
    }

    #[test]
    fn two_level_oracle_fixes_units() {
        // Coupling off, weak probe, resonance: k chi_I / N equals the
        // resonant cross-section 3 lambda^2 / 2 pi to 0.1%.
        let atom = atom_48s();
        let lasers = LaserParams {
            omega_c_mhz: 0.0,
            ..fig2_lasers(1e-3 * atom.gamma_e_mhz)
        };
        let lasers = LaserParams {
            gamma_p_mhz: 0.0,
            gamma_rel_mhz: 0.0,
            ..lasers
        };
        let density = 2.2e16;
        let settings = NumericalSettings::default();
        let chi = single_atom_susceptibility(&lasers, &atom, density, &settings).unwrap();
        let sigma0 = units::resonant_cross_section(atom.lambda_p_m);
        let expected = density * sigma0 / atom.wavevector();
        assert_relative_eq!(chi.chi_i(), expected, max_relative = 1e-3);

        // Same through the pair route (v irrelevant with the coupling off).
        let chi_pair = pair_susceptibility(&lasers, &atom, 37.0, density, &settings).unwrap();
        assert_relative_eq!(chi_pair.chi_i(), expected, max_relative = 1e-3);
    }

    #[test]
    fn weak_probe_matches_analytic_three_level_formula() {
        // Independent oracle, the textbook weak-probe EIT profile:
        // chi = pref * i(Wp/2) / [(g_ge - i dp) + (Wc/2)^2 / (g_gr - i(dp + dc))]
        // with g_ge = Ge/2 + gp, g_gr = Gr/2 + grel. Checked off
        // resonance and on; also pins the dispersion sign (Re chi > 0
        // below resonance).
        let atom = atom_48s();
        let lasers = fig2_lasers(1e-3);
        let density = 2.2e16;
        let settings = NumericalSettings::default();
        let solver = SingleAtomEit::new(lasers, atom, density).unwrap();
        let pref = susceptibility_prefactor(&atom, density, lasers.omega_p_mhz);
        let g_ge = atom.gamma_e_mhz / 2.0 + lasers.gamma_p_mhz;
        let g_gr = atom.gamma_r_mhz / 2.0 + lasers.gamma_rel_mhz;
        for delta_p in [-6.0, -1.3, 0.0, 0.4, 2.0, 9.0] {
            let (chi, _) = solver.chi_at(delta_p, 0.0, &settings).unwrap();
            let denom = Complex64::new(g_ge, -delta_p)
                + Complex64::new(0.25 * lasers.omega_c_mhz * lasers.omega_c_mhz, 0.0)
                    / Complex64::new(g_gr, -delta_p);
            let expected = pref * (Complex64::new(0.0, 0.5 * lasers.omega_p_mhz) / denom);
            assert_relative_eq!(chi.chi_i(), expected.im, max_relative = 1e-5);
            assert_relative_eq!(chi.chi_r(), expected.re, max_relative = 1e-4, epsilon = 1e-12);
        }
        let (red, _) = solver.chi_at(-6.0, 0.0, &settings).unwrap();
        assert!(red.chi_r() > 0.0, "below resonance the medium is high-index");
    }

    #[test]
    fn relative_linewidth_broadens_transparency_window() {
        // FWHM of the transparency dip, from the analytic weak-probe
        // profile evaluated numerically on a fine grid.
        let atom = atom_48s();
        let density = 2.2e16;
        let settings = NumericalSettings::default();
        let fwhm = |gamma_rel: f64| -> f64 {
            let lasers = LaserParams {
                gamma_rel_mhz: gamma_rel,
                gamma_p_mhz: 0.0,
                ..fig2_lasers(1e-3)
            };
            let solver = SingleAtomEit::new(lasers, atom, density).unwrap();
            let (floor, _) = solver.chi_at(0.0, 0.0, &settings).unwrap();
            // Reference absorption at the dip edge scale.
            let (shoulder, _) = solver.chi_at(1.0, 0.0, &settings).unwrap();
            let half = 0.5 * (floor.chi_i() + shoulder.chi_i());
            // March outward until chi_i crosses the half level.
            let mut x = 0.0;
            while x < 1.0 {
                x += 1e-3;
                let (chi, _) = solver.chi_at(x, 0.0, &settings).unwrap();
                if chi.chi_i() > half {
                    break;
                }
            }
            2.0 * x
        };
        assert!(fwhm(0.15) > fwhm(0.0));
    }

    #[test]
    fn transparency_with_interactions_and_phase_invariance() {
        let atom = atom_48s();
        let settings = NumericalSettings::default();
        let density = 2.2e16;

        // v = 0, no linewidths, tiny Rydberg decay: full transparency.
        let clean = LaserParams {
            gamma_p_mhz: 0.0,
            gamma_rel_mhz: 0.0,
            ..fig2_lasers(1.0)
        };
        let clean_atom = AtomParams {
            gamma_r_mhz: 1e-8,
            ..atom
        };
        let chi_dark = pair_susceptibility(&clean, &clean_atom, 0.0, density, &settings).unwrap();
        let two_level = LaserParams {
            omega_c_mhz: 0.0,
            ..clean
        };
        let chi_2l = pair_susceptibility(&two_level, &clean_atom, 0.0, density, &settings).unwrap();
        assert!(chi_dark.chi_i() < 1e-6 * chi_2l.chi_i());

        // Two-photon resonance away from single-photon resonance stays dark.
        let detuned = clean.with_delta_p(3.0).with_delta_c(-3.0);
        let chi_det = pair_susceptibility(&detuned, &clean_atom, 0.0, density, &settings).unwrap();
        assert!(chi_det.chi_i() < 1e-5 * chi_2l.chi_i());

        // Blockade breaks the transparency: chi_I(v = 10 MHz) strictly
        // above the non-interacting value at fig. 2 parameters.
        let lasers = fig2_lasers(1.0);
        let chi_v0 = pair_susceptibility(&lasers, &atom, 0.0, density, &settings).unwrap();
        let chi_v10 = pair_susceptibility(&lasers, &atom, 10.0, density, &settings).unwrap();
        assert!(chi_v10.chi_i() > chi_v0.chi_i());

        // The relative laser phase moves no observable: populations and
        // |rho_ge| match the phase-zero solve.
        let mut seed = 77;
        for _ in 0..4 {
            let phi = 2.0 * core::f64::consts::PI * rand_unit(&mut seed);
            let h0 = pair_hamiltonian(&lasers, 10.0);
            let hp = pair_hamiltonian_with_phase(&lasers, 10.0, phi);
            let terms = decoherence_terms(&atom, &lasers);
            let l0 = build_liouvillian(&h0, &terms).unwrap();
            let lp = build_liouvillian(&hp, &terms).unwrap();
            let rho0 = steady_state_with_report(&l0, &settings).unwrap().0;
            let rhop = steady_state_with_report(&lp, &settings).unwrap().0;
            for k in 0..9 {
                assert_relative_eq!(rho0.population(k), rhop.population(k), epsilon = 1e-10);
            }
            let r0 = partial_trace(&rho0, Subsystem::First, (3, 3)).unwrap();
            let rp = partial_trace(&rhop, Subsystem::First, (3, 3)).unwrap();
            assert_relative_eq!(
                r0.element(G, E).norm(),
                rp.element(G, E).norm(),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn pair_steady_state_exchange_symmetry_and_factorization() {
        let atom = atom_48s();
        let lasers = fig2_lasers(1.0);
        let settings = NumericalSettings::default();
        let density = 2.2e16;
        let solver = PairEit::new(lasers, atom, density).unwrap();

        let (rho, _) = solver.steady_state_at(0.4, 10.0, &settings).unwrap();
        let red1 = partial_trace(&rho, Subsystem::First, (3, 3)).unwrap();
        let red2 = partial_trace(&rho, Subsystem::Second, (3, 3)).unwrap();
        assert!(red1.matrix().sub(red2.matrix()).max_abs() < 1e-10);

        // Swap commutation: rho[(ij),(kl)] = rho[(ji),(lk)].
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let a = rho.element(pair_index(i, j), pair_index(k, l));
                        let b = rho.element(pair_index(j, i), pair_index(l, k));
                        assert!((a - b).norm() < 1e-10);
                    }
                }
            }
        }

        // v = 0 factorizes into the single-atom susceptibility.
        let chi_pair = pair_susceptibility(&lasers, &atom, 0.0, density, &settings).unwrap();
        let chi_single = single_atom_susceptibility(&lasers, &atom, density, &settings).unwrap();
        assert_relative_eq!(chi_pair.chi_i(), chi_single.chi_i(), max_relative = 1e-9);
        assert_relative_eq!(chi_pair.chi_r(), chi_single.chi_r(), max_relative = 1e-9, epsilon = 1e-16);
    }

    #[test]
    fn blockade_monotone_and_saturating() {
        let atom = atom_48s();
        let lasers = fig2_lasers(1.0);
        let settings = NumericalSettings::default();
        let density = 2.2e16;
        let solver = PairEit::new(lasers, atom, density).unwrap();
        let chi = |v: f64| solver.chi_at(0.0, v, &settings).unwrap().0.chi_i();
        let values: Vec<f64> = [0.0, 1.0, 2.0, 5.0, 10.0].iter().map(|&v| chi(v)).collect();
        for pair in values.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-15, "chi_I must not decrease with v");
        }
        let chi10 = chi(10.0);
        let chi20 = chi(20.0);
        assert!((chi10 - chi20).abs() / chi10 < 0.05);
    }

    #[test]
    fn sign_reversal_with_probe_power() {
        let atom = atom_48s();
        let settings = NumericalSettings::default();
        let density = 2.2e16;
        let chi = |omega_p: f64, v: f64| {
            pair_susceptibility(&fig2_lasers(omega_p), &atom, v, density, &settings)
                .unwrap()
                .chi_i()
        };
        // Blockaded: absorption grows with probe power; non-interacting:
        // it falls.
        assert!(chi(1.0, 10.0) > chi(0.3, 10.0));
        assert!(chi(1.0, 0.0) < chi(0.3, 0.0));
    }

    #[test]
    fn chi_rejects_zero_probe_and_bad_density() {
        let atom = atom_48s();
        let lasers = fig2_lasers(0.0);
        let settings = NumericalSettings::default();
        assert!(pair_susceptibility(&lasers, &atom, 0.0, 2.2e16, &settings).is_err());
        assert!(pair_susceptibility(&fig2_lasers(1.0), &atom, 0.0, -1.0, &settings).is_err());
    }
}
