// Copyright 2026 rydeit Contributors
// SPDX-License-Identifier: Apache-2.0

//! Ensemble averaging: van der Waals pair shifts, blockade radii, the
//! nearest-neighbour separation distribution for a Poissonian gas, and
//! the quadrature of the pair susceptibility over that distribution.

use num_complex::Complex64;

use crate::error::Error;
use crate::pair::{AtomParams, LaserParams, PairEit, Susceptibility};
use crate::lindblad::NumericalSettings;
use crate::Result;

/// Per-state constants of the addressed Rydberg level.
///
/// `c6_mhz_um6` uses the ordinary-frequency convention (MHz um^6), so
/// `c6 / r^6` is directly comparable with Rabi frequencies in MHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RydbergState {
    /// Principal quantum number.
    pub n: u32,
    /// Van der Waals coefficient, MHz um^6.
    pub c6_mhz_um6: f64,
    /// Radiative lifetime, us.
    pub lifetime_us: f64,
    /// Static polarisability, MHz/(V/cm)^2.
    pub alpha0_mhz_per_vcm2: f64,
}

impl RydbergState {
    /// 48S1/2: C6 back-derived from the 4 um blockade radius at
    /// Wc/2pi = 2 MHz (literature C6 values may be substituted).
    pub fn state_48s() -> Self {
        RydbergState {
            n: 48,
            c6_mhz_um6: 8192.0,
            lifetime_us: 58.0,
            alpha0_mhz_per_vcm2: 38.2,
        }
    }

    /// 42S1/2: C6 back-derived from the 3 um blockade radius at
    /// Wc/2pi = 2.5 MHz; polarisability scaled from 48S by (n*/n*')^7.
    pub fn state_42s() -> Self {
        RydbergState {
            n: 42,
            c6_mhz_um6: 1822.5,
            lifetime_us: 41.0,
            alpha0_mhz_per_vcm2: 14.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.c6_mhz_um6.is_finite() || self.c6_mhz_um6 <= 0.0 {
            return Err(Error::invalid("c6_mhz_um6", "must be > 0"));
        }
        if !self.lifetime_us.is_finite() || self.lifetime_us <= 0.0 {
            return Err(Error::invalid("lifetime_us", "must be > 0"));
        }
        Ok(())
    }

    /// Atom constants with this state's Rydberg lifetime.
    pub fn atom_params(&self) -> AtomParams {
        AtomParams::rb87(self.lifetime_us)
    }
}

/// Cloud geometry converting microscopic susceptibility to transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudParams {
    /// Ground-state density, 1/m^3.
    pub density_m3: f64,
    /// Path length through the medium, m.
    pub path_length_m: f64,
    /// Probe wave-vector 2 pi / lambda, 1/m.
    pub wavevector_m: f64,
}

impl CloudParams {
    pub fn new(density_m3: f64, path_length_m: f64, lambda_m: f64) -> Self {
        CloudParams {
            density_m3,
            path_length_m,
            wavevector_m: 2.0 * core::f64::consts::PI / lambda_m,
        }
    }

    /// Peak density 2.2e10 cm^-3 and 0.52 mm path of the reference cloud.
    pub fn reference(lambda_m: f64) -> Self {
        CloudParams::new(2.2e16, 0.52e-3, lambda_m)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("density_m3", self.density_m3),
            ("path_length_m", self.path_length_m),
            ("wavevector_m", self.wavevector_m),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::invalid(name, alloc::format!("must be > 0, got {value}")));
            }
        }
        Ok(())
    }

    pub fn density_per_um3(&self) -> f64 {
        self.density_m3 * 1e-18
    }

    pub fn with_density_m3(mut self, density_m3: f64) -> Self {
        self.density_m3 = density_m3;
        self
    }
}

/// Magnitude C6 / r^6 of the van der Waals shift at separation `r_um`.
pub fn vdw_shift(state: &RydbergState, r_um: f64) -> Result<f64> {
    if !r_um.is_finite() || r_um <= 0.0 {
        return Err(Error::invalid("r_um", alloc::format!("must be > 0, got {r_um}")));
    }
    let r3 = r_um * r_um * r_um;
    Ok(state.c6_mhz_um6 / (r3 * r3))
}

/// Blockade radius (C6 / Wc)^(1/6) in um.
pub fn blockade_radius(state: &RydbergState, omega_c_mhz: f64) -> Result<f64> {
    if !omega_c_mhz.is_finite() || omega_c_mhz <= 0.0 {
        return Err(Error::invalid(
            "omega_c_mhz",
            alloc::format!("must be > 0, got {omega_c_mhz}"),
        ));
    }
    Ok(libm::pow(state.c6_mhz_um6 / omega_c_mhz, 1.0 / 6.0))
}

/// Nearest-neighbour distance density for a uniform Poissonian gas,
/// p(r, N) = 4 pi N r^2 exp(-(4/3) pi N r^3), in 1/um.
pub fn nn_pdf(r_um: f64, density_um3: f64) -> f64 {
    let four_pi_n = 4.0 * core::f64::consts::PI * density_um3;
    four_pi_n * r_um * r_um * libm::exp(-four_pi_n * r_um * r_um * r_um / 3.0)
}

/// Probability that the nearest neighbour lies within `r_um`.
pub fn nn_cdf(r_um: f64, density_um3: f64) -> f64 {
    let four_pi_n = 4.0 * core::f64::consts::PI * density_um3;
    1.0 - libm::exp(-four_pi_n * r_um * r_um * r_um / 3.0)
}

/// Mean number of atoms inside a blockade sphere, (4/3) pi r_b^3 N.
pub fn atoms_in_blockade_sphere(density_um3: f64, r_b_um: f64) -> f64 {
    4.0 / 3.0 * core::f64::consts::PI * r_b_um * r_b_um * r_b_um * density_um3
}

/// Quadrature controls for the nearest-neighbour average.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSettings {
    /// Trapezoid intervals on the log-spaced grid (rounded up to even).
    pub nodes: usize,
    /// Lower cutoff: below this separation the pair is deeply blockaded
    /// and chi is flat in r, so the probability mass below simply
    /// weights the cutoff value.
    pub r_min_um: f64,
    /// Nearest-neighbour mass allowed beyond the upper cutoff; that tail
    /// is folded into the non-interacting (v = 0) value.
    pub tail_mass: f64,
    /// Relative change of chi_I under node doubling accepted as
    /// converged.
    pub rel_tol: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            nodes: 200,
            r_min_um: 0.5,
            tail_mass: 1e-6,
            rel_tol: 5e-3,
        }
    }
}

/// Pair susceptibility averaged over the nearest-neighbour distribution:
/// chi-bar = cdf(r_min) chi(r_min) + integral p(r) chi(v(r)) dr
///           + (1 - cdf(r_cut)) chi(v = 0),
/// with the integral done by the trapezoid rule in ln r. Convergence is
/// checked against the half-resolution grid; failure is an error, not a
/// silent result.
pub fn ensemble_susceptibility(
    lasers: &LaserParams,
    atom: &AtomParams,
    state: &RydbergState,
    cloud: &CloudParams,
    quad: &QuadratureSettings,
    settings: &NumericalSettings,
) -> Result<Susceptibility> {
    state.validate()?;
    cloud.validate()?;
    let density_um3 = cloud.density_per_um3();
    let n_intervals = quad.nodes.max(8).next_multiple_of(2);

    let four_pi_n_thirds = 4.0 / 3.0 * core::f64::consts::PI * density_um3;
    let r_cut = libm::pow(libm::log(1.0 / quad.tail_mass) / four_pi_n_thirds, 1.0 / 3.0)
        .max(4.0 * quad.r_min_um);

    let solver = PairEit::new(*lasers, *atom, cloud.density_m3)?;
    let h = libm::log(r_cut / quad.r_min_um) / n_intervals as f64;

    // chi(v(r_i)) p(r_i) r_i on the log grid (r dr = r^2 du with u = ln r
    // absorbed as f = chi p r).
    let mut chi_nodes = alloc::vec::Vec::with_capacity(n_intervals + 1);
    let mut integrand = alloc::vec::Vec::with_capacity(n_intervals + 1);
    for i in 0..=n_intervals {
        let r = quad.r_min_um * libm::exp(h * i as f64);
        let v = vdw_shift(state, r)?;
        let (chi, _) = solver
            .chi_at(lasers.delta_p_mhz, v, settings)
            .map_err(|e| e.at_grid_point(r))?;
        chi_nodes.push(chi.value());
        integrand.push(chi.value() * nn_pdf(r, density_um3) * r);
    }

    let trapezoid = |stride: usize| -> Complex64 {
        let step = h * stride as f64;
        let mut acc = 0.5 * (integrand[0] + integrand[n_intervals]);
        let mut i = stride;
        while i < n_intervals {
            acc += integrand[i];
            i += stride;
        }
        acc * step
    };
    let integral_full = trapezoid(1);
    let integral_half = trapezoid(2);

    let (chi_v0, _) = solver.chi_at(lasers.delta_p_mhz, 0.0, settings)?;
    let boundary = chi_nodes[0] * nn_cdf(quad.r_min_um, density_um3)
        + chi_v0.value() * (1.0 - nn_cdf(r_cut, density_um3));

    let chi_full = boundary + integral_full;
    let chi_half = boundary + integral_half;
    let rel_change = (chi_full.im - chi_half.im).abs() / chi_full.im.abs().max(f64::MIN_POSITIVE);
    if rel_change > quad.rel_tol {
        return Err(Error::QuadratureNotConverged {
            rel_change,
            tol: quad.rel_tol,
        });
    }
    Susceptibility::new(chi_full)
}
