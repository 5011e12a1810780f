// Copyright 2026 rydeit Contributors
// SPDX-License-Identifier: Apache-2.0

//! Physical constants and unit conversions.
//!
//! Internal convention: every energy-like quantity in the solvers
//! (Rabi frequencies, detunings, decay and dephasing rates, pair shifts)
//! is an ordinary frequency in MHz, i.e. the value of omega / 2 pi.
//! Lengths are micrometres, densities per cubic micrometre. The steady
//! state of the master equation is invariant under a common rescaling of
//! all generator entries, so MHz values can be used directly. SI enters
//! only through the conversions below, at the susceptibility and field
//! boundaries.

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Coulomb constant 1/(4 pi eps0), N m^2 / C^2.
pub const COULOMB_CONSTANT: f64 = 8.987_551_792_3e9;

/// Ordinary frequency in MHz to angular frequency in rad/s.
pub fn mhz_to_rad_per_s(nu_mhz: f64) -> f64 {
    2.0 * core::f64::consts::PI * 1.0e6 * nu_mhz
}

/// Angular frequency in rad/s to ordinary frequency in MHz.
pub fn rad_per_s_to_mhz(omega: f64) -> f64 {
    omega / (2.0 * core::f64::consts::PI * 1.0e6)
}

/// Decay rate (MHz, ordinary-frequency convention) of a state with the
/// given 1/e lifetime in microseconds: Gamma = 1/tau as an angular rate.
pub fn lifetime_us_to_rate_mhz(tau_us: f64) -> f64 {
    1.0 / (2.0 * core::f64::consts::PI * tau_us)
}

/// Resonant scattering cross-section 3 lambda^2 / (2 pi), m^2.
pub fn resonant_cross_section(lambda_m: f64) -> f64 {
    3.0 * lambda_m * lambda_m / (2.0 * core::f64::consts::PI)
}

/// Probe-transition dipole moment (C m) fixed by requiring the weak-probe
/// two-level susceptibility to reproduce the resonant cross-section,
/// k chi_I = N 3 lambda^2 / (2 pi). Keeps absorption internally
/// consistent instead of importing a literature matrix element.
pub fn dipole_from_cross_section(gamma_e_mhz: f64, lambda_m: f64) -> f64 {
    let d_sq = 3.0 * EPSILON_0 * HBAR * 1.0e6 * gamma_e_mhz * lambda_m * lambda_m * lambda_m
        / (4.0 * core::f64::consts::PI);
    libm::sqrt(d_sq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn mhz_rad_round_trip() {
        assert_relative_eq!(rad_per_s_to_mhz(mhz_to_rad_per_s(6.07)), 6.07, epsilon = 1e-12);
    }

    #[test]
    fn lifetime_58_us_is_kilohertz_scale() {
        // 1/(58 us) as an angular rate is 2.74 kHz in ordinary frequency.
        let gamma = lifetime_us_to_rate_mhz(58.0);
        assert_relative_eq!(gamma, 2.744e-3, max_relative = 1e-3);
    }

    #[test]
    fn dipole_matches_cross_section_oracle() {
        // d^2 = 3 eps0 hbar Gamma lambda^3 / (8 pi^2), evaluated for the
        // Rb D2 line. Independent arithmetic of the same closed form.
        let gamma_rad = 2.0 * core::f64::consts::PI * 6.07e6;
        let lambda = 780.241e-9;
        let expected = libm::sqrt(
            3.0 * EPSILON_0 * HBAR * gamma_rad * lambda * lambda * lambda
                / (8.0 * core::f64::consts::PI * core::f64::consts::PI),
        );
        let d = dipole_from_cross_section(6.07, lambda);
        assert_relative_eq!(d, expected, max_relative = 1e-12);
        // Magnitude sanity: ~2.54e-29 C m.
        assert!((d - 2.535e-29).abs() < 0.01e-29);
    }
}
