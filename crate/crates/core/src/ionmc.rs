// Copyright 2026 rydeit Contributors
// SPDX-License-Identifier: Apache-2.0

//! Monte Carlo model of ion-induced Stark shifts: atoms are scattered
//! uniformly in a sphere at the cloud density, a fraction are flagged as
//! ions, and every neutral atom in the analysis region acquires a
//! quadratic Stark shift of its two-photon resonance from the summed
//! Coulomb field of all ions. The observable spectrum is the mean of the
//! Stark-shifted single-atom profiles.
//!
//! Everything is deterministic for a fixed seed: positions come from a
//! counter-free ChaCha stream, per-realization seeds derive from the
//! master seed through a SplitMix64 sequence, and reductions run in
//! fixed order.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::ensemble::CloudParams;
use crate::error::Error;
use crate::lindblad::NumericalSettings;
use crate::pair::{AtomParams, LaserParams, SingleAtomEit};
use crate::spectra::{normalized_transparency_peak, sweep_spectrum, Spectrum, SweepModel};
use crate::units;
use crate::Result;

/// Ion-atom separations below this (um) are excluded from the field sum
/// and reported; the Coulomb field diverges there and such pairs are
/// unphysical survivors of the snapshot model.
pub const COINCIDENCE_CUTOFF_UM: f64 = 1e-3;

/// Monte Carlo controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    /// Atoms per realization (>= 100).
    pub atom_count: usize,
    /// Independent cloud realizations averaged per spectrum.
    pub realizations: u32,
    /// Master seed; per-realization seeds are drawn from a SplitMix64
    /// sequence started here.
    pub master_seed: u64,
    /// Neutral atoms within this fraction of the sample radius form the
    /// analysis region (edge atoms see a one-sided ion field).
    pub analysis_radius_fraction: f64,
}

impl Default for McSettings {
    fn default() -> Self {
        McSettings {
            atom_count: 10_000,
            realizations: 32,
            master_seed: 1,
            analysis_radius_fraction: 0.5,
        }
    }
}

/// One sampled cloud: positions (um) and ion flags.
#[derive(Debug, Clone, PartialEq)]
pub struct CloudSample {
    pub positions: Vec<[f64; 3]>,
    pub ion_flags: Vec<bool>,
    pub radius_um: f64,
    pub seed: u64,
}

fn uniform_f64(rng: &mut ChaCha12Rng) -> f64 {
    // 53 uniformly distributed mantissa bits in [0, 1).
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// SplitMix64 step; the documented per-realization seed derivation.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Scatter `atom_count` atoms uniformly in a sphere whose radius matches
/// the requested density, flagging each as an ion with probability
/// `ion_fraction`. Bit-identical for equal seeds.
pub fn sample_cloud(
    density_um3: f64,
    atom_count: usize,
    ion_fraction: f64,
    seed: u64,
) -> Result<CloudSample> {
    if atom_count < 100 {
        return Err(Error::invalid(
            "atom_count",
            alloc::format!("need at least 100 atoms, got {atom_count}"),
        ));
    }
    if !(0.0..=1.0).contains(&ion_fraction) {
        return Err(Error::invalid(
            "ion_fraction",
            alloc::format!("must lie in [0, 1], got {ion_fraction}"),
        ));
    }
    if !density_um3.is_finite() || density_um3 <= 0.0 {
        return Err(Error::invalid("density_um3", "must be > 0"));
    }
    let radius_um = libm::pow(
        atom_count as f64 / (4.0 / 3.0 * core::f64::consts::PI * density_um3),
        1.0 / 3.0,
    );
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut positions = Vec::with_capacity(atom_count);
    let mut ion_flags = Vec::with_capacity(atom_count);
    for _ in 0..atom_count {
        let cos_polar = 1.0 - 2.0 * uniform_f64(&mut rng);
        let azimuth = 2.0 * core::f64::consts::PI * uniform_f64(&mut rng);
        let r = radius_um * libm::cbrt(uniform_f64(&mut rng));
        let sin_polar = libm::sqrt((1.0 - cos_polar * cos_polar).max(0.0));
        positions.push([
            r * sin_polar * libm::cos(azimuth),
            r * sin_polar * libm::sin(azimuth),
            r * cos_polar,
        ]);
        ion_flags.push(uniform_f64(&mut rng) < ion_fraction);
    }
    Ok(CloudSample {
        positions,
        ion_flags,
        radius_um,
        seed,
    })
}

/// Magnitude of the summed Coulomb field at one neutral atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalField {
    pub v_per_cm: f64,
    /// Ions dropped for sitting within the coincidence cutoff.
    pub excluded: usize,
}

/// Vector-summed ion field e/(4 pi eps0 r^2) at the indexed atom, V/cm.
pub fn local_field(sample: &CloudSample, atom: usize) -> Result<LocalField> {
    if sample.ion_flags[atom] {
        return Err(Error::invalid("atom", "indexed atom is an ion, not a neutral"));
    }
    let here = sample.positions[atom];
    let mut field = [0.0f64; 3];
    let mut excluded = 0;
    for (pos, &is_ion) in sample.positions.iter().zip(&sample.ion_flags) {
        if !is_ion {
            continue;
        }
        let d = [here[0] - pos[0], here[1] - pos[1], here[2] - pos[2]];
        let r_um = libm::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
        if r_um < COINCIDENCE_CUTOFF_UM {
            excluded += 1;
            continue;
        }
        let r_m = r_um * 1e-6;
        // E = k e / r^2 along the unit vector away from the ion.
        let magnitude = units::COULOMB_CONSTANT * units::ELEMENTARY_CHARGE / (r_m * r_m);
        for (f, di) in field.iter_mut().zip(&d) {
            *f += magnitude * di / r_um;
        }
    }
    let v_per_m = libm::sqrt(field[0] * field[0] + field[1] * field[1] + field[2] * field[2]);
    Ok(LocalField {
        v_per_cm: v_per_m / 100.0,
        excluded,
    })
}

/// Quadratic Stark shift -1/2 alpha0 E^2 of the two-photon resonance,
/// MHz (red for positive polarisability).
pub fn stark_shift(field_v_per_cm: f64, alpha0_mhz_per_vcm2: f64) -> f64 {
    -0.5 * alpha0_mhz_per_vcm2 * field_v_per_cm * field_v_per_cm
}

/// Stark shifts of the neutral atoms in the analysis region.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftSample {
    pub shifts_mhz: Vec<f64>,
    pub excluded_pairs: usize,
}

/// Collect the two-photon shifts of every neutral atom within
/// `analysis_radius_fraction` of the sample radius.
pub fn shift_sample(
    sample: &CloudSample,
    alpha0_mhz_per_vcm2: f64,
    analysis_radius_fraction: f64,
) -> Result<ShiftSample> {
    let r_max = analysis_radius_fraction * sample.radius_um;
    let mut shifts_mhz = Vec::new();
    let mut excluded_pairs = 0;
    for (idx, (pos, &is_ion)) in sample.positions.iter().zip(&sample.ion_flags).enumerate() {
        if is_ion {
            continue;
        }
        let r = libm::sqrt(pos[0] * pos[0] + pos[1] * pos[1] + pos[2] * pos[2]);
        if r > r_max {
            continue;
        }
        let field = local_field(sample, idx)?;
        excluded_pairs += field.excluded;
        shifts_mhz.push(stark_shift(field.v_per_cm, alpha0_mhz_per_vcm2));
    }
    if shifts_mhz.is_empty() {
        return Err(Error::invalid(
            "analysis_region",
            "no neutral atoms inside the analysis radius",
        ));
    }
    Ok(ShiftSample {
        shifts_mhz,
        excluded_pairs,
    })
}

/// Mean single-atom susceptibility over Stark-shifted atoms at one probe
/// detuning. A shift s moves the Rydberg level, so the atom is solved at
/// coupling detuning delta_c - s. Fixed summation order keeps the result
/// byte-reproducible.
pub(crate) fn shifted_mean_chi(
    solver: &SingleAtomEit,
    lasers: &LaserParams,
    shifts: &ShiftSample,
    delta_p_mhz: f64,
    settings: &NumericalSettings,
) -> Result<Complex64> {
    if shifts.shifts_mhz.is_empty() {
        return Err(Error::invalid("shifts", "shift sample is empty"));
    }
    let mut acc = Complex64::ZERO;
    for &shift in &shifts.shifts_mhz {
        let (chi, _) = solver.chi_at(delta_p_mhz, lasers.delta_c_mhz - shift, settings)?;
        acc += chi.value();
    }
    Ok(acc / shifts.shifts_mhz.len() as f64)
}

/// Mean spectrum over the Stark-shifted lineshapes of one shift sample.
pub fn ion_spectrum(
    lasers: &LaserParams,
    atom: &AtomParams,
    shifts: &ShiftSample,
    grid_mhz: &[f64],
    cloud: &CloudParams,
    settings: &NumericalSettings,
) -> Result<Spectrum> {
    crate::spectra::sweep_spectrum(
        &SweepModel::IonShifted { shifts },
        lasers,
        atom,
        cloud,
        grid_mhz,
        settings,
    )
}

/// Averaged result for one ion fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct IonMcRun {
    /// Spectrum averaged over all realizations.
    pub spectrum: Spectrum,
    /// Two-photon peak shift fitted on the averaged spectrum, MHz
    /// (negative = red). The peak is the deepest dip of chi_I divided by
    /// the coupling-off background, which keeps the feature well defined
    /// even when Stark broadening buries the raw dip in the absorption
    /// wing.
    pub peak_shift_mhz: f64,
    /// Transmission at the fitted transparency peak.
    pub peak_transmission: f64,
    /// Per-realization fitted shifts, for scatter reporting.
    /// Realizations whose spectrum shows no resolvable dip are skipped
    /// and counted in `per_realization_failures`.
    pub per_realization_shifts: Vec<f64>,
    pub per_realization_failures: u32,
    /// Neutral atoms analyzed across all realizations.
    pub analysis_atoms: usize,
    /// Coincident ion-atom pairs excluded from field sums.
    pub excluded_pairs: usize,
}

/// Run `mc.realizations` independent clouds at one ion fraction and
/// average their Stark-shifted spectra.
#[allow(clippy::too_many_arguments)]
pub fn simulate_fraction(
    lasers: &LaserParams,
    atom: &AtomParams,
    alpha0_mhz_per_vcm2: f64,
    cloud: &CloudParams,
    mc: &McSettings,
    ion_fraction: f64,
    grid_mhz: &[f64],
    settings: &NumericalSettings,
) -> Result<IonMcRun> {
    if mc.realizations == 0 {
        return Err(Error::invalid("realizations", "must be >= 1"));
    }
    if !(0.0..=1.0).contains(&mc.analysis_radius_fraction) || mc.analysis_radius_fraction == 0.0 {
        return Err(Error::invalid(
            "analysis_radius_fraction",
            "must lie in (0, 1]",
        ));
    }
    let solver = SingleAtomEit::new(*lasers, *atom, cloud.density_m3)?;
    // Coupling-off background used to normalize the transparency dip.
    let background = sweep_spectrum(
        &SweepModel::Single,
        &LaserParams {
            omega_c_mhz: 0.0,
            ..*lasers
        },
        atom,
        cloud,
        grid_mhz,
        settings,
    )?;

    let mut seed_state = mc.master_seed;
    let mut chi_sum = alloc::vec![Complex64::ZERO; grid_mhz.len()];
    let mut per_realization_shifts = Vec::with_capacity(mc.realizations as usize);
    let mut per_realization_failures = 0;
    let mut analysis_atoms = 0;
    let mut excluded_pairs = 0;
    let unshifted_peak = -lasers.delta_c_mhz;

    for _ in 0..mc.realizations {
        let seed = splitmix64(&mut seed_state);
        let sample = sample_cloud(cloud.density_per_um3(), mc.atom_count, ion_fraction, seed)?;
        let shifts = shift_sample(&sample, alpha0_mhz_per_vcm2, mc.analysis_radius_fraction)?;
        analysis_atoms += shifts.shifts_mhz.len();
        excluded_pairs += shifts.excluded_pairs;

        let mut chis = Vec::with_capacity(grid_mhz.len());
        for (&dp, acc) in grid_mhz.iter().zip(chi_sum.iter_mut()) {
            let chi = shifted_mean_chi(&solver, lasers, &shifts, dp, settings)
                .map_err(|e| e.at_grid_point(dp))?;
            *acc += chi;
            chis.push((dp, chi));
        }
        let realization_spectrum =
            Spectrum::from_chi(crate::spectra::SweepVariable::DeltaP, chis, cloud)?;
        match normalized_transparency_peak(&realization_spectrum, &background) {
            Ok(peak) => per_realization_shifts.push(peak.delta_mhz - unshifted_peak),
            Err(Error::NoTransparencyPeak) => per_realization_failures += 1,
            Err(e) => return Err(e),
        }
    }

    let inv = 1.0 / mc.realizations as f64;
    let averaged = Spectrum::from_chi(
        crate::spectra::SweepVariable::DeltaP,
        grid_mhz.iter().zip(&chi_sum).map(|(&dp, &c)| (dp, c * inv)),
        cloud,
    )?;
    let peak = normalized_transparency_peak(&averaged, &background)?;
    Ok(IonMcRun {
        peak_shift_mhz: peak.delta_mhz - unshifted_peak,
        peak_transmission: peak.transmission,
        spectrum: averaged,
        per_realization_shifts,
        per_realization_failures,
        analysis_atoms,
        excluded_pairs,
    })
}
