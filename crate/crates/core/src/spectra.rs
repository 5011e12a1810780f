// Copyright 2026 rydeit Contributors
// SPDX-License-Identifier: Apache-2.0

//! Spectrum records, susceptibility-to-transmission conversion, model
//! sweeps and transparency-peak location.
//!
//! Transmission is the transmitted power fraction exp(-k chi_I l). The
//! complementary absorbed fraction 1 - exp(-k chi_I l) is reported
//! alongside it in every record, so either reading of the transmission
//! relation can be compared directly.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::ensemble::{ensemble_susceptibility, CloudParams, QuadratureSettings, RydbergState};
use crate::error::Error;
use crate::ionmc::{shifted_mean_chi, ShiftSample};
use crate::lindblad::NumericalSettings;
use crate::pair::{AtomParams, LaserParams, PairEit, SingleAtomEit};
use crate::units;
use crate::Result;

/// Which quantity a spectrum sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Probe detuning, MHz.
    DeltaP,
    /// Probe Rabi frequency, MHz.
    OmegaP,
    /// Probe field amplitude, V/m.
    Field,
}

impl SweepVariable {
    /// Stable CSV column name.
    pub fn column_name(&self) -> &'static str {
        match self {
            SweepVariable::DeltaP => "delta_p_mhz",
            SweepVariable::OmegaP => "omega_p_mhz",
            SweepVariable::Field => "field_v_per_m",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRow {
    pub x: f64,
    pub chi_real: f64,
    pub chi_imag: f64,
    /// Transmitted power fraction exp(-k chi_I l).
    pub transmission: f64,
    /// Absorbed fraction 1 - transmission.
    pub absorbed: f64,
}

/// Table of swept variable versus complex susceptibility and
/// transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub sweep: SweepVariable,
    pub rows: Vec<SpectrumRow>,
}

impl Spectrum {
    pub fn from_chi(
        sweep: SweepVariable,
        points: impl IntoIterator<Item = (f64, Complex64)>,
        cloud: &CloudParams,
    ) -> Result<Spectrum> {
        let mut rows = Vec::new();
        for (x, chi) in points {
            let t = transmission(chi.im, cloud)?;
            rows.push(SpectrumRow {
                x,
                chi_real: chi.re,
                chi_imag: chi.im,
                transmission: t,
                absorbed: 1.0 - t,
            });
        }
        Ok(Spectrum { sweep, rows })
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.x)
    }
}

/// Transmitted power fraction exp(-k chi_I l). Tiny negative chi_I
/// within the passivity tolerance is treated as zero.
pub fn transmission(chi_i: f64, cloud: &CloudParams) -> Result<f64> {
    cloud.validate()?;
    if chi_i < -1e-12 {
        return Err(Error::invalid(
            "chi_i",
            alloc::format!("gain medium not modelled, got {chi_i:.3e}"),
        ));
    }
    let od = cloud.wavevector_m * chi_i.max(0.0) * cloud.path_length_m;
    Ok(libm::exp(-od))
}

/// Probe field amplitude for a given Rabi frequency: E = hbar W / d.
pub fn rabi_to_field(omega_p_rad_s: f64, dipole_cm: f64) -> f64 {
    units::HBAR * omega_p_rad_s / dipole_cm
}

/// Rabi frequency for a given field amplitude: W = d E / hbar.
pub fn field_to_rabi(field_v_m: f64, dipole_cm: f64) -> f64 {
    dipole_cm * field_v_m / units::HBAR
}

/// Which physical model generates a detuning sweep.
pub enum SweepModel<'a> {
    /// Non-interacting three-level atom.
    Single,
    /// Two interacting atoms at fixed pair shift.
    Pair { v_mhz: f64 },
    /// Pair model averaged over the nearest-neighbour distribution.
    Ensemble {
        state: &'a RydbergState,
        quad: &'a QuadratureSettings,
    },
    /// Single-atom response averaged over ion Stark shifts.
    IonShifted { shifts: &'a ShiftSample },
}

/// Probe-detuning sweep of the selected model with all other parameters
/// frozen. The grid must be non-empty and ascending; each row is an
/// independent steady-state solve, so failures carry the grid point.
pub fn sweep_spectrum(
    model: &SweepModel<'_>,
    lasers: &LaserParams,
    atom: &AtomParams,
    cloud: &CloudParams,
    grid_mhz: &[f64],
    settings: &NumericalSettings,
) -> Result<Spectrum> {
    if grid_mhz.is_empty() {
        return Err(Error::invalid("grid", "detuning grid is empty"));
    }
    if grid_mhz.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("grid", "detuning grid must be strictly ascending"));
    }
    let mut points = Vec::with_capacity(grid_mhz.len());
    match model {
        SweepModel::Single => {
            let solver = SingleAtomEit::new(*lasers, *atom, cloud.density_m3)?;
            for &dp in grid_mhz {
                let (chi, _) = solver
                    .chi_at(dp, lasers.delta_c_mhz, settings)
                    .map_err(|e| e.at_grid_point(dp))?;
                points.push((dp, chi.value()));
            }
        }
        SweepModel::Pair { v_mhz } => {
            let solver = PairEit::new(*lasers, *atom, cloud.density_m3)?;
            for &dp in grid_mhz {
                let (chi, _) = solver
                    .chi_at(dp, *v_mhz, settings)
                    .map_err(|e| e.at_grid_point(dp))?;
                points.push((dp, chi.value()));
            }
        }
        SweepModel::Ensemble { state, quad } => {
            for &dp in grid_mhz {
                let swept = lasers.with_delta_p(dp);
                let chi = ensemble_susceptibility(&swept, atom, state, cloud, quad, settings)
                    .map_err(|e| e.at_grid_point(dp))?;
                points.push((dp, chi.value()));
            }
        }
        SweepModel::IonShifted { shifts } => {
            let solver = SingleAtomEit::new(*lasers, *atom, cloud.density_m3)?;
            for &dp in grid_mhz {
                let chi = shifted_mean_chi(&solver, lasers, shifts, dp, settings)
                    .map_err(|e| e.at_grid_point(dp))?;
                points.push((dp, chi));
            }
        }
    }
    Spectrum::from_chi(SweepVariable::DeltaP, points, cloud)
}

/// Location of the transparency peak in a detuning sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransparencyPeak {
    /// Refined peak position, MHz.
    pub delta_mhz: f64,
    /// chi_I at the interior minimum (grid value, pre-refinement).
    pub chi_imag: f64,
    /// Transmission at the interior minimum.
    pub transmission: f64,
}

/// Deepest interior local minimum of a sampled curve, refined by a
/// three-point parabola. Returns the refined abscissa and the grid
/// index of the minimum. Curves that are monotone or peaked-only inside
/// the grid have no dip, which is an error.
pub fn deepest_dip(xs: &[f64], ys: &[f64]) -> Result<(f64, usize)> {
    assert_eq!(xs.len(), ys.len());
    if xs.len() < 3 {
        return Err(Error::NoTransparencyPeak);
    }
    let mut best: Option<usize> = None;
    for i in 1..xs.len() - 1 {
        if ys[i] < ys[i - 1] && ys[i] <= ys[i + 1] && best.map_or(true, |b| ys[i] < ys[b]) {
            best = Some(i);
        }
    }
    let i = best.ok_or(Error::NoTransparencyPeak)?;
    let (x0, y0) = (xs[i - 1], ys[i - 1]);
    let (x1, y1) = (xs[i], ys[i]);
    let (x2, y2) = (xs[i + 1], ys[i + 1]);
    // Successive-parabolic-interpolation vertex.
    let num = (y0 - y1) * (x2 - x1) * (x2 - x1) - (y2 - y1) * (x1 - x0) * (x1 - x0);
    let den = (y0 - y1) * (x2 - x1) + (y2 - y1) * (x1 - x0);
    let refined = if den.abs() > 0.0 {
        x1 + 0.5 * num / den
    } else {
        x1
    };
    Ok((refined, i))
}

/// Locate the transparency feature as the deepest interior local
/// minimum of chi_I. Works for clean EIT spectra; spectra whose dip is
/// buried in the absorption background (heavily Stark-broadened runs)
/// should be normalized by a coupling-off background first — see
/// `normalized_transparency_peak`.
pub fn transparency_peak(spectrum: &Spectrum) -> Result<TransparencyPeak> {
    let xs: Vec<f64> = spectrum.rows.iter().map(|r| r.x).collect();
    let ys: Vec<f64> = spectrum.rows.iter().map(|r| r.chi_imag).collect();
    let (refined, i) = deepest_dip(&xs, &ys)?;
    Ok(TransparencyPeak {
        delta_mhz: refined,
        chi_imag: spectrum.rows[i].chi_imag,
        transmission: spectrum.rows[i].transmission,
    })
}

/// Transparency peak of `spectrum` relative to a background spectrum on
/// the identical grid (normally the coupling-off two-level profile).
/// Dividing out the background removes the absorption-wing slope that
/// otherwise drags or swallows the dip.
pub fn normalized_transparency_peak(
    spectrum: &Spectrum,
    background: &Spectrum,
) -> Result<TransparencyPeak> {
    if spectrum.rows.len() != background.rows.len() {
        return Err(Error::DimensionMismatch {
            expected: background.rows.len(),
            found: spectrum.rows.len(),
        });
    }
    let xs: Vec<f64> = spectrum.rows.iter().map(|r| r.x).collect();
    let ys: Vec<f64> = spectrum
        .rows
        .iter()
        .zip(&background.rows)
        .map(|(r, b)| r.chi_imag / b.chi_imag.max(f64::MIN_POSITIVE))
        .collect();
    let (refined, i) = deepest_dip(&xs, &ys)?;
    Ok(TransparencyPeak {
        delta_mhz: refined,
        chi_imag: spectrum.rows[i].chi_imag,
        transmission: spectrum.rows[i].transmission,
    })
}
