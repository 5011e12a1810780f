// Copyright 2026 rydeit Contributors
// SPDX-License-Identifier: Apache-2.0

//! The four subcommands. Sweeps parallelize over grid chunks or jobs
//! with rayon; results are reassembled in fixed order so outputs do not
//! depend on the worker count.

use std::time::Instant;

use rayon::prelude::*;

use rydeit_core::ensemble::ensemble_susceptibility;
use rydeit_core::fitting::{fit_chi3, fit_density, KerrConvention};
use rydeit_core::ionmc::simulate_fraction;
use rydeit_core::pair::{pair_susceptibility, single_atom_susceptibility};
use rydeit_core::spectra::{rabi_to_field, sweep_spectrum, Spectrum, SweepModel, SweepVariable};
use rydeit_core::units;

use crate::config::{ModelKind, Resolved};
use crate::output::{
    ensure_dir, write_json, write_nonlinearity_csv, write_spectrum_csv, NonlinearityRow, Sidecar,
};
use crate::CliError;

const SWEEP_CHUNK: usize = 16;

fn require_grid(resolved: &Resolved) -> Result<(), CliError> {
    if resolved.grid_mhz.is_empty() {
        return Err(CliError::config(
            "this command needs a [grid] section with at least 2 points",
        ));
    }
    Ok(())
}

/// Detuning sweep parallelized over grid chunks; chunk results are
/// concatenated in order.
fn parallel_sweep(
    model: &SweepModel<'_>,
    resolved: &Resolved,
    omega_p_mhz: f64,
    density_m3: f64,
) -> Result<Spectrum, CliError>
where
    for<'a> SweepModel<'a>: Sync,
{
    let lasers = resolved.lasers(omega_p_mhz);
    let cloud = resolved.cloud(density_m3);
    let chunks: Vec<Spectrum> = resolved
        .grid_mhz
        .par_chunks(SWEEP_CHUNK)
        .map(|chunk| {
            sweep_spectrum(model, &lasers, &resolved.atom, &cloud, chunk, &resolved.numerics)
                .map_err(CliError::from)
        })
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::with_capacity(resolved.grid_mhz.len());
    for chunk in chunks {
        rows.extend(chunk.rows);
    }
    Ok(Spectrum {
        sweep: SweepVariable::DeltaP,
        rows,
    })
}

/// One spectrum CSV per (density, probe power, model variant), plus the
/// sidecar.
pub fn cmd_spectrum(resolved: &Resolved) -> Result<(), CliError> {
    require_grid(resolved)?;
    ensure_dir(&resolved.out_dir)?;
    let start = Instant::now();
    let mut sidecar = Sidecar::new(
        "spectrum",
        resolved.config.clone(),
        resolved.assumed.clone(),
    );

    let multiple_densities = resolved.densities_m3.len() > 1;
    for &density_m3 in &resolved.densities_m3 {
        for &omega_p in &resolved.omega_p_mhz {
            for (tag, v) in resolved.model.variants() {
                let stage = Instant::now();
                let model = match (&resolved.model, v) {
                    (ModelKind::Single, _) => SweepModel::Single,
                    (ModelKind::Pair { .. }, Some(v_mhz)) => SweepModel::Pair { v_mhz },
                    (ModelKind::Ensemble, _) => SweepModel::Ensemble {
                        state: &resolved.state,
                        quad: &resolved.quadrature,
                    },
                    (ModelKind::Pair { .. }, None) => unreachable!("pair variant without v"),
                };
                let spectrum = parallel_sweep(&model, resolved, omega_p, density_m3)?;
                let name = if multiple_densities {
                    format!(
                        "spectrum_N{}_op{}_{}.csv",
                        crate::output::fmt_f64(density_m3 * 1e-6),
                        crate::output::fmt_f64(omega_p),
                        tag
                    )
                } else {
                    format!("spectrum_op{}_{}.csv", crate::output::fmt_f64(omega_p), tag)
                };
                write_spectrum_csv(&resolved.out_dir, &name, &spectrum)?;
                sidecar
                    .timings_s
                    .insert(name.clone(), stage.elapsed().as_secs_f64());
                sidecar.outputs.push(name);
            }
        }
    }
    sidecar
        .timings_s
        .insert("total".into(), start.elapsed().as_secs_f64());
    sidecar.write(&resolved.out_dir, "spectrum_run.json")?;
    Ok(())
}

/// On-resonance susceptibility versus probe power and density, with an
/// optional chained cubic fit per density.
pub fn cmd_nonlinearity(resolved: &Resolved) -> Result<(), CliError> {
    let section = resolved.config.nonlinearity.clone().ok_or_else(|| {
        CliError::config("the nonlinearity command needs a [nonlinearity] section")
    })?;
    if section.omega_p_points < 2 {
        return Err(CliError::config("nonlinearity.omega_p_points must be >= 2"));
    }
    if !(section.omega_p_stop_mhz > section.omega_p_start_mhz && section.omega_p_start_mhz > 0.0)
    {
        return Err(CliError::config(
            "nonlinearity probe range must satisfy 0 < start < stop",
        ));
    }
    let v_single = match &resolved.model {
        ModelKind::Pair { v_mhz } if v_mhz.len() != 1 => {
            return Err(CliError::config(
                "the nonlinearity command needs a single model.v_mhz value for the pair model",
            ))
        }
        ModelKind::Pair { v_mhz } => Some(v_mhz[0]),
        _ => None,
    };
    ensure_dir(&resolved.out_dir)?;
    let start = Instant::now();
    let mut sidecar = Sidecar::new(
        "nonlinearity",
        resolved.config.clone(),
        resolved.assumed.clone(),
    );

    let step = (section.omega_p_stop_mhz - section.omega_p_start_mhz)
        / (section.omega_p_points - 1) as f64;
    let omegas: Vec<f64> = (0..section.omega_p_points)
        .map(|i| section.omega_p_start_mhz + step * i as f64)
        .collect();

    let jobs: Vec<(f64, f64)> = resolved
        .densities_m3
        .iter()
        .flat_map(|&n| omegas.iter().map(move |&w| (n, w)))
        .collect();
    let chi_values: Vec<f64> = jobs
        .par_iter()
        .map(|&(density_m3, omega_p)| -> Result<f64, CliError> {
            let lasers = resolved.lasers(omega_p);
            let chi = match (&resolved.model, v_single) {
                (ModelKind::Single, _) => {
                    single_atom_susceptibility(&lasers, &resolved.atom, density_m3, &resolved.numerics)?
                }
                (ModelKind::Pair { .. }, Some(v)) => {
                    pair_susceptibility(&lasers, &resolved.atom, v, density_m3, &resolved.numerics)?
                }
                (ModelKind::Ensemble, _) => ensemble_susceptibility(
                    &lasers,
                    &resolved.atom,
                    &resolved.state,
                    &resolved.cloud(density_m3),
                    &resolved.quadrature,
                    &resolved.numerics,
                )?,
                (ModelKind::Pair { .. }, None) => unreachable!(),
            };
            Ok(chi.chi_i())
        })
        .collect::<Result<_, _>>()?;

    let rows: Vec<NonlinearityRow> = jobs
        .iter()
        .zip(&chi_values)
        .map(|(&(density_m3, omega_p), &chi_i)| NonlinearityRow {
            density_cm3: density_m3 * 1e-6,
            omega_p_mhz: omega_p,
            field_v_per_m: rabi_to_field(units::mhz_to_rad_per_s(omega_p), resolved.atom.dipole_cm),
            chi_imag: chi_i,
            chi_i_over_n_m3: chi_i / density_m3,
        })
        .collect();
    write_nonlinearity_csv(&resolved.out_dir, "nonlinearity.csv", &rows)?;
    sidecar.outputs.push("nonlinearity.csv".into());

    if let Some(cutoff_omega) = section.chi3_cutoff_omega_p_mhz {
        let convention = if section.kerr_three_quarters.unwrap_or(false) {
            KerrConvention::ThreeQuarters
        } else {
            KerrConvention::DirectCoefficient
        };
        // Nudge the cutoff up so a grid point exactly at the cutoff
        // frequency is included.
        let cutoff_field =
            rabi_to_field(units::mhz_to_rad_per_s(cutoff_omega), resolved.atom.dipole_cm)
                * (1.0 + 1e-12);
        let fits: Vec<serde_json::Value> = resolved
            .densities_m3
            .iter()
            .map(|&density_m3| -> Result<serde_json::Value, CliError> {
                let points: Vec<(f64, f64)> = rows
                    .iter()
                    .filter(|r| r.density_cm3 == density_m3 * 1e-6)
                    .map(|r| (r.field_v_per_m, r.chi_imag))
                    .collect();
                let fit = fit_chi3(&points, cutoff_field, convention)?;
                Ok(serde_json::json!({
                    "density_cm3": density_m3 * 1e-6,
                    "chi1_im": fit.chi1_im,
                    "chi3_im_m2_per_v2": fit.chi3_im,
                    "convention": match convention {
                        KerrConvention::DirectCoefficient => "direct_coefficient",
                        KerrConvention::ThreeQuarters => "three_quarters",
                    },
                    "cutoff_field_v_per_m": fit.cutoff_field_v_m,
                    "cutoff_omega_p_mhz": cutoff_omega,
                    "residual_rms": fit.residual_rms,
                    "points_used": fit.points_used,
                }))
            })
            .collect::<Result<_, _>>()?;
        write_json(&resolved.out_dir, "chi3_fit.json", &fits)?;
        sidecar.outputs.push("chi3_fit.json".into());
    }

    sidecar
        .timings_s
        .insert("total".into(), start.elapsed().as_secs_f64());
    sidecar.write(&resolved.out_dir, "nonlinearity_run.json")?;
    Ok(())
}

/// Averaged ion-shifted spectra per fraction plus a peak-shift summary.
pub fn cmd_ionmc(resolved: &Resolved) -> Result<(), CliError> {
    require_grid(resolved)?;
    if resolved.config.montecarlo.is_none() {
        return Err(CliError::config(
            "the ionmc command needs a [montecarlo] section",
        ));
    }
    if resolved.ion_fractions.is_empty() {
        return Err(CliError::config("montecarlo.ion_fractions must not be empty"));
    }
    if resolved.omega_p_mhz.len() != 1 {
        return Err(CliError::config(
            "the ionmc command uses exactly one probe Rabi frequency",
        ));
    }
    ensure_dir(&resolved.out_dir)?;
    let start = Instant::now();
    let mut sidecar = Sidecar::new("ionmc", resolved.config.clone(), resolved.assumed.clone());
    sidecar.seed = Some(resolved.mc.master_seed);

    let lasers = resolved.lasers(resolved.omega_p_mhz[0]);
    let cloud = resolved.cloud(resolved.densities_m3[0]);
    let runs: Vec<_> = resolved
        .ion_fractions
        .par_iter()
        .map(|&fraction| {
            simulate_fraction(
                &lasers,
                &resolved.atom,
                resolved.state.alpha0_mhz_per_vcm2,
                &cloud,
                &resolved.mc,
                fraction,
                &resolved.grid_mhz,
                &resolved.numerics,
            )
            .map_err(CliError::from)
        })
        .collect::<Result<_, _>>()?;

    let mut summary = Vec::new();
    for (fraction, run) in resolved.ion_fractions.iter().zip(&runs) {
        let name = format!(
            "ionmc_f{}.csv",
            crate::output::fmt_f64(fraction * 100.0)
        );
        write_spectrum_csv(&resolved.out_dir, &name, &run.spectrum)?;
        let scatter_mean = if run.per_realization_shifts.is_empty() {
            0.0
        } else {
            run.per_realization_shifts.iter().sum::<f64>()
                / run.per_realization_shifts.len() as f64
        };
        let scatter_std = if run.per_realization_shifts.len() > 1 {
            let m = scatter_mean;
            (run.per_realization_shifts
                .iter()
                .map(|s| (s - m) * (s - m))
                .sum::<f64>()
                / (run.per_realization_shifts.len() - 1) as f64)
                .sqrt()
        } else {
            0.0
        };
        summary.push(serde_json::json!({
            "ion_fraction": fraction,
            "peak_shift_mhz": run.peak_shift_mhz,
            "peak_transmission": run.peak_transmission,
            "per_realization_shifts_mhz": run.per_realization_shifts,
            "per_realization_shift_mean_mhz": scatter_mean,
            "per_realization_shift_std_mhz": scatter_std,
            "realizations_without_dip": run.per_realization_failures,
            "analysis_atoms": run.analysis_atoms,
            "excluded_coincident_pairs": run.excluded_pairs,
            "spectrum_csv": name,
        }));
        sidecar.outputs.push(name);
    }
    write_json(&resolved.out_dir, "ionmc_summary.json", &summary)?;
    sidecar.outputs.push("ionmc_summary.json".into());
    sidecar
        .timings_s
        .insert("total".into(), start.elapsed().as_secs_f64());
    sidecar.write(&resolved.out_dir, "ionmc_run.json")?;
    Ok(())
}

/// Fit the ground-state density to a coupling-off transmission CSV.
pub fn cmd_fit(resolved: &Resolved) -> Result<(), CliError> {
    let section = resolved
        .config
        .fit
        .clone()
        .ok_or_else(|| CliError::config("the fit command needs a [fit] section"))?;
    let (deltas, transmissions) = read_fit_input(&section.input)?;
    ensure_dir(&resolved.out_dir)?;
    let start = Instant::now();

    let fit = fit_density(
        &deltas,
        &transmissions,
        &resolved.atom,
        resolved.path_length_m,
    )?;
    let mut sidecar = Sidecar::new("fit", resolved.config.clone(), resolved.assumed.clone());
    let report = serde_json::json!({
        "input": section.input,
        "points": deltas.len(),
        "density_m3": fit.density_m3,
        "density_cm3": fit.density_m3 * 1e-6,
        "sigma_density_m3": fit.sigma_density_m3,
        "center_mhz": fit.center_mhz,
        "sigma_center_mhz": fit.sigma_center_mhz,
        "residual_rms": fit.residual_rms,
        "iterations": fit.iterations,
    });
    write_json(&resolved.out_dir, "fit_report.json", &report)?;
    sidecar.outputs.push("fit_report.json".into());
    sidecar
        .timings_s
        .insert("total".into(), start.elapsed().as_secs_f64());
    sidecar.write(&resolved.out_dir, "fit_run.json")?;
    Ok(())
}

/// Read (delta_p_mhz, transmission) columns; malformed input is a
/// config-class error (exit 2).
fn read_fit_input(path: &std::path::Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?
        .clone();
    let find = |names: &[&str]| -> Option<usize> {
        headers
            .iter()
            .position(|h| names.iter().any(|n| h.eq_ignore_ascii_case(n)))
    };
    let delta_col = find(&["delta_p_mhz", "delta_mhz"]).ok_or_else(|| {
        CliError::config(format!(
            "{}: no delta_p_mhz/delta_mhz column in header {:?}",
            path.display(),
            headers
        ))
    })?;
    let t_col = find(&["transmission"]).ok_or_else(|| {
        CliError::config(format!(
            "{}: no transmission column in header {:?}",
            path.display(),
            headers
        ))
    })?;
    let mut deltas = Vec::new();
    let mut transmissions = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let parse = |idx: usize| -> Result<f64, CliError> {
            record
                .get(idx)
                .ok_or_else(|| {
                    CliError::config(format!("{}: row {} too short", path.display(), line + 2))
                })?
                .parse::<f64>()
                .map_err(|e| {
                    CliError::config(format!("{}: row {}: {e}", path.display(), line + 2))
                })
        };
        deltas.push(parse(delta_col)?);
        transmissions.push(parse(t_col)?);
    }
    if deltas.len() < 4 {
        return Err(CliError::config(format!(
            "{}: need at least 4 data rows, found {}",
            path.display(),
            deltas.len()
        )));
    }
    Ok((deltas, transmissions))
}
