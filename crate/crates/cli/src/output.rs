// Copyright 2026 rydeit Contributors
// SPDX-License-Identifier: Apache-2.0

//! Deterministic CSV and JSON emission. Floats are written with Rust's
//! shortest round-trip formatting, so identical runs produce
//! byte-identical data files.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use rydeit_core::spectra::Spectrum;

use crate::config::RunConfig;
use crate::CliError;

/// Metadata written next to every run's data files. Re-running with
/// `--config <sidecar>.json` replays the run byte-identically (timings
/// aside).
#[derive(Debug, Serialize)]
pub struct Sidecar {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub resolved_config: RunConfig,
    pub assumed_defaults: Vec<String>,
    pub outputs: Vec<String>,
    pub timings_s: BTreeMap<String, f64>,
}

impl Sidecar {
    pub fn new(command: &'static str, config: RunConfig, assumed: Vec<String>) -> Self {
        Sidecar {
            tool: "sim",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: None,
            resolved_config: config,
            assumed_defaults: assumed,
            outputs: Vec::new(),
            timings_s: BTreeMap::new(),
        }
    }

    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf, CliError> {
        let path = dir.join(name);
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::config(format!("sidecar serialization: {e}")))?;
        text.push('\n');
        fs::write(&path, text)
            .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::config(format!("cannot create {}: {e}", dir.display())))
}

/// Shortest representation that parses back to the identical f64.
pub fn fmt_f64(value: f64) -> String {
    format!("{value}")
}

pub fn write_spectrum_csv(dir: &Path, name: &str, spectrum: &Spectrum) -> Result<(), CliError> {
    let path = dir.join(name);
    let mut out = String::new();
    out.push_str(spectrum.sweep.column_name());
    out.push_str(",chi_real,chi_imag,transmission,absorbed_fraction\n");
    for row in &spectrum.rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(row.x),
            fmt_f64(row.chi_real),
            fmt_f64(row.chi_imag),
            fmt_f64(row.transmission),
            fmt_f64(row.absorbed)
        ));
    }
    fs::write(&path, out)
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
}

/// One row of the nonlinearity table.
pub struct NonlinearityRow {
    pub density_cm3: f64,
    pub omega_p_mhz: f64,
    pub field_v_per_m: f64,
    pub chi_imag: f64,
    pub chi_i_over_n_m3: f64,
}

pub fn write_nonlinearity_csv(
    dir: &Path,
    name: &str,
    rows: &[NonlinearityRow],
) -> Result<(), CliError> {
    let path = dir.join(name);
    let mut out = String::from("density_cm3,omega_p_mhz,field_v_per_m,chi_imag,chi_i_over_n_m3\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(row.density_cm3),
            fmt_f64(row.omega_p_mhz),
            fmt_f64(row.field_v_per_m),
            fmt_f64(row.chi_imag),
            fmt_f64(row.chi_i_over_n_m3)
        ));
    }
    fs::write(&path, out)
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let path = dir.join(name);
    let mut file = fs::File::create(&path)
        .map_err(|e| CliError::config(format!("cannot create {}: {e}", path.display())))?;
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::config(format!("JSON serialization: {e}")))?;
    writeln!(file, "{text}")
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
}
