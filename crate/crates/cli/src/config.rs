// Copyright 2026 rydeit Contributors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration: TOML (or JSON) ingestion, shipped presets,
//! schema validation with located errors, and resolution into the
//! solver parameter types. Every omitted optional key is filled with a
//! documented default and reported as "assumed" in the output sidecar.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use rydeit_core::ensemble::{CloudParams, QuadratureSettings, RydbergState};
use rydeit_core::ionmc::McSettings;
use rydeit_core::lindblad::NumericalSettings;
use rydeit_core::pair::{AtomParams, LaserParams};
use rydeit_core::units;

use crate::CliError;

pub const PRESETS: &[(&str, &str)] = &[
    ("fig2", include_str!("../presets/fig2.toml")),
    ("fig3a", include_str!("../presets/fig3a.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig5", include_str!("../presets/fig5.toml")),
];

/// On-disk configuration. Unknown keys are rejected with their
/// location; omitted optionals become documented defaults.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub rydberg: RydbergSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atom: Option<AtomSection>,
    pub lasers: LaserSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    pub cloud: CloudSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub montecarlo: Option<MonteCarloSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numerics: Option<NumericsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonlinearity: Option<NonlinearitySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RydbergSection {
    /// "48s", "42s", or "custom" (custom requires the remaining keys).
    pub state: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c6_mhz_um6: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifetime_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha0_mhz_per_vcm2: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct AtomSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_e_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_p_nm: Option<f64>,
    /// Probe dipole moment in C m; derived from the resonant
    /// cross-section when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dipole_cm: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct LaserSection {
    pub omega_p_mhz: Vec<f64>,
    pub omega_c_mhz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_c_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_p_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_rel_mhz: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub start_mhz: f64,
    pub stop_mhz: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CloudSection {
    pub density_cm3: Vec<f64>,
    pub path_length_mm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// "single", "pair", or "ensemble".
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_mhz: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSection {
    pub atom_count: usize,
    pub ion_fractions: Vec<f64>,
    pub realizations: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis_radius_fraction: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature_nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_min_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature_rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cond_threshold: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct NonlinearitySection {
    pub omega_p_start_mhz: f64,
    pub omega_p_stop_mhz: f64,
    pub omega_p_points: usize,
    /// Fit a cubic nonlinearity to the generated curve up to this probe
    /// Rabi frequency.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi3_cutoff_omega_p_mhz: Option<f64>,
    /// Quote chi3 in the degenerate-Kerr (3/4) convention.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kerr_three_quarters: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    /// Input CSV with delta_p_mhz and transmission columns.
    pub input: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Only "csv" is supported.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
}

/// Which physics generates a detuning sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Single,
    Pair { v_mhz: Vec<f64> },
    Ensemble,
}

impl ModelKind {
    /// Variants of one model: `(tag, v)` per output file.
    pub fn variants(&self) -> Vec<(String, Option<f64>)> {
        match self {
            ModelKind::Single => vec![("single".into(), None)],
            ModelKind::Ensemble => vec![("ensemble".into(), None)],
            ModelKind::Pair { v_mhz } => v_mhz
                .iter()
                .map(|v| (format!("pair_v{v}"), Some(*v)))
                .collect(),
        }
    }
}

/// Fully resolved run parameters plus the filled-in config that
/// reproduces them.
pub struct Resolved {
    pub config: RunConfig,
    pub assumed: Vec<String>,
    pub state: RydbergState,
    pub atom: AtomParams,
    /// Laser parameters without a probe Rabi frequency (set per sweep).
    pub lasers_base: LaserParams,
    pub omega_p_mhz: Vec<f64>,
    pub densities_m3: Vec<f64>,
    pub path_length_m: f64,
    pub grid_mhz: Vec<f64>,
    pub model: ModelKind,
    pub mc: McSettings,
    pub ion_fractions: Vec<f64>,
    pub numerics: NumericalSettings,
    pub quadrature: QuadratureSettings,
    pub out_dir: PathBuf,
}

impl Resolved {
    pub fn cloud(&self, density_m3: f64) -> CloudParams {
        CloudParams::new(density_m3, self.path_length_m, self.atom.lambda_p_m)
    }

    pub fn lasers(&self, omega_p_mhz: f64) -> LaserParams {
        LaserParams {
            omega_p_mhz,
            ..self.lasers_base
        }
    }
}

/// Load a config: a shipped preset name or a TOML/JSON path. JSON
/// sidecars written by this tool are accepted directly (the embedded
/// `resolved_config` is extracted), so any run can be replayed from its
/// own metadata.
pub fn load(config: Option<&Path>, preset: Option<&str>) -> Result<RunConfig, CliError> {
    match (config, preset) {
        (Some(_), Some(_)) => Err(CliError::config(
            "pass either --config or --preset, not both",
        )),
        (None, None) => Err(CliError::config("one of --config or --preset is required")),
        (None, Some(name)) => {
            let text = PRESETS
                .iter()
                .find(|(key, _)| *key == name)
                .map(|(_, text)| *text)
                .ok_or_else(|| {
                    CliError::config(format!(
                        "unknown preset `{name}`; shipped presets: {}",
                        PRESETS
                            .iter()
                            .map(|(k, _)| *k)
                            .collect::<Vec<_>>()
                            .join(", ")
                    ))
                })?;
            parse_toml(text, &format!("preset `{name}`"))
        }
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::config(format!("cannot read {}: {e}", path.display()))
            })?;
            if path.extension().is_some_and(|ext| ext == "json") {
                parse_json(&text, &path.display().to_string())
            } else {
                parse_toml(&text, &path.display().to_string())
            }
        }
    }
}

fn parse_toml(text: &str, origin: &str) -> Result<RunConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::config(format!("{origin}: {e}")))
}

fn parse_json(text: &str, origin: &str) -> Result<RunConfig, CliError> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| CliError::config(format!("{origin}: {e}")))?;
    // Accept a sidecar directly by unwrapping its resolved config.
    let config_value = value.get("resolved_config").cloned().unwrap_or(value);
    serde_json::from_value(config_value).map_err(|e| CliError::config(format!("{origin}: {e}")))
}

fn positive(name: &str, value: f64) -> Result<f64, CliError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::config(format!("`{name}` must be > 0, got {value}")))
    }
}

/// Validate and resolve a config; `seed_override` comes from --seed.
pub fn resolve(
    mut config: RunConfig,
    seed_override: Option<u64>,
    out_override: Option<PathBuf>,
) -> Result<Resolved, CliError> {
    let mut assumed = Vec::new();
    let mut assume = |key: &str, rendered: String| {
        let entry = format!("{key} = {rendered} (assumed)");
        assumed.push(entry);
    };

    // Rydberg state.
    let state = match config.rydberg.state.as_str() {
        "48s" | "48S" => RydbergState::state_48s(),
        "42s" | "42S" => RydbergState::state_42s(),
        "custom" => RydbergState {
            n: config
                .rydberg
                .n
                .ok_or_else(|| CliError::config("rydberg.state = \"custom\" requires `n`"))?,
            c6_mhz_um6: positive(
                "rydberg.c6_mhz_um6",
                config.rydberg.c6_mhz_um6.ok_or_else(|| {
                    CliError::config("rydberg.state = \"custom\" requires `c6_mhz_um6`")
                })?,
            )?,
            lifetime_us: positive(
                "rydberg.lifetime_us",
                config.rydberg.lifetime_us.ok_or_else(|| {
                    CliError::config("rydberg.state = \"custom\" requires `lifetime_us`")
                })?,
            )?,
            alpha0_mhz_per_vcm2: config.rydberg.alpha0_mhz_per_vcm2.ok_or_else(|| {
                CliError::config("rydberg.state = \"custom\" requires `alpha0_mhz_per_vcm2`")
            })?,
        },
        other => {
            return Err(CliError::config(format!(
                "rydberg.state must be \"48s\", \"42s\" or \"custom\", got \"{other}\""
            )))
        }
    };
    // Echo the resolved state constants back into the config so the
    // sidecar pins them even for named presets.
    config.rydberg.n = Some(state.n);
    config.rydberg.c6_mhz_um6 = Some(state.c6_mhz_um6);
    config.rydberg.lifetime_us = Some(state.lifetime_us);
    config.rydberg.alpha0_mhz_per_vcm2 = Some(state.alpha0_mhz_per_vcm2);

    // Atom constants.
    let atom_section = config.atom.get_or_insert_with(AtomSection::default);
    let gamma_e_mhz = match atom_section.gamma_e_mhz {
        Some(v) => positive("atom.gamma_e_mhz", v)?,
        None => {
            assume("atom.gamma_e_mhz", "6.07".into());
            6.07
        }
    };
    let lambda_p_nm = match atom_section.lambda_p_nm {
        Some(v) => positive("atom.lambda_p_nm", v)?,
        None => {
            assume("atom.lambda_p_nm", "780.241".into());
            780.241
        }
    };
    let lambda_p_m = lambda_p_nm * 1e-9;
    let dipole_cm = match atom_section.dipole_cm {
        Some(v) => positive("atom.dipole_cm", v)?,
        None => {
            let d = units::dipole_from_cross_section(gamma_e_mhz, lambda_p_m);
            assume("atom.dipole_cm", format!("{d:e} (resonant cross-section)"));
            d
        }
    };
    atom_section.gamma_e_mhz = Some(gamma_e_mhz);
    atom_section.lambda_p_nm = Some(lambda_p_nm);
    atom_section.dipole_cm = Some(dipole_cm);
    let atom = AtomParams {
        gamma_e_mhz,
        gamma_r_mhz: units::lifetime_us_to_rate_mhz(state.lifetime_us),
        dipole_cm,
        lambda_p_m,
    };

    // Lasers.
    if config.lasers.omega_p_mhz.is_empty() {
        return Err(CliError::config("lasers.omega_p_mhz must not be empty"));
    }
    for &omega_p in &config.lasers.omega_p_mhz {
        positive("lasers.omega_p_mhz", omega_p)?;
    }
    if config.lasers.omega_c_mhz < 0.0 {
        return Err(CliError::config("lasers.omega_c_mhz must be >= 0"));
    }
    let delta_c_mhz = *config.lasers.delta_c_mhz.get_or_insert_with(|| {
        assume("lasers.delta_c_mhz", "0".into());
        0.0
    });
    let gamma_p_mhz = *config.lasers.gamma_p_mhz.get_or_insert_with(|| {
        assume("lasers.gamma_p_mhz", "0.3".into());
        0.3
    });
    let gamma_rel_mhz = *config.lasers.gamma_rel_mhz.get_or_insert_with(|| {
        assume("lasers.gamma_rel_mhz", "0.15".into());
        0.15
    });
    if gamma_p_mhz < 0.0 || gamma_rel_mhz < 0.0 {
        return Err(CliError::config("laser linewidths must be >= 0"));
    }
    let lasers_base = LaserParams {
        omega_p_mhz: f64::NAN,
        omega_c_mhz: config.lasers.omega_c_mhz,
        delta_p_mhz: 0.0,
        delta_c_mhz,
        gamma_p_mhz,
        gamma_rel_mhz,
    };

    // Detuning grid.
    let grid_mhz = match &config.grid {
        Some(grid) => {
            if grid.points < 2 {
                return Err(CliError::config("grid.points must be >= 2"));
            }
            if !grid.start_mhz.is_finite()
                || !grid.stop_mhz.is_finite()
                || grid.stop_mhz <= grid.start_mhz
            {
                return Err(CliError::config("grid.stop_mhz must exceed grid.start_mhz"));
            }
            let step = (grid.stop_mhz - grid.start_mhz) / (grid.points - 1) as f64;
            (0..grid.points)
                .map(|i| grid.start_mhz + step * i as f64)
                .collect()
        }
        None => Vec::new(),
    };

    // Cloud.
    if config.cloud.density_cm3.is_empty() {
        return Err(CliError::config("cloud.density_cm3 must not be empty"));
    }
    let densities_m3 = config
        .cloud
        .density_cm3
        .iter()
        .map(|&n| positive("cloud.density_cm3", n).map(|n| n * 1e6))
        .collect::<Result<Vec<_>, _>>()?;
    let path_length_m = positive("cloud.path_length_mm", config.cloud.path_length_mm)? * 1e-3;

    // Model.
    let model = match &config.model {
        None => {
            assume("model.kind", "\"ensemble\"".into());
            ModelKind::Ensemble
        }
        Some(section) => match section.kind.as_str() {
            "single" => ModelKind::Single,
            "ensemble" => ModelKind::Ensemble,
            "pair" => {
                let v_mhz = section
                    .v_mhz
                    .clone()
                    .ok_or_else(|| CliError::config("model.kind = \"pair\" requires `v_mhz`"))?;
                if v_mhz.is_empty() {
                    return Err(CliError::config("model.v_mhz must not be empty"));
                }
                ModelKind::Pair { v_mhz }
            }
            other => {
                return Err(CliError::config(format!(
                    "model.kind must be \"single\", \"pair\" or \"ensemble\", got \"{other}\" \
                     (ion Monte Carlo runs through the `ionmc` command)"
                )))
            }
        },
    };
    if config.model.is_none() {
        config.model = Some(ModelSection {
            kind: "ensemble".into(),
            v_mhz: None,
        });
    }

    // Monte Carlo.
    let (mc, ion_fractions) = match &mut config.montecarlo {
        Some(section) => {
            if section.atom_count < 100 {
                return Err(CliError::config("montecarlo.atom_count must be >= 100"));
            }
            if section.realizations == 0 {
                return Err(CliError::config("montecarlo.realizations must be >= 1"));
            }
            for &f in &section.ion_fractions {
                if !(0.0..=1.0).contains(&f) {
                    return Err(CliError::config(format!(
                        "montecarlo.ion_fractions entries must lie in [0, 1], got {f}"
                    )));
                }
            }
            let seed = match (seed_override, section.seed) {
                (Some(s), _) => s,
                (None, Some(s)) => s,
                (None, None) => {
                    assume("montecarlo.seed", "1".into());
                    1
                }
            };
            section.seed = Some(seed);
            let fraction = match section.analysis_radius_fraction {
                Some(f) if f > 0.0 && f <= 1.0 => f,
                Some(f) => {
                    return Err(CliError::config(format!(
                        "montecarlo.analysis_radius_fraction must lie in (0, 1], got {f}"
                    )))
                }
                None => {
                    assume("montecarlo.analysis_radius_fraction", "0.5".into());
                    0.5
                }
            };
            section.analysis_radius_fraction = Some(fraction);
            (
                McSettings {
                    atom_count: section.atom_count,
                    realizations: section.realizations,
                    master_seed: seed,
                    analysis_radius_fraction: fraction,
                },
                section.ion_fractions.clone(),
            )
        }
        None => (McSettings::default(), Vec::new()),
    };

    // Numerics.
    let numerics_section = config.numerics.get_or_insert_with(NumericsSection::default);
    let mut numerics = NumericalSettings::default();
    if let Some(tol) = numerics_section.residual_tol {
        numerics.residual_tol = positive("numerics.residual_tol", tol)?;
    }
    if let Some(threshold) = numerics_section.cond_threshold {
        numerics.cond_threshold = positive("numerics.cond_threshold", threshold)?;
    }
    let mut quadrature = QuadratureSettings::default();
    match numerics_section.quadrature_nodes {
        Some(nodes) => {
            if nodes < 8 {
                return Err(CliError::config("numerics.quadrature_nodes must be >= 8"));
            }
            quadrature.nodes = nodes;
        }
        None => {
            assume("numerics.quadrature_nodes", "200".into());
            numerics_section.quadrature_nodes = Some(quadrature.nodes);
        }
    }
    if let Some(r_min) = numerics_section.r_min_um {
        quadrature.r_min_um = positive("numerics.r_min_um", r_min)?;
    }
    if let Some(tol) = numerics_section.quadrature_rel_tol {
        quadrature.rel_tol = positive("numerics.quadrature_rel_tol", tol)?;
    }

    // Output.
    let output = config.output.get_or_insert_with(OutputSection::default);
    if let Some(format) = &output.format {
        if format != "csv" {
            return Err(CliError::config(format!(
                "output.format: only \"csv\" is supported, got \"{format}\""
            )));
        }
    } else {
        output.format = Some("csv".into());
    }
    let out_dir = match out_override {
        Some(dir) => dir,
        None => match &output.dir {
            Some(dir) => dir.clone(),
            None => {
                assume("output.dir", "\"out\"".into());
                PathBuf::from("out")
            }
        },
    };
    output.dir = Some(out_dir.clone());

    let omega_p_mhz = config.lasers.omega_p_mhz.clone();
    Ok(Resolved {
        config,
        assumed,
        state,
        atom,
        lasers_base,
        omega_p_mhz,
        densities_m3,
        path_length_m,
        grid_mhz,
        model,
        mc,
        ion_fractions,
        numerics,
        quadrature,
        out_dir,
    })
}
