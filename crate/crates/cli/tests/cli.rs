// Copyright 2026 rydeit Contributors
// SPDX-License-Identifier: Apache-2.0

//! End-to-end checks of the `sim` binary: presets, exit codes,
//! determinism, and the density-fit round trip.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sim"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rydeit_cli_{tag}_{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_ok(output: &Output) {
    assert!(
        output.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("process exited")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn fig2_preset_emits_four_spectra_and_is_reproducible() {
    let dir = tmp_dir("fig2");
    let out = sim()
        .args(["spectrum", "--preset", "fig2", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    run_ok(&out);

    let names = [
        "spectrum_op0.3_pair_v0.csv",
        "spectrum_op0.3_pair_v10.csv",
        "spectrum_op1_pair_v0.csv",
        "spectrum_op1_pair_v10.csv",
    ];
    let mut first = Vec::new();
    for name in names {
        let text = read(&dir, name);
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "delta_p_mhz,chi_real,chi_imag,transmission,absorbed_fraction"
        );
        assert_eq!(text.lines().count(), 402, "{name}: header + 401 rows");
        first.push(text);
    }
    let sidecar: serde_json::Value =
        serde_json::from_str(&read(&dir, "spectrum_run.json")).unwrap();
    assert_eq!(sidecar["command"], "spectrum");
    assert_eq!(sidecar["outputs"].as_array().unwrap().len(), 4);
    assert!(sidecar["resolved_config"]["lasers"]["gamma_p_mhz"].is_number());

    // Re-run into a fresh directory: data files must be byte-identical.
    let dir2 = tmp_dir("fig2_again");
    let out = sim()
        .args(["spectrum", "--preset", "fig2", "--out"])
        .arg(&dir2)
        .output()
        .unwrap();
    run_ok(&out);
    for (name, reference) in names.iter().zip(&first) {
        assert_eq!(&read(&dir2, name), reference, "{name} not reproducible");
    }

    // The interacting curve absorbs more on resonance at high probe
    // power; quick physical sanity on the emitted data.
    let on_resonance_chi = |text: &str| -> f64 {
        text.lines()
            .skip(1)
            .map(|line| {
                let cells: Vec<&str> = line.split(',').collect();
                (cells[0].parse::<f64>().unwrap(), cells[2].parse::<f64>().unwrap())
            })
            .min_by(|a, b| a.0.abs().partial_cmp(&b.0.abs()).unwrap())
            .unwrap()
            .1
    };
    assert!(on_resonance_chi(&first[3]) > on_resonance_chi(&first[1]));
}

#[test]
fn replay_from_sidecar_is_byte_identical() {
    let dir = tmp_dir("replay");
    // Small custom config to keep the replay cheap.
    let config = dir.join("run.toml");
    fs::write(
        &config,
        r#"
[rydberg]
state = "48s"

[lasers]
omega_p_mhz = [0.5]
omega_c_mhz = 2.0

[grid]
start_mhz = -5.0
stop_mhz = 5.0
points = 21

[cloud]
density_cm3 = [2.2e10]
path_length_mm = 0.52

[model]
kind = "pair"
v_mhz = [10.0]
"#,
    )
    .unwrap();
    let out_a = dir.join("a");
    let out = sim()
        .args(["spectrum", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_a)
        .output()
        .unwrap();
    run_ok(&out);
    let csv_a = read(&out_a, "spectrum_op0.5_pair_v10.csv");

    // Replay directly from the sidecar JSON.
    let out_b = dir.join("b");
    let out = sim()
        .args(["spectrum", "--config"])
        .arg(out_a.join("spectrum_run.json"))
        .arg("--out")
        .arg(&out_b)
        .output()
        .unwrap();
    run_ok(&out);
    assert_eq!(read(&out_b, "spectrum_op0.5_pair_v10.csv"), csv_a);
}

#[test]
fn config_errors_exit_2() {
    // Unknown key.
    let dir = tmp_dir("badkey");
    let config = dir.join("bad.toml");
    fs::write(
        &config,
        "[rydberg]\nstate = \"48s\"\nwhoops = 3\n[lasers]\nomega_p_mhz = [0.3]\nomega_c_mhz = 2.0\n[cloud]\ndensity_cm3 = [2.2e10]\npath_length_mm = 0.52\n",
    )
    .unwrap();
    let out = sim()
        .args(["spectrum", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("whoops"), "{stderr}");

    // Missing grid for a spectrum run.
    let config = dir.join("nogrid.toml");
    fs::write(
        &config,
        "[rydberg]\nstate = \"48s\"\n[lasers]\nomega_p_mhz = [0.3]\nomega_c_mhz = 2.0\n[cloud]\ndensity_cm3 = [2.2e10]\npath_length_mm = 0.52\n",
    )
    .unwrap();
    let out = sim()
        .args(["spectrum", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);

    // Degenerate grid (zero points).
    let config = dir.join("emptygrid.toml");
    fs::write(
        &config,
        "[rydberg]\nstate = \"48s\"\n[lasers]\nomega_p_mhz = [0.3]\nomega_c_mhz = 2.0\n[grid]\nstart_mhz = -1.0\nstop_mhz = 1.0\npoints = 0\n[cloud]\ndensity_cm3 = [2.2e10]\npath_length_mm = 0.52\n",
    )
    .unwrap();
    let out = sim()
        .args(["spectrum", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);

    // Both --config and --preset.
    let out = sim()
        .args(["spectrum", "--preset", "fig2", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);

    // Unknown preset.
    let out = sim()
        .args(["spectrum", "--preset", "fig9"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn density_fit_round_trip_through_the_binary() {
    let dir = tmp_dir("fitrt");
    // Generate a coupling-off spectrum with the spectrum command.
    let gen_config = dir.join("gen.toml");
    fs::write(
        &gen_config,
        r#"
[rydberg]
state = "48s"

[atom]
gamma_e_mhz = 6.07
lambda_p_nm = 780.241

[lasers]
omega_p_mhz = [0.006]
omega_c_mhz = 0.0
gamma_p_mhz = 0.0
gamma_rel_mhz = 0.0

[grid]
start_mhz = -20.0
stop_mhz = 20.0
points = 161

[cloud]
density_cm3 = [2.2e10]
path_length_mm = 0.52

[model]
kind = "single"
"#,
    )
    .unwrap();
    let gen_out = dir.join("gen");
    let out = sim()
        .args(["spectrum", "--config"])
        .arg(&gen_config)
        .arg("--out")
        .arg(&gen_out)
        .output()
        .unwrap();
    run_ok(&out);
    let spectrum_csv = gen_out.join("spectrum_op0.006_single.csv");
    assert!(spectrum_csv.exists());

    // Fit it back.
    let fit_config = dir.join("fit.toml");
    fs::write(
        &fit_config,
        format!(
            "[rydberg]\nstate = \"48s\"\n[lasers]\nomega_p_mhz = [0.006]\nomega_c_mhz = 0.0\n[cloud]\ndensity_cm3 = [1.0e10]\npath_length_mm = 0.52\n[fit]\ninput = \"{}\"\n",
            spectrum_csv.display()
        ),
    )
    .unwrap();
    let fit_out = dir.join("fit");
    let out = sim()
        .args(["fit", "--config"])
        .arg(&fit_config)
        .arg("--out")
        .arg(&fit_out)
        .output()
        .unwrap();
    run_ok(&out);
    let report: serde_json::Value =
        serde_json::from_str(&read(&fit_out, "fit_report.json")).unwrap();
    let fitted = report["density_cm3"].as_f64().unwrap();
    assert!(
        (fitted - 2.2e10).abs() / 2.2e10 < 1e-3,
        "fitted {fitted:e} vs 2.2e10"
    );
    assert!(report["sigma_density_m3"].as_f64().unwrap() >= 0.0);

    // Truncated input: config-class failure.
    let short_csv = dir.join("short.csv");
    fs::write(&short_csv, "delta_p_mhz,transmission\n0,0.5\n1,0.6\n").unwrap();
    let bad_config = dir.join("fit_bad.toml");
    fs::write(
        &bad_config,
        format!(
            "[rydberg]\nstate = \"48s\"\n[lasers]\nomega_p_mhz = [0.006]\nomega_c_mhz = 0.0\n[cloud]\ndensity_cm3 = [1.0e10]\npath_length_mm = 0.52\n[fit]\ninput = \"{}\"\n",
            short_csv.display()
        ),
    )
    .unwrap();
    let out = sim()
        .args(["fit", "--config"])
        .arg(&bad_config)
        .arg("--out")
        .arg(&fit_out)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn nonlinearity_emits_table_and_chi3_fit() {
    let dir = tmp_dir("nonlin");
    let config = dir.join("nl.toml");
    // Pair model keeps this test fast; 6 probe points, cubic fit over
    // the first few.
    fs::write(
        &config,
        r#"
[rydberg]
state = "42s"

[lasers]
omega_p_mhz = [0.3]
omega_c_mhz = 2.5

[cloud]
density_cm3 = [2.2e10]
path_length_mm = 0.52

[model]
kind = "pair"
v_mhz = [10.0]

[nonlinearity]
omega_p_start_mhz = 0.1
omega_p_stop_mhz = 1.1
omega_p_points = 6
chi3_cutoff_omega_p_mhz = 0.7
"#,
    )
    .unwrap();
    let out = sim()
        .args(["nonlinearity", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    run_ok(&out);

    let table = read(&dir, "nonlinearity.csv");
    let mut lines = table.lines();
    assert_eq!(
        lines.next().unwrap(),
        "density_cm3,omega_p_mhz,field_v_per_m,chi_imag,chi_i_over_n_m3"
    );
    assert_eq!(table.lines().count(), 7);

    let fits: serde_json::Value = serde_json::from_str(&read(&dir, "chi3_fit.json")).unwrap();
    let fit = &fits.as_array().unwrap()[0];
    // Blockaded pair response: absorption grows with probe power.
    assert!(fit["chi3_im_m2_per_v2"].as_f64().unwrap() > 0.0);
    assert_eq!(fit["points_used"].as_u64().unwrap(), 4);
}

#[test]
fn ionmc_small_run_orders_shifts_and_reproduces() {
    let dir = tmp_dir("ionmc");
    let config = dir.join("mc.toml");
    fs::write(
        &config,
        r#"
[rydberg]
state = "48s"

[lasers]
omega_p_mhz = [0.3]
omega_c_mhz = 2.0

[grid]
start_mhz = -12.0
stop_mhz = 5.0
points = 69

[cloud]
density_cm3 = [2.2e10]
path_length_mm = 0.52

[montecarlo]
atom_count = 700
ion_fractions = [0.0, 0.05]
realizations = 3
seed = 11
"#,
    )
    .unwrap();
    let out_a = dir.join("a");
    let out = sim()
        .args(["ionmc", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_a)
        .output()
        .unwrap();
    run_ok(&out);

    let summary: serde_json::Value =
        serde_json::from_str(&read(&out_a, "ionmc_summary.json")).unwrap();
    let entries = summary.as_array().unwrap();
    assert_eq!(entries.len(), 2);
    let shift0 = entries[0]["peak_shift_mhz"].as_f64().unwrap();
    let shift5 = entries[1]["peak_shift_mhz"].as_f64().unwrap();
    assert!(shift0.abs() < 0.2, "zero-ion shift {shift0}");
    assert!(shift5 < -0.3, "5% shift {shift5} should be red");
    assert!(entries[1]["per_realization_shifts_mhz"].as_array().unwrap().len() <= 3);

    // Same seed, fresh directory: identical bytes.
    let out_b = dir.join("b");
    let out = sim()
        .args(["ionmc", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_b)
        .output()
        .unwrap();
    run_ok(&out);
    for name in ["ionmc_f0.csv", "ionmc_f5.csv", "ionmc_summary.json"] {
        assert_eq!(read(&out_a, name), read(&out_b, name), "{name}");
    }

    // A different seed changes the data.
    let out_c = dir.join("c");
    let out = sim()
        .args(["ionmc", "--config"])
        .arg(&config)
        .arg("--seed", )
        .arg("12")
        .arg("--out")
        .arg(&out_c)
        .output()
        .unwrap();
    run_ok(&out);
    assert_ne!(read(&out_a, "ionmc_f5.csv"), read(&out_c, "ionmc_f5.csv"));
}
