//! End-to-end tests of the `simulate` binary: artifact determinism, exit
//! codes, and preset fidelity, all through the real process boundary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mm-it-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn simulate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simulate"))
        .args(args)
        .output()
        .expect("spawn simulate")
}

fn read(path: &Path) -> Vec<u8> {
    fs::read(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

/// A small full-model sweep config: 3x3 coupling plane, thermal phonon bath.
const SWEEP_CFG: &str = r#"{
    "params": {
        "delta_m": 3.0, "r": 0.25, "n_b": 10.0,
        "kappa_a": 1.0e-3, "kappa_b": 1.0e-5, "kappa_m": 1.0e-2,
        "n_a": 0.0, "n_m": 0.0
    },
    "scenario": {
        "name": "sweep2d",
        "model": "full",
        "axis1": { "name": "g", "min": 0.1, "max": 0.3, "count": 3 },
        "axis2": { "name": "g_mech", "min": 0.1, "max": 0.3, "count": 3 }
    }
}"#;

#[test]
fn identical_configs_give_byte_identical_csv_across_thread_counts() {
    let dir = scratch("determinism");
    let cfg = dir.join("sweep.json");
    fs::write(&cfg, SWEEP_CFG).unwrap();

    let mut outputs = Vec::new();
    for (sub, threads) in [("a", "1"), ("b", "1"), ("c", "3")] {
        let out = dir.join(sub);
        let status = simulate(&[
            "sweep2d",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert!(
            status.status.success(),
            "run {sub} failed: {}",
            String::from_utf8_lossy(&status.stderr)
        );
        outputs.push(read(&out.join("sweep.csv")));
    }
    assert_eq!(outputs[0], outputs[1], "repeat run changed sweep.csv");
    assert_eq!(
        outputs[0], outputs[2],
        "thread count changed sweep.csv bytes"
    );
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn malformed_config_exits_with_the_config_code_and_writes_nothing() {
    let dir = scratch("badcfg");
    let cfg = dir.join("broken.json");
    fs::write(&cfg, "{ not json").unwrap();
    let out = dir.join("out");
    let res = simulate(&[
        "dynamics",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.exists(), "config failure must not create artifacts");

    // Well-formed JSON with an unknown parameter is still a config error.
    fs::write(&cfg, r#"{"params": {"bogus_knob": 1.0}}"#).unwrap();
    let res = simulate(&[
        "dynamics",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.exists());
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn unstable_steady_request_exits_with_the_numerical_code() {
    let dir = scratch("unstable");
    let out = dir.join("out");
    // The default coupling (g = G = 0.1) breaks the stability condition, so
    // the stationary solve must refuse rather than return garbage.
    let res = simulate(&["steady", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("Hurwitz"), "stderr was: {stderr}");
    assert!(!out.exists(), "failed run must not leave artifacts");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn fig2_preset_emits_the_spectrum_grid_and_plots() {
    let dir = scratch("fig2");
    let out = dir.join("out");
    let res = simulate(&[
        "spectrum",
        "--preset",
        "fig2",
        "--svg",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );

    let csv = String::from_utf8(read(&out.join("spectrum.csv"))).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert_eq!(
        header,
        "delta_a,re_1,re_2,re_3,re_4,re_5,re_6,im_1,im_2,im_3,im_4,im_5,im_6"
    );
    assert_eq!(lines.count(), 4001, "fig2 grid is 4001 detuning points");

    for plot in ["spectrum_re.svg", "spectrum_im.svg"] {
        let body = String::from_utf8(read(&out.join(plot))).unwrap();
        assert!(body.starts_with("<svg"), "{plot} is not an SVG document");
    }

    let manifest: Value = serde_json::from_slice(&read(&out.join("manifest.json"))).unwrap();
    assert_eq!(manifest["scenario"], "spectrum");
    assert_eq!(manifest["preset"], "fig2");
    let files: Vec<&str> = manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert!(files.contains(&"spectrum.csv"));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn fig4_manifest_records_the_resolved_preset_parameters() {
    let dir = scratch("fig4");
    let out = dir.join("out");
    let res = simulate(&["dynamics", "--preset", "fig4", "--out", out.to_str().unwrap()]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );

    let manifest: Value = serde_json::from_slice(&read(&out.join("manifest.json"))).unwrap();
    let p = &manifest["params"];
    for (key, want) in [
        ("delta_m", 3.0),
        ("g", 0.1),
        ("g_mech", 0.1),
        ("r", 0.25),
        ("kappa_b", 1.0e-5),
        ("kappa_a", 1.0e-3),
        ("kappa_m", 1.0e-2),
        ("n_a", 0.0),
        ("n_m", 0.0),
        ("n_b", 10.0),
    ] {
        assert_eq!(p[key].as_f64().unwrap(), want, "param {key}");
    }
    let spec = &manifest["scenario_spec"];
    assert_eq!(spec["t_max"].as_f64().unwrap(), 600.0);
    assert_eq!(spec["samples"].as_u64().unwrap(), 601);

    // Both solution tables come out of one dynamics run.
    assert!(out.join("variances.csv").exists());
    assert!(out.join("variances_full.csv").exists());
    assert!(out.join("cm_elements.csv").exists());
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn degenerate_one_by_one_sweep_is_a_single_run() {
    let dir = scratch("onepoint");
    let cfg = dir.join("point.json");
    fs::write(
        &cfg,
        r#"{
            "params": {
                "delta_m": 3.0, "r": 0.25, "n_b": 10.0,
                "kappa_a": 1.0e-3, "kappa_b": 1.0e-5, "kappa_m": 1.0e-2,
                "n_a": 0.0, "n_m": 0.0
            },
            "scenario": {
                "name": "sweep2d",
                "model": "full",
                "axis1": { "name": "g", "min": 0.1, "max": 0.1, "count": 1 },
                "axis2": { "name": "g_mech", "min": 0.1, "max": 0.1, "count": 1 }
            }
        }"#,
    )
    .unwrap();
    let out = dir.join("out");
    let res = simulate(&[
        "sweep2d",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let csv = String::from_utf8(read(&out.join("sweep.csv"))).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    let cells: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(cells[3], "ok");
    let e_n: f64 = cells[2].parse().unwrap();
    assert!(
        (e_n - 2.1377).abs() < 1e-3,
        "single-point sweep must match the dynamics value, got {e_n}"
    );
    let _ = fs::remove_dir_all(&dir);
}
