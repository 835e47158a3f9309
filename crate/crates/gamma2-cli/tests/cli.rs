//! End-to-end checks of the command-line surface: exit codes, report files,
//! and determinism of seeded runs.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gamma2"))
}

fn tmpdir(name: &str) -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("gamma2-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn constants_emits_expected_quartic_values() {
    let out = tmpdir("constants");
    let status = bin()
        .args(["--scenario", "skew-weight-quartic", "--out"])
        .arg(&out)
        .arg("constants")
        .status()
        .unwrap();
    assert!(status.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("constants.json")).unwrap())
            .unwrap();
    let cw = json["c_w"].as_f64().unwrap();
    assert!((cw - 0.9428090415820634).abs() < 1e-10);
    assert!(json["c_sym"].as_f64().unwrap().abs() < 1e-10);
    // n = 2, kappa = 1, P = 1 defaults reproduce the -1/9 prediction
    let f2 = json["f2_prediction"]["second_order"].as_f64().unwrap();
    assert!((f2 + 1.0 / 9.0).abs() < 1e-10, "F2 = {f2}");
    assert!((json["tau_u"].as_f64().unwrap() + 2.0_f64.sqrt() / 12.0).abs() < 1e-8);
}

#[test]
fn missing_potential_key_exits_2() {
    let out = tmpdir("badcfg");
    let cfg = out.join("bad.cfg");
    std::fs::write(&cfg, "weight.kind = uniform\nweight.t_lo = -1\nweight.t_hi = 1\n").unwrap();
    let output = bin()
        .args(["--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&out)
        .arg("constants")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("potential.kind"), "stderr: {stderr}");
}

#[test]
fn verify_short_sweep_passes_and_writes_reports() {
    let out = tmpdir("verify");
    let status = bin()
        .args(["--scenario", "skew-weight-quartic", "--eps-list", "0.1,0.05,0.02,0.01", "--out"])
        .arg(&out)
        .arg("verify")
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("expansion.json").exists());
    assert!(out.join("expansion.csv").exists());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("expansion.json")).unwrap())
            .unwrap();
    assert_eq!(json["records"].as_array().unwrap().len(), 4);
    // CSV floats carry 17 significant digits
    let csv = std::fs::read_to_string(out.join("expansion.csv")).unwrap();
    let second_line = csv.lines().nth(1).unwrap();
    let first_field = second_line.split(',').next().unwrap();
    assert!(first_field.contains('e') && first_field.len() >= 20, "field: {first_field}");
}

#[test]
fn suite_is_deterministic_for_a_seed() {
    let out1 = tmpdir("suite1");
    let out2 = tmpdir("suite2");
    for out in [&out1, &out2] {
        let status = bin()
            .args(["--scenario", "flat-weight-quartic", "--seed", "777", "--out"])
            .arg(out)
            .arg("suite")
            .env("GAMMA2_THREADS", "1")
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(out1.join("suite.json")).unwrap();
    let b = std::fs::read(out2.join("suite.json")).unwrap();
    assert_eq!(a, b, "seeded suite reports must be byte-identical");
}

#[test]
fn minimize_reports_multiplier_metadata() {
    let out = tmpdir("minimize");
    let cfg = out.join("m.cfg");
    std::fs::write(
        &cfg,
        "potential.kind = quartic\nweight.kind = affine\nweight.a0 = 1\nweight.a1 = 1\n\
         weight.t_lo = -1\nweight.t_hi = 1\nrun.mass = 1.0\nrun.eps = 0.02\n",
    )
    .unwrap();
    let status = bin()
        .args(["--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&out)
        .arg("minimize")
        .status()
        .unwrap();
    assert!(status.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("minimize.json")).unwrap())
            .unwrap();
    let lam = json["lambda_eps"].as_f64().unwrap();
    assert!((lam - 0.9428090415820634).abs() / 0.9428 < 0.02, "lambda {lam}");
    assert!(json["el_residual"].as_f64().unwrap() < 1e-8);
    assert!(Path::new(&out).join("field.csv").exists());
}
