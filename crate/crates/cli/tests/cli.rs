use std::f64::consts::PI;
use std::process::{Command, Output};

use serde_json::Value;

fn barenco(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_barenco"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = barenco(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn f(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

#[test]
fn gate_protocol1_appendix_a() {
    let v = json(&["gate", "--protocol", "1", "--preset", "appendixA", "--beta1", "0.25pi", "--T", "0.5", "--beta0", "0"]);
    assert!((f(&v["angles"]["alpha"]) - 2.5121).abs() < 1e-3);
    assert!((f(&v["angles"]["theta"]) - 1.1231).abs() < 1e-3);
    assert!(f(&v["oracle_residual"]) < 1e-12);
    assert_eq!(v["matrix"].as_array().unwrap().len(), 4);
}

#[test]
fn gate_special_cnot() {
    let v = json(&["gate", "--special", "cnot", "--b01-2pi-mhz", "0.558", "--b02-2pi-mhz", "0"]);
    assert!((f(&v["T_us"]) - 1.0 / (2.0 * 0.558)).abs() < 1e-12);
    let m = &v["matrix"];
    for (r, c) in [(0, 0), (1, 1)] {
        assert!((f(&m[r][c][0]) - 1.0).abs() < 1e-12);
    }
    // |10⟩ ↔ |11⟩ up to the global phase fixed by the closed form.
    let amp = f(&m[2][3][0]).hypot(f(&m[2][3][1]));
    assert!((amp - 1.0).abs() < 1e-12);
    assert!(f(&m[2][2][0]).hypot(f(&m[2][2][1])) < 1e-12);
}

#[test]
fn gate_protocol2_zero_wait_is_identity_class() {
    let v = json(&["gate", "--protocol", "2", "--T", "0"]);
    assert_eq!(f(&v["angles"]["theta"]), 0.0);
    assert_eq!(v["phi_undefined"], Value::Bool(true));
}

#[test]
fn simulate_protocol1() {
    let v = json(&["simulate", "--protocol", "1", "--omega-2pi-mhz", "30", "--preset", "appendixA", "--T", "0.5"]);
    let e = f(&v["infidelity"]);
    assert!((1e-4..1e-3).contains(&e), "1-F = {e}");
}

#[test]
fn errors_force() {
    let v = json(&["errors", "force", "--preset", "appendixA", "--t-ry", "1"]);
    assert!((f(&v["delta_v_m_per_s"]) / 7.6e-4 - 1.0).abs() < 0.05);
    assert!((f(&v["delta_x_um"]) / 3.8e-4 - 1.0).abs() < 0.05);
}

#[test]
fn errors_trap_reports_sigmas() {
    let v = json(&["errors", "trap", "--Ta-uK", "10"]);
    assert!(f(&v["sigmas_um"]["sigma_z"]) > f(&v["sigmas_um"]["sigma_x"]));
}

#[test]
fn errors_budget_sums_terms() {
    let v = json(&["errors", "budget", "--protocol", "1", "--T", "0.5"]);
    let b = &v["budget"];
    let sum = f(&b["e_decay"]) + f(&b["e_blockade"]) + f(&b["e_leakage"]);
    assert!((sum - f(&b["total"])).abs() < 1e-15);
    assert!((f(&b["e_blockade"]) / 1.787e-4 - 1.0).abs() < 0.01);
    assert!(v["note"].is_string());
}

#[test]
fn errors_mc_is_deterministic() {
    let args = ["errors", "mc", "--preset", "appendixA", "--Ta-uK", "100", "--samples", "5000", "--seed", "7"];
    let a = barenco(&args);
    let b = barenco(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn errors_mc_ignores_thread_count() {
    let args = ["errors", "mc", "--Ta-uK", "50", "--samples", "4000", "--seed", "3"];
    let one = Command::new(env!("CARGO_BIN_EXE_barenco"))
        .args(args)
        .env("BARENCO_THREADS", "1")
        .output()
        .unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_barenco"))
        .args(args)
        .env("BARENCO_THREADS", "4")
        .output()
        .unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn design_cnot_free_ratio() {
    let v = json(&["design", "--special", "cnot", "--b01-2pi-mhz", "0.558", "--b02-2pi-mhz", "0", "--free-ratio"]);
    assert_eq!(v["solution"]["feasible"], Value::Bool(true));
    assert!(f(&v["solution"]["residual"]) < 1e-9);
}

#[test]
fn design_protocol2_round_trip() {
    let v = json(&["design", "--protocol", "2", "--alpha", "1", "--theta", "0.7", "--phi", "0.3"]);
    let s = &v["solution"];
    assert_eq!(s["feasible"], Value::Bool(true));
    let beta1 = f(&s["beta1"]);
    let t = f(&s["params"]["wait"]);
    let g = json(&["gate", "--protocol", "2", "--beta1", &beta1.to_string(), "--T", &t.to_string()]);
    assert!((f(&g["angles"]["theta"]) - 0.7).abs() < 1e-6);
    assert!((f(&g["angles"]["phi"]) - 0.3).abs() < 1e-6);
}

#[test]
fn sweep_headers_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("fig3", "ratio,theta_rad,alpha_rad"),
        ("fig5", "label,T_us,alpha_rad,theta_rad,phi_rad,sin_theta,cos_theta"),
        ("fig6", "protocol,T_us,alpha_rad,theta_rad,phi_rad,e_decay,e_blockade,e_leakage,total"),
    ];
    for (fig, header) in cases {
        let path = dir.path().join(format!("{fig}.csv"));
        let v = json(&["sweep", "--figure", fig, "--out", path.to_str().unwrap()]);
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(header), "{fig}");
        assert_eq!(lines.count() as u64, v["rows"].as_u64().unwrap());
    }
}

#[test]
fn sweep_fig3_row_on_line() {
    let out = barenco(&["sweep", "--figure", "fig3", "--ratios", "2", "--max", "0.5", "--step", "0.25"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(last[0], 2.0);
    assert_eq!(last[1], 0.5);
    assert!((last[2] - (PI - 1.5)).abs() < 1e-12);
}

#[test]
fn sweep_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        json(&["sweep", "--figure", "fig6", "--out", p.to_str().unwrap()]);
    }
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn exit_codes() {
    assert_eq!(barenco(&["gate", "--protocol", "3", "--T", "1"]).status.code(), Some(2));
    assert_eq!(barenco(&["gate", "--T", "-1"]).status.code(), Some(2));
    assert_eq!(barenco(&["gate", "--beta0", "abc", "--T", "1"]).status.code(), Some(2));
    assert_eq!(barenco(&["gate", "--preset", "nope", "--T", "1"]).status.code(), Some(2));
    assert_eq!(barenco(&["gate", "--protocol", "1", "--beta1", "0.3", "--T", "1"]).status.code(), Some(2));
    assert_eq!(barenco(&["gate", "--special", "cnot"]).status.code(), Some(3));
    assert_eq!(
        barenco(&["sweep", "--figure", "fig3", "--out", "/nonexistent-dir/x.csv"]).status.code(),
        Some(4)
    );
    assert_eq!(barenco(&["errors", "mc", "--samples", "10"]).status.code(), Some(2));
}

#[test]
fn help_documents_units() {
    let out = barenco(&["simulate", "--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("2pi MHz"));
    assert!(text.contains("μs"));
}

#[test]
fn config_file_replaces_preset_blockade() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pair.cfg");
    std::fs::write(&path, "c6_01_2pi_THz_um6 = 64\nc6_02_2pi_THz_um6 = 0\nl_um = 20\n").unwrap();
    let v = json(&["gate", "--special", "cnot", "--config", path.to_str().unwrap()]);
    assert!((f(&v["blockade"]["b01_2pi_mhz"]) - 1.0).abs() < 1e-12);
    std::fs::write(&path, "l_um = 20\n").unwrap();
    assert_eq!(barenco(&["gate", "--T", "1", "--config", path.to_str().unwrap()]).status.code(), Some(2));
}
