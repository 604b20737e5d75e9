use std::process::Command;

fn agf() -> Command {
    Command::new(env!("CARGO_BIN_EXE_agf"))
}

fn simulate(dir: &std::path::Path, name: &str, threads: &str, extra: &[&str]) -> String {
    let out = dir.join(name);
    let status = agf()
        .env("AGF_THREADS", threads)
        .args(["simulate", "--qubits", "1", "--m", "12,20", "--eta", "0,0.05", "--trials", "2", "--seed", "4"])
        .args(extra)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    std::fs::read_to_string(out).unwrap()
}

#[test]
fn simulate_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = simulate(dir.path(), "a.csv", "1", &[]);
    let b = simulate(dir.path(), "b.csv", "2", &[]);
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(lines.next().unwrap(), "n,d,m,eta,trial,seed,eps_rec,objective,iterations,status,wall_time_ms");
    assert_eq!(lines.count(), 2 * 2 * 2);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"qubits": 1, "m_values": [12], "eta_values": [0.0], "trials": 5, "master_seed": 4}"#)
        .unwrap();
    let out = dir.path().join("o.csv");
    let status = agf()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .args(["--trials", "2", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().skip(1).all(|l| l.starts_with("1,2,12,0,")));
}

#[test]
fn invalid_inputs_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let s = agf().args(["simulate", "--qubits", "4", "--out"]).arg(&out).status().unwrap();
    assert!(!s.success());
    let s = agf()
        .args(["simulate", "--qubits", "1", "--m", "10", "--trials", "1", "--out", "/nonexistent/dir/x.csv"])
        .status()
        .unwrap();
    assert!(!s.success());
    let s = agf().args(["unitarity", "--channel", "/nonexistent.csv"]).status().unwrap();
    assert!(!s.success());
    let s = agf().env("AGF_THREADS", "many").args(["selftest"]).status().unwrap();
    assert!(!s.success());
}

#[test]
fn selftest_fast_passes() {
    let out = agf().args(["selftest", "--level", "fast"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("PASS schur-weyl/young-completeness")));
    assert!(!text.contains("FAIL"));
}

#[test]
fn unitarity_of_depolarizing_and_mixture() {
    let out = agf()
        .args(["unitarity", "--channel", "depolarizing", "--design", "full-n1", "--json"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["unitarity"].as_f64().unwrap().abs() < 1e-10);
    assert!(v["scaled_variance"].as_f64().unwrap().abs() < 1e-10);

    let out = agf()
        .args(["unitarity", "--channel", "mixture:0.5", "--design", "full-n1", "--json"])
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["unitarity"].as_f64().unwrap() - 0.25).abs() < 1e-10);
    assert!((v["scaled_variance"].as_f64().unwrap() - 0.25).abs() < 1e-10);
}

#[test]
fn sampled_design_prints_warning() {
    let out = agf()
        .args(["unitarity", "--channel", "random-unitary", "--design", "sampled", "--samples", "10"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("not a unitary 2-design"));
}
