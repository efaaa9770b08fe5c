use std::fs;
use std::path::Path;
use std::process::Command;

fn reldiff(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_reldiff")).args(args).env("RUST_LOG", "warn").output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn figure1_writes_fixed_header_and_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig");
    let cfg = write_config(
        dir.path(),
        "f.json",
        r#"{"experiment": "figure1", "numerics": {"grid_n": 50, "alpha_max": 4.0}}"#,
    );
    let (code, err) = reldiff(&["figure1", "--config", &cfg, "--out", path_arg(&out)]);
    assert_eq!(code, 0, "{err}");
    let csv = fs::read_to_string(out.join("figure1.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("d_tau,alpha,phi_rel,phi_nonrel"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3 * 50);
    let times: Vec<f64> = rows.iter().step_by(50).map(|r| r[0]).collect();
    assert_eq!(times, vec![0.1, 1.0, 3.0]);
    assert!(rows.iter().all(|r| r[2] > 0.0 && r[3] > 0.0));

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    for key in ["schema", "experiment", "config", "statistics", "thresholds", "pass"] {
        assert!(summary.get(key).is_some(), "missing {key}");
    }
    assert_eq!(summary["experiment"], "figure1");
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let unknown = write_config(dir.path(), "u.json", r#"{"experiment": "boost", "physics": {"speed": 1}}"#);
    assert_eq!(reldiff(&["boost", "--config", &unknown, "--out", path_arg(&out)]).0, 2);
    let chi = write_config(
        dir.path(),
        "c.json",
        r#"{"experiment": "boost", "physics": {"chi": 3.0, "nu": 1.0, "diffusion": 1.0}}"#,
    );
    assert_eq!(reldiff(&["boost", "--config", &chi, "--out", path_arg(&out)]).0, 2);
    let other = write_config(dir.path(), "o.json", r#"{"experiment": "pde"}"#);
    assert_eq!(reldiff(&["boost", "--config", &other, "--out", path_arg(&out)]).0, 2);
    assert_eq!(reldiff(&["boost", "--config", "/nonexistent/config.json"]).0, 2);
    assert_eq!(reldiff(&["no-such-experiment"]).0, 2);
    assert!(!out.exists());
}

#[test]
fn threshold_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p");
    let cfg = write_config(dir.path(), "p.json", r#"{"experiment": "photon-check", "thresholds": {"order_min": 2.5}}"#);
    assert_eq!(reldiff(&["photon-check", "--config", &cfg, "--out", path_arg(&out)]).0, 1);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], false);
    assert_eq!(summary["checks"]["order_two_over_r_min"]["pass"], false);
}

#[test]
fn numerical_blowup_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "b.json",
        r#"{"experiment": "equilibrium",
            "physics": {"nu": 1000.0, "diffusion": 1.0},
            "numerics": {"dtau": 1.0, "steps": 200, "particles": 4, "integrator": "euler_ito"}}"#,
    );
    let (code, err) = reldiff(&["equilibrium", "--config", &cfg, "--out", path_arg(&dir.path().join("b"))]);
    assert_eq!(code, 3, "{err}");
}

#[test]
fn thread_count_does_not_change_output_and_seed_does() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "e.json",
        r#"{"experiment": "equilibrium", "numerics": {"particles": 300, "steps": 300, "seed": 5}}"#,
    );
    let run = |threads: &str, seed: &str, sub: &str| {
        let out = dir.path().join(sub);
        let (code, err) =
            reldiff(&["equilibrium", "--config", &cfg, "--threads", threads, "--seed", seed, "--out", path_arg(&out)]);
        // a short run is far from equilibrium, so only 0 and 1 are acceptable
        assert!(code == 0 || code == 1, "{err}");
        fs::read(out.join("states.csv")).unwrap()
    };
    let a = run("1", "5", "a");
    let b = run("4", "5", "b");
    let c = run("1", "6", "c");
    assert_eq!(a, b);
    assert_ne!(a, c);
}
