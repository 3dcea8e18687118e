//! End-to-end contract tests for the `gso` binary: exit codes, file
//! round-trips, determinism, and backend agreement through the CLI.

use std::path::Path;
use std::process::{Command, Output};

fn gso(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gso"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(path: &Path, content: &str) {
    std::fs::write(path, content).unwrap();
}

fn fixture(dir: &Path) -> (String, String, String) {
    let matrix = dir.join("m.csv");
    let response = dir.join("y.csv");
    let groups = dir.join("g.json");
    write(&matrix, "1,0,0\n0,1,0\n0,0,1\n");
    write(&response, "3.0\n4.0\n0.5\n");
    write(&groups, r#"{"d": 3, "groups": [[1, 2], [2, 3]]}"#);
    (
        matrix.display().to_string(),
        response.display().to_string(),
        groups.display().to_string(),
    )
}

#[test]
fn solve_roundtrip_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (m, y, g) = fixture(dir.path());
    let out = dir.path().join("sol.csv");
    let o = gso(&[
        "solve", "--matrix", &m, "--response", &y, "--groups", &g,
        "--tau", "0.2", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let text = std::fs::read_to_string(&out).unwrap();
    let sol: Vec<f64> = text.lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(sol.len(), 3);
    assert!(sol[0].abs() > 0.1, "expected a nonzero fit, got {sol:?}");
    // written floats parse back bit-identically
    for (line, v) in text.lines().zip(&sol) {
        assert_eq!(line.parse::<f64>().unwrap(), *v);
    }
    let manifest = std::fs::read_to_string(dir.path().join("sol.csv.manifest.json")).unwrap();
    let j: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(j["command"], "solve");
    assert_eq!(j["params"]["tau"], 0.2);
}

#[test]
fn solve_backends_and_modes_agree() {
    let dir = tempfile::tempdir().unwrap();
    let (m, y, g) = fixture(dir.path());
    let mut solutions = Vec::new();
    for (name, extra) in [
        ("dual.csv", vec!["--backend", "dual"]),
        ("cyclic.csv", vec!["--backend", "cyclic", "--outer-tol", "1e-5"]),
        ("repl.csv", vec!["--mode", "replication"]),
    ] {
        let out = dir.path().join(name);
        let mut args = vec![
            "solve", "--matrix", &m, "--response", &y, "--groups", &g,
            "--tau", "0.2", "--out", out.to_str().unwrap(),
        ];
        args.extend(extra);
        let o = gso(&args);
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        let sol: Vec<f64> = std::fs::read_to_string(&out)
            .unwrap()
            .lines()
            .map(|l| l.parse().unwrap())
            .collect();
        solutions.push(sol);
    }
    for other in &solutions[1..] {
        for (a, b) in solutions[0].iter().zip(other) {
            assert!((a - b).abs() < 1e-3, "{a} vs {b}");
        }
    }
}

#[test]
fn missing_file_is_input_error_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let (_, y, g) = fixture(dir.path());
    let o = gso(&[
        "solve", "--matrix", "/nonexistent/m.csv", "--response", &y,
        "--groups", &g, "--tau", "0.2", "--out", "/tmp/ignored.csv",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("/nonexistent/m.csv"), "{err}");
}

#[test]
fn bad_group_index_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let (m, y, g) = fixture(dir.path());
    write(&dir.path().join("g.json"), r#"{"d": 3, "groups": [[4]]}"#);
    let o = gso(&[
        "solve", "--matrix", &m, "--response", &y, "--groups", &g,
        "--tau", "0.2", "--out", "/tmp/ignored.csv",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("group 1") && err.contains("index 4"), "{err}");
}

#[test]
fn numerical_failure_is_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let (m, y, g) = fixture(dir.path());
    // cyclic backend at an unreachable tolerance within its budget
    let o = gso(&[
        "prox", "--vector", &y, "--groups", &g, "--lambda", "0.5",
        "--backend", "cyclic", "--tol", "1e-12",
        "--out", dir.path().join("p.csv").to_str().unwrap(),
    ]);
    let _ = m;
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn prox_command_soft_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let v = dir.path().join("v.csv");
    let g = dir.path().join("g1.json");
    write(&v, "3.0\n4.0\n");
    write(&g, r#"{"d": 2, "groups": [[1, 2]]}"#);
    let out = dir.path().join("p.csv");
    let o = gso(&[
        "prox", "--vector", v.to_str().unwrap(), "--groups", g.to_str().unwrap(),
        "--lambda", "1.0", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sol: Vec<f64> = std::fs::read_to_string(&out)
        .unwrap()
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    assert!((sol[0] - 2.4).abs() < 1e-6 && (sol[1] - 3.2).abs() < 1e-6, "{sol:?}");
}

#[test]
fn gen_is_deterministic_and_seed_env_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    for out in [&a, &b] {
        let o = gso(&[
            "gen", "--scenario", "regression-overlap", "--d", "50",
            "--db", "10", "--alpha", "1.0", "--seed", "9",
            "--out-dir", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let da = std::fs::read_to_string(a.join("design.csv")).unwrap();
    let db_ = std::fs::read_to_string(b.join("design.csv")).unwrap();
    assert_eq!(da, db_);

    let o = Command::new(env!("CARGO_BIN_EXE_gso"))
        .env("GSO_SEED", "10")
        .args([
            "gen", "--scenario", "regression-overlap", "--d", "50",
            "--db", "10", "--alpha", "1.0", "--seed", "9",
            "--out-dir", c.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(o.status.success());
    let dc = std::fs::read_to_string(c.join("design.csv")).unwrap();
    assert_ne!(da, dc, "GSO_SEED should override --seed");
}

#[test]
fn path_command_emits_summary_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (m, y, g) = fixture(dir.path());
    let out = dir.path().join("path.csv");
    let sols = dir.path().join("sols");
    let o = gso(&[
        "path", "--matrix", &m, "--response", &y, "--groups", &g,
        "--tau-count", "8", "--out", out.to_str().unwrap(),
        "--solutions-dir", sols.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "index,tau,support_size,selected_groups,outer_iterations,inner_iterations,converged,seconds,error"
    );
    assert_eq!(lines.count(), 8);
    assert!(sols.join("solution_0007.csv").exists());
}

#[test]
fn bench_reps_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("b1.csv");
    let out2 = dir.path().join("b2.csv");
    for out in [&out1, &out2] {
        let o = gso(&[
            "bench", "--scenario", "prox-bench", "--d", "60", "--db", "10",
            "--alpha", "1.0", "--reps", "1", "--seed", "4",
            "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let strip_timing = |p: &Path| -> Vec<String> {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| {
                let mut cols: Vec<&str> = l.split(',').collect();
                cols.remove(6); // seconds column
                cols.join(",")
            })
            .collect()
    };
    let r1 = strip_timing(&out1);
    let r2 = strip_timing(&out2);
    assert_eq!(r1.len(), 4); // one row per mode for --reps 1
    assert_eq!(r1, r2, "non-timing columns must be deterministic");
}
