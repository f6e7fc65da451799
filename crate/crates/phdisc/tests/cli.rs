use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use phdisc::io::read_triplets;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn phdisc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phdisc")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn verify_unit_config() {
    let cfg = configs().join("unit.cfg");
    let out = phdisc(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("PASS max |FEᵀ+EFᵀ|"), "{text}");
    assert!(text.contains("≤ 1e-12"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn verify_with_overrides() {
    let cfg = configs().join("unit.cfg");
    let out = phdisc(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--n-elements",
        "3",
        "--sigma",
        "0.1,1,10",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("min eigenvalue of aggregate R"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "domain = 0, 1\nn_elements = 2\ndt = -0.1\n");
    let out = phdisc(&["verify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 3"));

    let cfg = write_config(dir.path(), "");
    let out = phdisc(&["verify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("domain") && err.contains("n_elements"), "{err}");

    let out = phdisc(&["verify", "--config", "/nonexistent/run.cfg"]);
    assert_eq!(out.status.code(), Some(2));
    let cfg = configs().join("unit.cfg");
    let out = phdisc(&["verify", "--config", cfg.to_str().unwrap(), "--dt", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = phdisc(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_needs_densities() {
    let cfg = configs().join("unit.cfg");
    let dir = tempfile::tempdir().unwrap();
    let out = phdisc(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn matrices_prints_blocks() {
    let cfg = configs().join("unit.cfg");
    let out = phdisc(&["matrices", "--config", cfg.to_str().unwrap(), "--element", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["M1 =", "M6 =", "E =", "F =", "A =", "B =", "C =", "D ="] {
        assert!(text.contains(name), "missing {name}");
    }
    assert!(text.contains("element 2: [0.25, 0.5]"));
    let out = phdisc(&["matrices", "--config", cfg.to_str().unwrap(), "--element", "9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn assemble_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("transmission_line.cfg");
    let out = phdisc(&[
        "assemble",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("zero fraction"), "{text}");
    assert!(text.contains("0.7375"));
    let (shape, entries) = read_triplets(std::io::BufReader::new(
        fs::File::open(dir.path().join("A.txt")).unwrap(),
    ))
    .unwrap();
    assert_eq!(shape, (80, 80));
    assert!(80 * 80 - entries.len() >= 4480);
    for name in ["B.txt", "C.txt", "D.txt", "sparsity.txt"] {
        assert!(dir.path().join(name).exists());
    }
}

#[test]
fn simulate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("transmission_line.cfg");
    let text = fs::read_to_string(&cfg).unwrap().replace("t_end = 10", "t_end = 0.5");
    let cfg = write_config(dir.path(), &text);
    let out = phdisc(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
        "--dt",
        "0.002",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("simulation.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,H,dHdt,power,u1,u2,y1,y2"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 251);
    let first: Vec<f64> = rows[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first.len(), 8);
    assert!((first[0] - 0.002).abs() < 1e-15);
    // 17 significant digits
    assert_eq!(
        rows[1]
            .split(',')
            .nth(4)
            .unwrap()
            .split('e')
            .next()
            .unwrap()
            .replace(['-', '.'], "")
            .len(),
        17
    );
}

#[test]
fn nonlinear_config_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("nonlinear.cfg");
    let out = phdisc(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = fs::read_to_string(dir.path().join("simulation.csv"))
        .unwrap()
        .lines()
        .count();
    assert_eq!(rows, 3001 + 1);
}
