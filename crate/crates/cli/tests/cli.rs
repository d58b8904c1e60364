use std::path::Path;
use std::process::{Command, Output};

use mimqbp::codec::peg_regular;

fn mimqbp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mimqbp")).args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn design(out: &Path, sigma: &str, iters: &str) -> Output {
    mimqbp(&[
        "design",
        "--dv",
        "3",
        "--dc",
        "6",
        "--bits",
        "3",
        "--qc",
        "8",
        "--qv",
        "8",
        "--sigma-d",
        sigma,
        "--iters",
        iters,
        "--out",
        path(out),
    ])
}

#[test]
fn design_then_inspect() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("d.toml");
    let out = design(&spec, "0.75", "15");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(spec.is_file());

    let out = mimqbp(&["inspect", "--spec", path(&spec)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mi_r: Vec<f64> = text
        .lines()
        .skip_while(|l| !l.contains("I(X;R)"))
        .skip(1)
        .take_while(|l| !l.trim().is_empty())
        .map(|l| l.split_whitespace().nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(mi_r.len(), 15);
    assert!(mi_r.windows(2).all(|w| w[1] >= w[0] - 1e-9), "{mi_r:?}");
    assert!(text.contains("gamma_v"));
}

#[test]
fn overrides_replace_bit_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("d.toml");
    let out = mimqbp(&[
        "design",
        "--dv",
        "3",
        "--dc",
        "6",
        "--bits",
        "3",
        "--l-size",
        "16",
        "--qc",
        "8",
        "--qv",
        "8",
        "--sigma-d",
        "0.8",
        "--iters",
        "3",
        "--out",
        path(&spec),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let loaded = mimqbp::de::load_spec(&spec).unwrap();
    assert_eq!((loaded.config.l_size, loaded.config.r_size, loaded.config.s_size), (16, 8, 8));
    assert_eq!(loaded.initial_r_map.len(), 16);
}

#[test]
fn threshold_prints_sigma() {
    let out = mimqbp(&[
        "threshold",
        "--dv",
        "3",
        "--dc",
        "6",
        "--bits",
        "3",
        "--qc",
        "8",
        "--qv",
        "8",
        "--iters",
        "20",
        "--lo",
        "0.6",
        "--hi",
        "1.0",
        "--tol",
        "0.05",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let sigma: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((0.6..1.0).contains(&sigma));
}

#[test]
fn simulate_writes_both_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let code = dir.path().join("toy.alist");
    std::fs::write(&code, peg_regular(120, 3, 6, 3).unwrap().to_alist()).unwrap();
    let spec = dir.path().join("d.toml");
    assert!(design(&spec, "0.8", "10").status.success());
    let csv = dir.path().join("run.csv");
    let args = [
        "simulate",
        "--code",
        path(&code),
        "--spec",
        path(&spec),
        "--snr",
        "1,2.5",
        "--min-ferr",
        "5",
        "--seed",
        "3",
        "--workers",
        "2",
        "--baseline-bp",
        "--out",
        path(&csv),
    ];
    let out = mimqbp(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let first = std::fs::read_to_string(&csv).unwrap();
    let bp = std::fs::read_to_string(dir.path().join("run_bp.csv")).unwrap();
    assert_eq!(first.lines().count(), 3);
    assert_eq!(bp.lines().count(), 3);
    assert!(first.starts_with("snr_db,sigma,frames,"));
    assert!(String::from_utf8(out.stdout).unwrap().contains("code toy"));

    assert!(mimqbp(&args).status.success());
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), first);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(mimqbp(&["design", "--bogus"]).status.code(), Some(2));
    assert_eq!(mimqbp(&[]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("d.toml");
    // a check degree of 2 is rejected before any work
    let out = mimqbp(&[
        "design",
        "--dv",
        "3",
        "--dc",
        "2",
        "--bits",
        "3",
        "--qc",
        "8",
        "--qv",
        "8",
        "--sigma-d",
        "0.8",
        "--iters",
        "3",
        "--out",
        path(&spec),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!spec.exists());
    assert_eq!(String::from_utf8(out.stderr).unwrap().lines().count(), 1);
}

#[test]
fn design_failure_exits_3_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("d.toml");
    let out = design(&spec, "50", "5");
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!spec.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn io_failures_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = design(&dir.path().join("missing/d.toml"), "0.8", "3");
    assert_eq!(out.status.code(), Some(4));
    let out = mimqbp(&["inspect", "--spec", path(&dir.path().join("none.toml"))]);
    assert_eq!(out.status.code(), Some(4));
    let garbage = dir.path().join("bad.toml");
    std::fs::write(&garbage, "version = 1\n").unwrap();
    assert_eq!(mimqbp(&["inspect", "--spec", path(&garbage)]).status.code(), Some(4));
    let out = mimqbp(&[
        "simulate",
        "--code",
        path(&dir.path().join("no.alist")),
        "--spec",
        path(&garbage),
        "--snr",
        "1",
        "--out",
        path(&dir.path().join("o.csv")),
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(!dir.path().join("o.csv").exists());
}
