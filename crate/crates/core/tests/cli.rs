use std::fs;
use std::path::Path;

use axibouss::cli::{self, EXIT_BLOWUP, EXIT_CONFIG, EXIT_OK};
use axibouss::config::parse_config;

const SMALL: &str = "\
grid.nr = 33
grid.nz = 65
grid.lr = 6
grid.lz = 6
vortex.l2_norm = 1
vortex.r0 = 1.5
vortex.z0 = -1.5
vortex.sigma = 0.5
density.peak = 1
density.r1 = 1
density.r2 = 2
density.z0 = -1.5
density.h = 0.5
run.t_end = 0.2
run.record_interval = 0.05
run.snapshot_interval = 0.1
particles.seeds = 1.5 -1.5; 1.2 -1.2 0.5
";

fn write_cfg(dir: &Path, text: &str) -> String {
    let p = dir.join("case.cfg");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn run(args: &[&str]) -> i32 {
    let mut v = vec!["axibouss", "--quiet"];
    v.extend_from_slice(args);
    cli::main(v)
}

#[test]
fn run_writes_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    assert_eq!(run(&["run", &cfg, "--output", out.to_str().unwrap()]), EXIT_OK);
    for name in ["run.cfg", "diagnostics.csv", "checks.json", "particles.csv", "snap_t0.000000.fld", "snap_t0.100000.fld", "snap_t0.200000.fld"] {
        assert!(out.join(name).exists(), "{name}");
    }
    let csv = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 5);
    assert!(csv.starts_with("t,v_l2,grad_v_l2,"));
}

#[test]
fn check_reproduces_run_ledger() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    assert_eq!(run(&["run", &cfg, "--output", out.to_str().unwrap()]), EXIT_OK);
    let again = tmp.path().join("again");
    let csv = out.join("diagnostics.csv");
    assert_eq!(run(&["check", csv.to_str().unwrap(), "--output", again.to_str().unwrap()]), EXIT_OK);
    assert_eq!(fs::read(out.join("checks.json")).unwrap(), fs::read(again.join("checks.json")).unwrap());
}

#[test]
fn repeated_runs_are_bitwise_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), SMALL);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run(&["run", &cfg, "--output", a.to_str().unwrap()]), EXIT_OK);
    assert_eq!(run(&["run", "--config", &cfg, "--output", b.to_str().unwrap()]), EXIT_OK);
    for name in ["diagnostics.csv", "checks.json", "particles.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn print_config_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), SMALL);
    let once = parse_config(SMALL).unwrap().canonical();
    let reparsed = parse_config(&once).unwrap();
    assert_eq!(reparsed.canonical(), once);
    assert_eq!(reparsed, parse_config(SMALL).unwrap());
    assert_eq!(run(&["run", &cfg, "--print-config"]), EXIT_OK);
}

#[test]
fn configuration_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write_cfg(tmp.path(), &SMALL.replace("density.r1 = 1", "density.r1 = 0.0"));
    assert_eq!(run(&["run", &bad]), EXIT_CONFIG);
    let typo = write_cfg(tmp.path(), &format!("{SMALL}grid.nrr = 3\n"));
    assert_eq!(run(&["run", &typo]), EXIT_CONFIG);
    assert_eq!(run(&["run", tmp.path().join("missing.cfg").to_str().unwrap()]), EXIT_CONFIG);
    assert_eq!(run(&["lp-verify", "--n", "48"]), EXIT_CONFIG);
}

#[test]
fn blow_up_exits_3_and_keeps_last_state() {
    // The nonlinear term overflows on the first step.
    let text = SMALL.replace("vortex.l2_norm = 1", "vortex.amplitude = 1e200");
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), &text);
    let out = tmp.path().join("out");
    assert_eq!(run(&["run", &cfg, "--output", out.to_str().unwrap()]), EXIT_BLOWUP);
    let last = fs::read_dir(&out).unwrap().filter_map(|e| e.ok()).any(|e| e.file_name().to_string_lossy().ends_with("_last.fld"));
    assert!(last);
}

#[test]
fn oracles_and_identity_suite_pass() {
    assert_eq!(run(&["oracle", "heat-kernel-5d"]), EXIT_OK);
    assert_eq!(run(&["oracle", "strain-sharpness"]), EXIT_OK);
    assert_eq!(run(&["lp-verify"]), EXIT_OK);
    assert_eq!(run(&["version"]), EXIT_OK);
}
