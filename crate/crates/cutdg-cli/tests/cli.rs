//! End-to-end checks of the command line driver.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cutdg"))
}

#[test]
fn lists_presets() {
    let out = bin().arg("list-presets").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["stationary_scalar_accuracy", "acoustic", "moving_conservation", "region_map"] {
        assert!(text.contains(name), "missing {name}");
    }
}

#[test]
fn unknown_preset_is_an_error() {
    let out = bin().args(["run", "--preset", "nope"]).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("unknown preset"));
}

#[test]
fn run_writes_deterministic_trace() {
    let dir = tempfile::tempdir().unwrap();
    let path = |sub: &str| dir.path().join(sub);
    for sub in ["a", "b"] {
        let out = bin()
            .args([
                "run",
                "--preset",
                "stationary_scalar_conservation",
                "--n",
                "20",
                "--degree",
                "1",
                "--t-end",
                "0.05",
                "--svg",
                "--output",
            ])
            .arg(path(sub))
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(path("a").join("stationary_scalar_conservation_trace.csv")).unwrap();
    let b = std::fs::read(path("b").join("stationary_scalar_conservation_trace.csv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "identical invocations must produce identical bytes");
    let svg = std::fs::read_to_string(path("a").join("stationary_scalar_conservation_trace.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    let csv = String::from_utf8(a).unwrap();
    assert!(csv.starts_with("t,e,energy\n"));
}

#[test]
fn converge_writes_table_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "converge",
            "--preset",
            "stationary_scalar_accuracy",
            "--degree",
            "1",
            "--n",
            "10,20",
            "--output",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(dir.path().join("stationary_scalar_accuracy_convergence.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next().unwrap(), "N,h,L1,L2,Linf,order_L2");
    assert_eq!(lines.count(), 2);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "preset=stationary_scalar_conservation\nn=20\ndegree=1\nt_end=0.05\n").unwrap();
    let out = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--output"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("stationary_scalar_conservation_trace.csv").exists());
}

#[test]
fn region_map_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["region-map", "--samples", "11", "--output"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let table = std::fs::read_to_string(dir.path().join("region_map.csv")).unwrap();
    assert!(table.starts_with("lambda1,lambda2,feasible,eta_lo,eta_hi\n"));
    assert_eq!(table.lines().count(), 1 + 11 * 11);
}
