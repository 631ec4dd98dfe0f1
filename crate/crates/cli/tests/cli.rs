use std::path::Path;
use std::process::{Command, Output};

fn nightsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nightsim")).args(args).output().expect("binary runs")
}

fn synth(dir: &Path, kind: &str) -> String {
    let out = dir.to_str().unwrap();
    let o = nightsim(&["synth", kind, "--seeds", "0,1", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap().trim().to_string()
}

#[test]
fn synth_run_inspect() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path(), "car-on-road");
    let cfg = dir.path().join("fast.toml");
    std::fs::write(&cfg, "[refine]\nsteps = 20\n[render]\nsamples_per_pixel = 2\n").unwrap();
    let out = dir.path().join("night");
    let o = nightsim(&[
        "run",
        &manifest,
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "7",
        "--seed",
        "8",
        "--out",
        out.to_str().unwrap(),
        "--threads",
        "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("night_7.png").exists() && out.join("night_8.png").exists());
    let report = std::fs::read_to_string(out.join("run_report.toml")).unwrap();
    assert!(report.contains("seeds = [7, 8]"));
    assert!(report.contains("steps = 20"));

    let o = nightsim(&["inspect", out.join("mesh.ply").to_str().unwrap(), out.join("refined_depth.pfm").to_str().unwrap()]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("0 non-manifold"), "{text}");
    assert!(text.contains("64x64 x1"), "{text}");
}

#[test]
fn stage_gating_from_flags() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path(), "step");
    let out = dir.path().join("o");
    let o = nightsim(&["run", &manifest, "--stages", "filter", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("uncertainty.png").exists());
    assert!(!out.join("refined_depth.pfm").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path(), "plane");

    let o = nightsim(&["run", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));

    let o = nightsim(&["run", &manifest, "--stages", "render"]);
    assert_eq!(o.status.code(), Some(2));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[variance]\nwindow = 100\n").unwrap();
    let o = nightsim(&["run", &manifest, "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(11));
    assert!(String::from_utf8_lossy(&o.stderr).contains("filter stage failed"));

    std::fs::write(dir.path().join("depth.pfm"), b"PF\n1 1\n1.0\n").unwrap();
    let o = nightsim(&["run", &manifest]);
    assert_eq!(o.status.code(), Some(10));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unsupported endianness"));

    let o = nightsim(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}
