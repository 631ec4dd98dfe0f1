use std::fs;
use std::path::Path;

use nightsim_core::io::{read_pfm, read_png_gray8, read_png_rgb8};
use nightsim_core::mesh::{read_obj, read_ply};
use nightsim_core::pipeline::{
    deterministic_artifacts, ingest, run_pipeline, synth_scene, write_synth_scene, JobManifest, RunOptions, Stage,
    StageName, SynthKind,
};
use nightsim_core::Error;

fn fixture(dir: &Path, seeds: &[u64]) -> JobManifest {
    let scene = synth_scene(SynthKind::CarOnRoad, 64, 64, 9).unwrap();
    let path = write_synth_scene(&scene, dir, seeds).unwrap();
    let mut m = JobManifest::load(&path).unwrap();
    m.config = Some(toml::from_str("[refine]\nsteps = 50\n[render]\nsamples_per_pixel = 4\n").unwrap());
    m
}

#[test]
fn full_run_writes_readable_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture(dir.path(), &[0, 1, 2]);
    let summary = run_pipeline(&m, &RunOptions::default()).unwrap();
    let out = &m.job.output_dir;
    for name in ["filtered_depth.pfm", "refined_depth.pfm", "uncertainty.png", "loss_trace.txt", "mesh.obj", "mesh.ply"] {
        assert!(out.join(name).exists(), "{name}");
    }
    assert_eq!(read_pfm(&out.join("refined_depth.pfm")).unwrap().width(), 64);
    let u = read_png_gray8(&out.join("uncertainty.png")).unwrap();
    assert!(u.data().iter().all(|&v| v == 0 || v == 255));
    let ply = read_ply(&out.join("mesh.ply")).unwrap();
    let obj = read_obj(&out.join("mesh.obj")).unwrap();
    assert_eq!(ply.faces, obj.faces);
    assert!(summary.audit.unwrap().is_watertight());

    let imgs: Vec<_> = [0, 1, 2]
        .iter()
        .map(|s| read_png_rgb8(&out.join(format!("night_{s}.png"))).unwrap())
        .collect();
    assert_ne!(imgs[0], imgs[1]);
    assert_ne!(imgs[1], imgs[2]);
    assert_ne!(imgs[0], imgs[2]);
    let trace = fs::read_to_string(out.join("loss_trace.txt")).unwrap();
    assert_eq!(trace.lines().count(), 52);
}

#[test]
fn mesh_stage_stops_before_rendering() {
    let dir = tempfile::tempdir().unwrap();
    let mut m = fixture(dir.path(), &[0]);
    m.job.stages = "mesh".into();
    let summary = run_pipeline(&m, &RunOptions::default()).unwrap();
    assert!(m.job.output_dir.join("mesh.ply").exists());
    assert!(!m.job.output_dir.join("night_0.png").exists());
    assert!(!m.job.output_dir.join("night_0_linear.pfm").exists());
    let ran: Vec<_> = summary.timings.iter().map(|t| t.0).collect();
    assert!(!ran.contains(&StageName::Run(Stage::Relight)));
}

#[test]
fn report_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture(dir.path(), &[5]);
    run_pipeline(&m, &RunOptions { threads: Some(1) }).unwrap();
    let mut again = JobManifest::load(&m.job.output_dir.join("run_report.toml")).unwrap();
    again.job.output_dir = dir.path().join("again");
    run_pipeline(&again, &RunOptions { threads: Some(3) }).unwrap();
    let a = deterministic_artifacts(&m.job.output_dir).unwrap();
    let b = deterministic_artifacts(&again.job.output_dir).unwrap();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.file_name(), y.file_name());
        if x.file_name().unwrap() == "run_report.toml" {
            continue;
        }
        assert!(fs::read(x).unwrap() == fs::read(y).unwrap(), "{} differs", x.display());
    }
}

#[test]
fn ingest_rejects_bad_headers() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture(dir.path(), &[0]);
    let cfg = m.resolve_config().unwrap();
    assert!(ingest(&m, &cfg).is_ok());

    let mut swapped = m.clone();
    swapped.inputs.depth = m.inputs.semantic.with_file_name("fake.pfm");
    fs::copy(&m.inputs.semantic, &swapped.inputs.depth).unwrap();
    let e = ingest(&swapped, &cfg).unwrap_err().to_string();
    assert!(e.contains("format mismatch") && e.contains("fake.pfm"), "{e}");

    let mut bytes = fs::read(&m.inputs.depth).unwrap();
    let text = String::from_utf8_lossy(&bytes[..20]).to_string();
    let at = text.find("-1").unwrap();
    bytes.remove(at);
    let be = dir.path().join("be.pfm");
    fs::write(&be, &bytes).unwrap();
    let mut big = m.clone();
    big.inputs.depth = be;
    let e = ingest(&big, &cfg).unwrap_err().to_string();
    assert!(e.contains("unsupported endianness"), "{e}");

    let mut sem = read_png_gray8(&m.inputs.semantic).unwrap();
    sem.set(3, 4, 77);
    nightsim_core::io::write_png_gray8(&sem, &m.inputs.semantic).unwrap();
    match ingest(&m, &cfg).unwrap_err() {
        Error::Format { path, msg } => {
            assert!(path.ends_with("semantic.png"));
            assert!(msg.contains("77") && msg.contains('3') && msg.contains('4'), "{msg}");
        }
        other => panic!("{other}"),
    }
}
