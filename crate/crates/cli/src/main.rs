//! `nightsim` command line: run jobs, generate synthetic fixtures, inspect files.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::error;

use nightsim_core::io::{read_pfm, read_png_gray16, read_png_rgb8};
use nightsim_core::mesh::{edge_stats, read_obj, read_ply, SceneMesh};
use nightsim_core::pipeline::{
    ingest, run_pipeline, synth_scene, write_synth_scene, JobManifest, RunOptions, Stage, StageError, StageName,
    SynthKind,
};
use nightsim_core::{Error, PixelGrid};

#[derive(Parser)]
#[command(name = "nightsim", version, about = "Day-to-night street scene synthesis")]
struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline described by a job manifest.
    Run {
        manifest: PathBuf,
        /// Config file layered over the manifest's profile.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Activation seed; repeat for several night images.
        #[arg(long)]
        seed: Vec<u64>,
        /// `all`, a stage name, or a comma list of leading stages.
        #[arg(long)]
        stages: Option<String>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Named hyperparameter profile.
        #[arg(long)]
        profile: Option<String>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Write a synthetic input bundle and manifest.
    Synth {
        #[arg(value_enum)]
        kind: Kind,
        /// Depth slope of the plane fixture.
        #[arg(long, default_value_t = 0.5)]
        slope: f64,
        #[arg(long, default_value_t = 64)]
        width: usize,
        #[arg(long, default_value_t = 64)]
        height: usize,
        /// Fixture seed; also the manifest's activation seeds unless --seeds is given.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Activation seeds written into the manifest.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print statistics of rasters (PFM/PNG), meshes (OBJ/PLY) or a manifest's inputs.
    Inspect {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Plane,
    Step,
    CarOnRoad,
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => 3,
        _ => 2,
    }
}

fn stage_code(e: &StageError) -> u8 {
    match e.stage {
        StageName::Setup => error_code(&e.source),
        StageName::Ingest => 10,
        StageName::Run(Stage::Filter) => 11,
        StageName::Run(Stage::Refine) => 12,
        StageName::Run(Stage::Mesh) => 13,
        StageName::Run(Stage::Relight) => 14,
        StageName::Run(Stage::Postprocess) => 15,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let code = match cli.command {
        Command::Run { manifest, config, seed, stages, out, profile, threads } => {
            run(&manifest, config, seed, stages, out, profile, threads)
        }
        Command::Synth { kind, slope, width, height, seed, seeds, out } => {
            let kind = match kind {
                Kind::Plane => SynthKind::Plane { slope },
                Kind::Step => SynthKind::Step,
                Kind::CarOnRoad => SynthKind::CarOnRoad,
            };
            let seeds = if seeds.is_empty() { vec![seed] } else { seeds };
            match synth_scene(kind, width, height, seed).and_then(|s| write_synth_scene(&s, &out, &seeds)) {
                Ok(p) => {
                    println!("{}", p.display());
                    0
                }
                Err(e) => {
                    error!("{e}");
                    error_code(&e)
                }
            }
        }
        Command::Inspect { paths } => {
            let mut code = 0;
            for p in &paths {
                if let Err(e) = inspect(p) {
                    error!("{e}");
                    code = code.max(error_code(&e));
                }
            }
            code
        }
    };
    ExitCode::from(code)
}

fn run(
    path: &Path,
    config: Option<PathBuf>,
    seeds: Vec<u64>,
    stages: Option<String>,
    out: Option<PathBuf>,
    profile: Option<String>,
    threads: Option<usize>,
) -> u8 {
    let mut m = match JobManifest::load(path) {
        Ok(m) => m,
        Err(e) => {
            error!("{e}");
            return error_code(&e);
        }
    };
    if config.is_some() {
        m.job.config_file = config;
    }
    if !seeds.is_empty() {
        m.job.seeds = seeds;
    }
    if let Some(s) = stages {
        m.job.stages = s;
    }
    if let Some(o) = out {
        m.job.output_dir = o;
    }
    if let Some(p) = profile {
        m.job.profile = p;
    }
    match run_pipeline(&m, &RunOptions { threads }) {
        Ok(summary) => {
            for a in &summary.artifacts {
                println!("{}", a.display());
            }
            0
        }
        Err(e) => {
            error!("{e}");
            stage_code(&e)
        }
    }
}

fn channel_stats(g: &PixelGrid) -> String {
    let ch = g.channels();
    let mut parts = Vec::new();
    for k in 0..ch {
        let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        for px in g.data().chunks_exact(ch) {
            lo = lo.min(px[k]);
            hi = hi.max(px[k]);
            sum += px[k];
        }
        let n = (g.width() * g.height()).max(1) as f64;
        parts.push(format!("c{k} min {lo:.6} max {hi:.6} mean {:.6}", sum / n));
    }
    parts.join("; ")
}

fn mesh_stats(m: &SceneMesh) -> String {
    let e = edge_stats(&m.faces);
    let (lo, hi) = m
        .vertices
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v[2]), hi.max(v[2])));
    format!(
        "{} vertices, {} faces, {} emissive; edges: {} boundary, {} interior, {} non-manifold; depth {lo:.4}..{hi:.4}",
        m.vertex_count(),
        m.face_count(),
        m.emissive_count(),
        e.boundary,
        e.interior,
        e.nonmanifold
    )
}

fn inspect(path: &Path) -> Result<(), Error> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    let line = match ext.as_str() {
        "pfm" => {
            let g = read_pfm(path)?;
            format!("{}x{} x{}: {}", g.width(), g.height(), g.channels(), channel_stats(&g))
        }
        "png" => match read_png_gray16(path) {
            Ok(g) => {
                let mut ids: Vec<u16> = g.data().to_vec();
                ids.sort_unstable();
                ids.dedup();
                let shown: Vec<String> = ids.iter().take(32).map(|v| v.to_string()).collect();
                format!("{}x{} gray, {} distinct values: {}", g.width(), g.height(), ids.len(), shown.join(" "))
            }
            Err(_) => {
                let g = read_png_rgb8(path)?.map(|v| v as f64 / 255.0);
                format!("{}x{} rgb: {}", g.width(), g.height(), channel_stats(&g))
            }
        },
        "obj" => mesh_stats(&read_obj(path)?),
        "ply" => mesh_stats(&read_ply(path)?),
        "toml" => {
            let m = JobManifest::load(path)?;
            let cfg = m.resolve_config()?;
            let inp = ingest(&m, &cfg)?;
            let b = &inp.bundle;
            let mut s = format!(
                "inputs {}x{}, fov {:.4} rad, {} light instances\n  depth: {}\n  normal: {}",
                b.width(),
                b.height(),
                b.camera.theta_f(),
                inp.lights.len(),
                channel_stats(&b.depth),
                channel_stats(&b.normal)
            );
            let mesh = m.job.output_dir.join("mesh.ply");
            if mesh.exists() {
                s += &format!("\n  mesh: {}", mesh_stats(&read_ply(&mesh)?));
            }
            let report = m.job.output_dir.join("run_report.toml");
            if let Ok(text) = std::fs::read_to_string(&report) {
                for l in text.lines().filter(|l| l.starts_with("# ")) {
                    s += &format!("\n  {}", &l[2..]);
                }
            }
            s
        }
        _ => return Err(Error::format(path, "unknown file type (expected .pfm, .png, .obj, .ply or .toml)")),
    };
    println!("{}: {line}", path.display());
    Ok(())
}
