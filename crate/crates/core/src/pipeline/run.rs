//! End-to-end execution of a job manifest.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use log::{info, warn};

use super::ingest::{ingest, Ingested};
use super::manifest::{JobManifest, Stage};
use crate::color::rgb_to_cielab;
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::filters::{cross_bilateral_filter, flag_uncertain_regions, UncertainMap};
use crate::grid::PixelGrid;
use crate::io::{write_pfm, write_png_gray8, write_png_rgb8};
use crate::mesh::{
    audit_completion, build_mesh, complete_background, complete_foreground, delete_uncertain_faces,
    expand_uncertain_region, write_obj, write_ply, AuditReport, CompletionReport, MeshSheet, RegionKind, SceneMesh,
};
use crate::refine::{refine_depth, write_loss_trace, RefineInputs};
use crate::relight::{add_sensor_noise, assign_emitters, draw_activations, render, tone_map, RenderSettings};
use crate::rng::stream_key;

/// Where a run failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageName {
    Setup,
    Ingest,
    Run(Stage),
}

impl fmt::Display for StageName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StageName::Setup => f.write_str("setup"),
            StageName::Ingest => f.write_str("ingest"),
            StageName::Run(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{stage} stage failed: {source}")]
pub struct StageError {
    pub stage: StageName,
    #[source]
    pub source: Error,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub artifacts: Vec<PathBuf>,
    pub audit: Option<AuditReport>,
    pub completion: Option<CompletionReport>,
    /// `(seed, emissive face count)` per night image.
    pub emissive_faces: Vec<(u64, usize)>,
    pub timings: Vec<(StageName, Duration)>,
}

pub fn run_pipeline(manifest: &JobManifest, opts: &RunOptions) -> std::result::Result<RunSummary, StageError> {
    let setup = |source| StageError { stage: StageName::Setup, source };
    match opts.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| setup(Error::Config(format!("thread pool: {e}"))))?;
            pool.install(|| Runner::new(manifest)?.run())
        }
        None => Runner::new(manifest)?.run(),
    }
}

struct Runner<'a> {
    manifest: &'a JobManifest,
    cfg: PipelineConfig,
    stages: Vec<Stage>,
    out: PathBuf,
    summary: RunSummary,
    report: Vec<String>,
}

impl<'a> Runner<'a> {
    fn new(manifest: &'a JobManifest) -> std::result::Result<Self, StageError> {
        let setup = |source| StageError { stage: StageName::Setup, source };
        let cfg = manifest.resolve_config().map_err(setup)?;
        let stages = manifest.stages().map_err(setup)?;
        let out = manifest.job.output_dir.clone();
        fs::create_dir_all(&out).map_err(|e| setup(Error::io(&out, e)))?;
        Ok(Self {
            manifest,
            cfg,
            stages,
            summary: RunSummary { output_dir: out.clone(), ..Default::default() },
            out,
            report: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.out.join(name);
        self.summary.artifacts.push(p.clone());
        p
    }

    fn timed<T>(&mut self, stage: StageName, f: impl FnOnce(&mut Self) -> Result<T>) -> std::result::Result<T, StageError> {
        let t0 = Instant::now();
        info!("stage {stage}");
        let r = f(self).map_err(|source| StageError { stage, source });
        self.summary.timings.push((stage, t0.elapsed()));
        r
    }

    fn run(mut self) -> std::result::Result<RunSummary, StageError> {
        let Ingested { bundle, lights } = self.timed(StageName::Ingest, |s| ingest(s.manifest, &s.cfg))?;
        let has = |s: &Self, st: Stage| s.stages.contains(&st);
        self.report.push(format!("inputs {}x{}", bundle.width(), bundle.height()));

        let (filtered, uncertain) = self.timed(StageName::Run(Stage::Filter), |s| {
            let lab = rgb_to_cielab(&bundle.rgb)?;
            let filtered = cross_bilateral_filter(&bundle.depth, &lab, &bundle.semantic, &s.cfg.filter)?;
            let uncertain = flag_uncertain_regions(&filtered, &bundle.semantic, &s.cfg)?;
            let p = s.path("filtered_depth.pfm");
            write_pfm(&filtered, &p)?;
            let p = s.path("uncertainty.png");
            write_png_gray8(&uncertain.grid().map(|v| v * 255), &p)?;
            s.report.push(format!("uncertain pixels {}", uncertain.count()));
            Ok((filtered, uncertain))
        })?;

        if !has(&self, Stage::Refine) {
            return self.finish();
        }
        let refined = self.timed(StageName::Run(Stage::Refine), |s| {
            let inputs = RefineInputs {
                camera: &bundle.camera,
                normal_ref: &bundle.normal,
                depth_est: &filtered,
                uncertain: &uncertain,
            };
            let r = refine_depth(&filtered, &inputs, &s.cfg.refine)?;
            let p = s.path("refined_depth.pfm");
            write_pfm(&r.depth, &p)?;
            let p = s.path("loss_trace.txt");
            let mut f = fs::File::create(&p).map_err(|e| Error::io(&p, e))?;
            write_loss_trace(&r.trace, &mut f).map_err(|e| Error::io(&p, e))?;
            if let (Some(a), Some(b)) = (r.trace.first(), r.trace.last()) {
                s.report.push(format!("loss {:e} -> {:e}", a.total, b.total));
            }
            Ok(r.depth)
        })?;

        if !has(&self, Stage::Mesh) {
            return self.finish();
        }
        let sheet = self.timed(StageName::Run(Stage::Mesh), |s| {
            let sheet = build_mesh(
                &refined,
                &bundle.rgb,
                &bundle.semantic,
                &bundle.camera,
                None,
                s.cfg.mesh.grid_downsample,
            )?;
            let (sheet, completion, audit) = complete_mesh(sheet, &uncertain, &bundle.semantic, &s.cfg)?;
            for w in &completion.warnings {
                warn!("{w}");
            }
            let mesh = SceneMesh::from_sheet(&sheet);
            mesh.validate()?;
            let p = s.path("mesh.obj");
            write_obj(&mesh, &p)?;
            let p = s.path("mesh.ply");
            write_ply(&mesh, &p)?;
            s.report.push(format!(
                "mesh {} vertices, {} faces, {} inserted, {} completion warnings",
                mesh.vertex_count(),
                mesh.face_count(),
                completion.filled,
                completion.warnings.len()
            ));
            s.report.push(format!(
                "audit unmatched_interior_edges={} nonmanifold_edges={} unfilled_slots={} open_foreground_boundaries={}",
                audit.unmatched_interior_edges,
                audit.nonmanifold_edges,
                audit.unfilled_slots,
                audit.open_foreground_boundaries
            ));
            s.summary.audit = Some(audit);
            s.summary.completion = Some(completion);
            Ok(sheet)
        })?;

        if !has(&self, Stage::Relight) {
            return self.finish();
        }
        let seeds = self.manifest.job.seeds.clone();
        let images = self.timed(StageName::Run(Stage::Relight), |s| {
            let mut images = Vec::with_capacity(seeds.len());
            for &seed in &seeds {
                let draw = draw_activations(&lights, seed)?;
                let scene = assign_emitters(&sheet, &lights, &draw)?;
                let settings = RenderSettings::from_config(&s.cfg.render, stream_key(s.cfg.scene.rng_seed, &[seed]));
                let img = render(&scene, &bundle.camera, &settings)?;
                let p = s.path(&format!("night_{seed}_linear.pfm"));
                write_pfm(&img, &p)?;
                let ids: Vec<String> = draw.active_ids().map(|i| i.to_string()).collect();
                s.report.push(format!(
                    "seed {seed}: active instances [{}], {} emissive faces",
                    ids.join(", "),
                    scene.emissive_count()
                ));
                s.summary.emissive_faces.push((seed, scene.emissive_count()));
                images.push((seed, img));
            }
            Ok(images)
        })?;

        if !has(&self, Stage::Postprocess) {
            return self.finish();
        }
        self.timed(StageName::Run(Stage::Postprocess), |s| {
            for (seed, img) in &images {
                let exposed = img.map(|v| (v * s.cfg.render.exposure).clamp(0.0, 1.0));
                let noise_seed = stream_key(s.cfg.scene.rng_seed, &[*seed, 1]);
                let noisy = add_sensor_noise(&exposed, s.cfg.noise.beta1, s.cfg.noise.beta2, noise_seed)?;
                let p = s.path(&format!("night_{seed}.png"));
                write_png_rgb8(&tone_map(&noisy, 1.0), &p)?;
            }
            Ok(())
        })?;
        self.finish()
    }

    fn finish(mut self) -> std::result::Result<RunSummary, StageError> {
        let setup = |source| StageError { stage: StageName::Setup, source };
        let echo = self.manifest.echo(&self.cfg).map_err(setup)?;
        let mut text = String::new();
        for line in &self.report {
            text.push_str("# ");
            text.push_str(line);
            text.push('\n');
        }
        text.push_str(&echo.to_toml_string());
        let p = self.path("run_report.toml");
        fs::write(&p, text).map_err(|e| setup(Error::io(&p, e)))?;

        let p = self.path("timings.txt");
        let write_timings = || -> std::io::Result<()> {
            let mut f = fs::File::create(&p)?;
            for (stage, d) in &self.summary.timings {
                writeln!(f, "{stage} {:.6}", d.as_secs_f64())?;
            }
            Ok(())
        };
        write_timings().map_err(|e| setup(Error::io(&p, e)))?;
        Ok(self.summary)
    }
}

/// Deletion, region expansion, both completion passes and the audit.
pub fn complete_mesh(
    sheet: MeshSheet,
    uncertain: &UncertainMap,
    semantic: &PixelGrid<u8>,
    cfg: &PipelineConfig,
) -> Result<(MeshSheet, CompletionReport, AuditReport)> {
    let sheet = delete_uncertain_faces(sheet, uncertain);
    let regions = expand_uncertain_region(uncertain, semantic, cfg)?;
    let fg = &cfg.scene.foreground_classes;
    let (mut sheet, mut report) = complete_background(sheet, &regions, fg);
    for region in regions.iter().filter(|r| matches!(r.kind, RegionKind::Foreground { .. })) {
        let (next, r) = complete_foreground(sheet, region);
        sheet = next;
        report.merge(r);
    }
    let audit = audit_completion(&sheet, &regions, fg);
    Ok((sheet, report, audit))
}

/// Output directory artifacts excluding the per-run timing file.
pub fn deterministic_artifacts(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().is_some_and(|n| n != "timings.txt"))
        .collect();
    v.sort();
    Ok(v)
}
