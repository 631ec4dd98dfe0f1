//! Job ingestion, orchestration and synthetic fixtures.

mod ingest;
mod manifest;
mod run;
mod synth;

pub use ingest::{ingest, read_depth, Ingested};
pub use manifest::{parse_stages, CameraSpec, InputPaths, JobManifest, JobSpec, Stage};
pub use run::{deterministic_artifacts, run_pipeline, RunOptions, RunSummary, StageError, StageName};
pub use run::complete_mesh;
pub use synth::{
    synth_scene, write_synth_scene, SynthKind, SynthScene, PLANE_Z0, STEP_FAR, STEP_NEAR, SYNTH_FOV,
};
