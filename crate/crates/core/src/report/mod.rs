//! End-to-end pipeline: configuration, staged artifacts, run manifest and
//! SVG figures.

mod config;
mod pipeline;
pub mod svg;

pub use config::{
    CausalityConfig, DedupConfig, EngagementConfig, Inputs, PipelineConfig, SeriesInput, TopicsConfig, WindowConfig,
};
pub use pipeline::{
    artifacts, run_pipeline, run_stages, sha256_hex, PipelineFailure, RunManifest, Stage, StageRecord, MANIFEST_FILE,
};
