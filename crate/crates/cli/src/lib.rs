//! File-based pipeline over the `spatembed` library.
//!
//! Each stage reads its inputs from the output directory (or the paths given
//! on the command line), writes TSV artifacts back into it, and appends one
//! line to `manifest.tsv`.

pub mod config;
pub mod error;
pub mod manifest;
pub mod stages;

pub use config::{LevelSelection, PipelineConfig, Stage, SynthModel, SynthParams};
pub use error::{PipelineError, Result};
pub use stages::{run_all, run_stage};

/// Artifact file names inside the output directory.
pub mod artifacts {
    pub const GRAPH_CACHE: &str = "graph.bin";
    pub const EDGES: &str = "edges.tsv";
    pub const LABELS: &str = "labels.tsv";
    pub const INGEST: &str = "ingest.tsv";
    pub const FEATURES: &str = "features.tsv";
    pub const MODEL: &str = "model.txt";
    pub const NULL_SAMPLES: &str = "null_samples.tsv";
    pub const NULL_MODEL: &str = "null_model.tsv";
    pub const RESULTS: &str = "results.tsv";
    pub const SKIPPED: &str = "skipped.tsv";
    pub const SUMMARY: &str = "summary.tsv";
    pub const SYNTH_EDGES: &str = "synth_edges.tsv";
    pub const SYNTH_GEO: &str = "synth_geo.tsv";
    pub const SYNTH_INFO: &str = "synth.tsv";
    pub const MANIFEST: &str = "manifest.tsv";
}
