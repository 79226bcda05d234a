//! Library side of the command-line tool: configuration, input parsing,
//! orchestration and output documents.

pub mod analysis;
pub mod config;
pub mod ingest;
pub mod render;
pub mod reproduce;

/// Version tag carried by every JSON document the tool emits.
pub const SCHEMA_VERSION: u32 = 1;

pub use analysis::{
    analyze_sample, efficiency_analysis, estimate, load_moments, moments_document, run_analysis,
    AnalysisReport, EfficiencyDocument, EstimateDocument, MomentsDocument,
};
pub use config::{parse_targets, AnalysisConfig, OutputFormat};
pub use ingest::{emit, ingest, InputFormat};
pub use reproduce::{reproduce, ReproductionReport, Table};
