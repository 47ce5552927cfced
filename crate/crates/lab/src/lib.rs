//! Experiment driver for the Anderson eigenvalue statistics: configuration,
//! the staged pipeline, SVG plots, run manifests and the acceptance suite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod criteria;
pub mod error;
pub mod manifest;
pub mod pipeline;
pub mod svg;

pub use config::ExperimentConfig;
pub use criteria::{verify_suite, CriterionResult, SuiteReport};
pub use error::LabError;
pub use pipeline::{run_pipeline, PipelineRun};
