//! Library side of the batch CLI: run configuration, the manifest-driven
//! batch drivers, and report generation. The binary in `main.rs` is a thin
//! argument-parsing layer over these functions.

pub mod batch;
pub mod config;
pub mod report;

use cxrkit_core::dataset::DatasetError;
use cxrkit_core::enhance::EnhanceError;
use cxrkit_core::histogram::HistogramError;
use cxrkit_core::metrics::MetricsError;
use cxrkit_core::preprocess::PreprocessError;
use cxrkit_core::raster::RasterError;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("manifest: {0}")]
    Manifest(#[from] DatasetError),
    #[error("image: {0}")]
    Raster(#[from] RasterError),
    #[error("enhance: {0}")]
    Enhance(#[from] EnhanceError),
    #[error("preprocess: {0}")]
    Preprocess(#[from] PreprocessError),
    #[error("histogram: {0}")]
    Histogram(#[from] HistogramError),
    #[error("metrics: {0}")]
    Metrics(#[from] MetricsError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    InvalidInput(String),
}

/// Resolves a possibly relative path against the run root.
pub fn resolve(root: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        root.join(path)
    }
}
