//! Experiment runner for shapelet trees and their ensembles on UCR datasets.

use std::path::PathBuf;

pub mod config;
pub mod experiment;
pub mod report;
pub mod sweep;

pub use config::{Algorithm, ExperimentConfig, Lengths};
pub use experiment::{fit, run_experiment, run_once, Experiment, FitParams, RunReport, Summary};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("config: {0}")]
    Config(String),

    #[error("no {split} split for dataset {dataset} under {dir}")]
    MissingData { dataset: String, split: String, dir: PathBuf },

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(String),

    #[error(transparent)]
    CsvFormat(#[from] csv::Error),

    #[error(transparent)]
    Core(#[from] enrs_core::Error),
}
