//! Shapelet decision trees with randomly sampled candidates, and ensembles of
//! them.

pub mod dataset;
pub mod ensemble;
pub mod error;
pub mod metric;
pub mod model;
pub mod orderline;
pub mod seed;
pub mod tree;

pub use dataset::{load_ucr, parse_ucr, Dataset, Label, TimeSeries};
pub use ensemble::{train, Ensemble, EnsembleConfig, TrainOptions, TrainReport, Variant};
pub use error::{Error, Result};
pub use metric::{subsequence_distance, Shapelet};
pub use model::Model;
pub use tree::{create_tree, Sampling, SearchStats, ShapeletTree, TreeConfig};
