use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use enrs_core::ensemble::Variant;

use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Exhaustive shapelet tree.
    Yk,
    /// Single tree over randomly sampled candidates.
    Rs,
    Enrs,
    EnrsBagging,
    EnrsBoosting,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Yk,
        Algorithm::Rs,
        Algorithm::Enrs,
        Algorithm::EnrsBagging,
        Algorithm::EnrsBoosting,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Yk => "yk",
            Algorithm::Rs => "rs",
            Algorithm::Enrs => "enrs",
            Algorithm::EnrsBagging => "enrs-bagging",
            Algorithm::EnrsBoosting => "enrs-boosting",
        }
    }

    pub fn variant(self) -> Option<Variant> {
        match self {
            Algorithm::Enrs => Some(Variant::Enrs),
            Algorithm::EnrsBagging => Some(Variant::Bagging),
            Algorithm::EnrsBoosting => Some(Variant::Boosting),
            Algorithm::Yk | Algorithm::Rs => None,
        }
    }

    pub fn default_runs(self) -> usize {
        match self {
            Algorithm::Yk => 1,
            _ => 100,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| BenchError::Config(format!("unknown algorithm {s:?}")))
    }
}

/// Shapelet length bounds, either as fractions of the series length or
/// absolute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lengths {
    Fractions { min: f64, max: f64 },
    Absolute { min: usize, max: usize },
}

impl Default for Lengths {
    fn default() -> Self {
        Lengths::Fractions { min: 0.25, max: 0.67 }
    }
}

impl Lengths {
    /// `(ceil(min·m), floor(max·m))` for fractions. A small slack absorbs
    /// binary rounding of products that are integral in exact arithmetic.
    pub fn resolve(&self, m: usize) -> Result<(usize, usize), BenchError> {
        let (lo, hi) = match *self {
            Lengths::Fractions { min, max } => {
                if !(min > 0.0 && min <= max && max <= 1.0) {
                    return Err(BenchError::Config(format!("length fractions must satisfy 0 < min <= max <= 1, got {min}, {max}")));
                }
                let mf = m as f64;
                ((min * mf - 1e-9).ceil() as usize, (max * mf + 1e-9).floor() as usize)
            }
            Lengths::Absolute { min, max } => (min, max),
        };
        if lo == 0 || lo > hi || hi > m {
            return Err(BenchError::Config(format!(
                "shapelet lengths [{lo}, {hi}] invalid for series length {m}"
            )));
        }
        Ok((lo, hi))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: String,
    pub data_dir: PathBuf,
    pub algorithm: Algorithm,
    pub lengths: Lengths,
    pub ratio: f64,
    pub ensemble_size: usize,
    pub runs: usize,
    pub seed: u64,
    pub pruning: bool,
    /// Explicit per-run seeds; overrides derivation from `seed`.
    pub run_seeds: Option<Vec<u64>>,
    pub max_seconds: Option<f64>,
    pub parallel: bool,
}

impl ExperimentConfig {
    pub fn new(dataset: impl Into<String>, data_dir: impl Into<PathBuf>, algorithm: Algorithm) -> Self {
        ExperimentConfig {
            dataset: dataset.into(),
            data_dir: data_dir.into(),
            algorithm,
            lengths: Lengths::default(),
            ratio: 0.01,
            ensemble_size: 10,
            runs: algorithm.default_runs(),
            seed: 0,
            pruning: true,
            run_seeds: None,
            max_seconds: None,
            parallel: false,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if !(self.ratio > 0.0 && self.ratio <= 1.0) {
            return Err(BenchError::Config(format!("ratio {} outside (0, 1]", self.ratio)));
        }
        if self.runs == 0 {
            return Err(BenchError::Config("runs must be at least 1".into()));
        }
        if self.ensemble_size == 0 {
            return Err(BenchError::Config("ensemble size must be at least 1".into()));
        }
        if let Some(seeds) = &self.run_seeds {
            if seeds.len() < self.runs {
                return Err(BenchError::Config(format!("{} run seeds given for {} runs", seeds.len(), self.runs)));
            }
        }
        if let Some(s) = self.max_seconds {
            if !(s > 0.0) {
                return Err(BenchError::Config(format!("max seconds must be positive, got {s}")));
            }
        }
        if let Lengths::Fractions { .. } = self.lengths {
            self.lengths.resolve(1_000_000)?;
        }
        Ok(())
    }

    pub fn train_path(&self) -> Result<PathBuf, BenchError> {
        split_path(&self.data_dir, &self.dataset, "TRAIN")
    }

    pub fn test_path(&self) -> Result<PathBuf, BenchError> {
        split_path(&self.data_dir, &self.dataset, "TEST")
    }
}

/// `<dir>/<Name>/<Name>_<SPLIT>` or `<dir>/<Name>_<SPLIT>`, optionally with a
/// `.tsv`, `.txt` or `.csv` extension.
pub fn split_path(dir: &Path, name: &str, split: &str) -> Result<PathBuf, BenchError> {
    let file = format!("{name}_{split}");
    for base in [dir.join(name), dir.to_path_buf()] {
        for ext in ["", ".tsv", ".txt", ".csv"] {
            let p = base.join(format!("{file}{ext}"));
            if p.is_file() {
                return Ok(p);
            }
        }
    }
    Err(BenchError::MissingData {
        dataset: name.to_string(),
        split: split.to_string(),
        dir: dir.to_path_buf(),
    })
}
