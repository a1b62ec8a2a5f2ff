use std::time::{Duration, Instant};

use enrs_core::ensemble::{self, EnsembleConfig, TrainOptions};
use enrs_core::seed::{derive_seed, stream};
use enrs_core::{create_tree, load_ucr, Dataset, Error, Model, Sampling, SearchStats, TreeConfig};

use crate::config::{Algorithm, ExperimentConfig};
use crate::BenchError;

/// Everything a training call needs besides the data.
#[derive(Debug, Clone, Copy)]
pub struct FitParams {
    pub algorithm: Algorithm,
    pub min_len: usize,
    pub max_len: usize,
    pub ratio: f64,
    pub ensemble_size: usize,
    pub seed: u64,
    pub pruning: bool,
    pub parallel: bool,
    pub deadline: Option<Instant>,
}

/// Train one model. `yk` ignores the seed and ratio.
pub fn fit(d: &Dataset, p: &FitParams) -> Result<(Model, SearchStats), Error> {
    match p.algorithm {
        Algorithm::Yk | Algorithm::Rs => {
            let sampling = if p.algorithm == Algorithm::Yk {
                Sampling::Exhaustive
            } else {
                Sampling::Random { ratio: p.ratio }
            };
            let cfg = TreeConfig {
                min_len: p.min_len,
                max_len: p.max_len,
                sampling,
                pruning: p.pruning,
            };
            let (tree, stats) = create_tree(d, &cfg, &mut stream(p.seed), p.deadline)?;
            Ok((Model::Tree(tree), stats))
        }
        algorithm => {
            let variant = algorithm.variant().expect("ensemble algorithm");
            let cfg = EnsembleConfig {
                min_len: p.min_len,
                max_len: p.max_len,
                ratio: p.ratio,
                seed: p.seed,
                size: p.ensemble_size,
                pruning: p.pruning,
            };
            let opts = TrainOptions {
                parallel: p.parallel,
                deadline: p.deadline,
            };
            let (e, report) = ensemble::train(d, variant, &cfg, opts)?;
            Ok((Model::Ensemble(e), report.stats))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub run: usize,
    pub seed: u64,
    /// `None` when training hit the time budget.
    pub accuracy: Option<f64>,
    pub train_seconds: f64,
    pub stats: SearchStats,
    pub members: usize,
    pub nodes: usize,
}

impl RunReport {
    pub fn finished(&self) -> bool {
        self.accuracy.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub runs: usize,
    pub finished: usize,
    pub mean_accuracy: f64,
    /// Sample standard deviation; zero for a single run.
    pub std_accuracy: f64,
    pub mean_train_seconds: f64,
}

impl Summary {
    pub fn of(reports: &[RunReport]) -> Summary {
        let acc: Vec<f64> = reports.iter().filter_map(|r| r.accuracy).collect();
        let secs: Vec<f64> = reports.iter().filter(|r| r.finished()).map(|r| r.train_seconds).collect();
        let (mean_accuracy, std_accuracy) = mean_std(&acc);
        Summary {
            runs: reports.len(),
            finished: acc.len(),
            mean_accuracy,
            std_accuracy,
            mean_train_seconds: mean_std(&secs).0,
        }
    }
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub struct Experiment {
    pub reports: Vec<RunReport>,
    pub summary: Summary,
}

/// Seed of run `r`.
pub fn run_seed(cfg: &ExperimentConfig, r: usize) -> u64 {
    match &cfg.run_seeds {
        Some(seeds) => seeds[r],
        None => derive_seed(cfg.seed, r as u64),
    }
}

fn count_nodes(m: &Model) -> (usize, usize) {
    match m {
        Model::Tree(t) => (1, t.node_count()),
        Model::Ensemble(e) => (e.len(), e.members().iter().map(|t| t.node_count()).sum()),
    }
}

/// Train and evaluate one run on already loaded splits. Only the training
/// call is timed.
pub fn run_once(cfg: &ExperimentConfig, train: &Dataset, test: &Dataset, r: usize) -> Result<RunReport, BenchError> {
    let (min_len, max_len) = cfg.lengths.resolve(train.series_length())?;
    let seed = run_seed(cfg, r);
    let start = Instant::now();
    let params = FitParams {
        algorithm: cfg.algorithm,
        min_len,
        max_len,
        ratio: cfg.ratio,
        ensemble_size: cfg.ensemble_size,
        seed,
        pruning: cfg.pruning,
        parallel: cfg.parallel,
        deadline: cfg.max_seconds.map(|s| start + Duration::from_secs_f64(s)),
    };
    let fitted = fit(train, &params);
    let train_seconds = start.elapsed().as_secs_f64();
    let mut report = RunReport {
        dataset: cfg.dataset.clone(),
        algorithm: cfg.algorithm,
        run: r,
        seed,
        accuracy: None,
        train_seconds,
        stats: SearchStats::default(),
        members: 0,
        nodes: 0,
    };
    match fitted {
        Ok((model, stats)) => {
            report.accuracy = Some(model.accuracy(test)?);
            report.stats = stats;
            (report.members, report.nodes) = count_nodes(&model);
        }
        Err(Error::DeadlineExceeded) => {}
        Err(e) => return Err(e.into()),
    }
    Ok(report)
}

/// Load both splits, then run `cfg.runs` independent trainings in order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Experiment, BenchError> {
    run_experiment_with(cfg, |_| {})
}

/// As [`run_experiment`], calling `progress` after each run.
pub fn run_experiment_with(cfg: &ExperimentConfig, mut progress: impl FnMut(&RunReport)) -> Result<Experiment, BenchError> {
    cfg.validate()?;
    let train = load_ucr(cfg.train_path()?)?;
    let test = load_ucr(cfg.test_path()?)?;
    if test.series_length() != train.series_length() {
        return Err(BenchError::Config(format!(
            "train series have length {}, test series {}",
            train.series_length(),
            test.series_length()
        )));
    }
    let mut reports = Vec::with_capacity(cfg.runs);
    for r in 0..cfg.runs {
        let report = run_once(cfg, &train, &test, r)?;
        progress(&report);
        reports.push(report);
    }
    let summary = Summary::of(&reports);
    Ok(Experiment { reports, summary })
}
