use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use enrs_bench::report::write_csv;
use enrs_bench::sweep::sweep_lengths;
use enrs_bench::{fit, run_experiment, Algorithm, ExperimentConfig, FitParams, Lengths};
use enrs_core::{load_ucr, Model};

#[derive(Parser)]
#[command(name = "enrs", version, about = "Shapelet tree ensembles on UCR datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model on the training split and save it as JSON.
    Train {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long)]
        output: PathBuf,
    },
    /// Accuracy of a saved model on a split.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dataset: String,
        #[arg(long, env = "ENRS_DATA_DIR", default_value = "data")]
        data_dir: PathBuf,
        #[arg(long, default_value = "TEST")]
        split: String,
    },
    /// Repeated timed training runs, one CSV row per run.
    Bench {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Defaults to 1 for yk and 100 otherwise.
        #[arg(long)]
        runs: Option<usize>,
        /// Comma separated per-run seeds instead of derived ones.
        #[arg(long, value_delimiter = ',')]
        run_seeds: Option<Vec<u64>>,
        /// Abandon a run after this many seconds of training and report DNF.
        #[arg(long)]
        max_seconds: Option<f64>,
        /// CSV destination; standard output when absent.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Pick shapelet length fractions by 3-fold cross-validation on the
    /// training split.
    Sweep {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Pairs as `min:max`, comma separated, e.g. `0.1:0.3,0.25:0.67`.
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<String>,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    dataset: String,
    #[arg(long, env = "ENRS_DATA_DIR", default_value = "data")]
    data_dir: PathBuf,
    #[arg(long, value_parser = parse_algorithm)]
    algorithm: Algorithm,
    #[arg(long, default_value_t = 0.25)]
    min_frac: f64,
    #[arg(long, default_value_t = 0.67)]
    max_frac: f64,
    /// Absolute minimum length; requires --max-len and overrides the fractions.
    #[arg(long, requires = "max_len")]
    min_len: Option<usize>,
    #[arg(long, requires = "min_len")]
    max_len: Option<usize>,
    #[arg(long, default_value_t = 0.01)]
    ratio: f64,
    #[arg(long, default_value_t = 10)]
    ensemble_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    no_pruning: bool,
    /// Train ensemble members on all cores. Off by default so timings stay
    /// comparable.
    #[arg(long)]
    parallel: bool,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: enrs_bench::BenchError| e.to_string())
}

impl ExperimentArgs {
    fn config(&self) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(&self.dataset, &self.data_dir, self.algorithm);
        cfg.lengths = match (self.min_len, self.max_len) {
            (Some(min), Some(max)) => Lengths::Absolute { min, max },
            _ => Lengths::Fractions {
                min: self.min_frac,
                max: self.max_frac,
            },
        };
        cfg.ratio = self.ratio;
        cfg.ensemble_size = self.ensemble_size;
        cfg.seed = self.seed;
        cfg.pruning = !self.no_pruning;
        cfg.parallel = self.parallel;
        cfg
    }
}

fn fit_params(cfg: &ExperimentConfig, m: usize) -> Result<FitParams> {
    let (min_len, max_len) = cfg.lengths.resolve(m)?;
    Ok(FitParams {
        algorithm: cfg.algorithm,
        min_len,
        max_len,
        ratio: cfg.ratio,
        ensemble_size: cfg.ensemble_size,
        seed: cfg.seed,
        pruning: cfg.pruning,
        parallel: cfg.parallel,
        deadline: None,
    })
}

fn parse_pair(s: &str) -> Result<(f64, f64)> {
    let (a, b) = s.split_once(':').with_context(|| format!("grid entry {s:?} is not min:max"))?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { exp, output } => {
            let cfg = exp.config();
            cfg.validate()?;
            let train = load_ucr(cfg.train_path()?)?;
            let params = fit_params(&cfg, train.series_length())?;
            let start = Instant::now();
            let (model, stats) = fit(&train, &params)?;
            let secs = start.elapsed().as_secs_f64();
            std::fs::write(&output, model.to_json()?).with_context(|| format!("writing {}", output.display()))?;
            eprintln!(
                "trained {} on {} in {secs:.3}s (lengths {}..={}, visited {}, evaluated {}, pruned {})",
                cfg.algorithm,
                cfg.dataset,
                params.min_len,
                params.max_len,
                stats.candidates_visited,
                stats.candidates_evaluated,
                stats.candidates_pruned
            );
        }
        Command::Evaluate {
            model,
            dataset,
            data_dir,
            split,
        } => {
            let text = std::fs::read_to_string(&model).with_context(|| format!("reading {}", model.display()))?;
            let model = Model::from_json(&text)?;
            let data = load_ucr(enrs_bench::config::split_path(&data_dir, &dataset, &split)?)?;
            println!("{:.6}", model.accuracy(&data)?);
        }
        Command::Bench {
            exp,
            runs,
            run_seeds,
            max_seconds,
            csv,
        } => {
            let mut cfg = exp.config();
            if let Some(r) = runs {
                cfg.runs = r;
            } else if let Some(seeds) = &run_seeds {
                cfg.runs = seeds.len();
            }
            cfg.run_seeds = run_seeds;
            cfg.max_seconds = max_seconds;
            let result = run_experiment(&cfg)?;
            match csv {
                Some(path) => enrs_bench::report::write_csv_file(&path, &result.reports)?,
                None => write_csv(std::io::stdout().lock(), &result.reports)?,
            }
            let s = result.summary;
            eprintln!(
                "{} {}: {}/{} runs finished, accuracy {:.4} ± {:.4}, mean train {:.3}s",
                cfg.dataset, cfg.algorithm, s.finished, s.runs, s.mean_accuracy, s.std_accuracy, s.mean_train_seconds
            );
        }
        Command::Sweep { exp, grid } => {
            let cfg = exp.config();
            cfg.validate()?;
            let grid = grid.iter().map(|s| parse_pair(s)).collect::<Result<Vec<_>>>()?;
            if grid.is_empty() {
                bail!("empty grid");
            }
            let train = load_ucr(cfg.train_path()?)?;
            let params = fit_params(&cfg, train.series_length())?;
            let result = sweep_lengths(&train, &grid, &params)?;
            println!("min_frac,max_frac,cv_accuracy,folds");
            for s in &result.scores {
                println!("{},{},{:.6},{}", s.min_frac, s.max_frac, s.accuracy, s.folds_used);
            }
            eprintln!("tuned (3-fold CV on training split): {}:{}", result.best.0, result.best.1);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
