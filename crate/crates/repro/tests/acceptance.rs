//! Acceptance suite: one PASS/FAIL line per criterion, details indented
//! below it. Exits non-zero when any criterion fails.

use std::path::PathBuf;
use std::process::ExitCode;

use enrs_bench::{run_once, Algorithm, ExperimentConfig, RunReport};
use enrs_core::ensemble::{boosting_alpha, boosting_update, train, train_boosting, EnsembleConfig, TrainOptions, Variant};
use enrs_core::metric::{subsequence_distance, Shapelet};
use enrs_core::orderline::{best_split, LineEntry, OrderLine};
use enrs_core::seed::stream;
use enrs_core::tree::{find_shapelet, CandidateGenerator, SearchOptions};
use enrs_core::{create_tree, load_ucr, Dataset, Sampling, TimeSeries, TreeConfig};
use enrs_repro::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

enum Verdict {
    Pass,
    Fail,
    Skip,
}

struct Outcome {
    verdict: Verdict,
    summary: String,
    details: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, summary: impl Into<String>, details: Vec<String>) -> Self {
        Outcome {
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
            summary: summary.into(),
            details,
        }
    }
}

fn data_dir() -> PathBuf {
    std::env::var_os("ENRS_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data")))
}

struct Splits {
    train: Dataset,
    test: Dataset,
}

fn load(name: &str) -> Option<Splits> {
    let cfg = ExperimentConfig::new(name, data_dir(), Algorithm::Yk);
    let train = load_ucr(cfg.train_path().ok()?).ok()?;
    let test = load_ucr(cfg.test_path().ok()?).ok()?;
    Some(Splits { train, test })
}

fn config(name: &str, algorithm: Algorithm) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(name, data_dir(), algorithm);
    cfg.ratio = 0.01;
    cfg.ensemble_size = 10;
    cfg
}

fn run(name: &str, splits: &Splits, algorithm: Algorithm, r: usize) -> RunReport {
    run_once(&config(name, algorithm), &splits.train, &splits.test, r).expect("training run")
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.into_iter().collect();
    v.iter().sum::<f64>() / v.len() as f64
}

/// Exact-tree run per available dataset: (name, accuracy %, seconds).
struct ExactRuns(Vec<(&'static str, Option<(f64, f64)>)>);

impl ExactRuns {
    fn get(&self, name: &str) -> Option<(f64, f64)> {
        self.0.iter().find(|(n, _)| *n == name).and_then(|(_, r)| *r)
    }
}

fn criterion_1(exact: &mut ExactRuns) -> Outcome {
    let mut details = Vec::new();
    let mut all = true;
    for (name, reference) in EXACT_TREE_ACCURACY {
        let Some(splits) = load(name) else {
            exact.0.push((name, None));
            details.push(format!("{name}: data unavailable, not evaluated (reference {reference:.2}%)"));
            all = false;
            continue;
        };
        let r = run(name, &splits, Algorithm::Yk, 0);
        let acc = 100.0 * r.accuracy.unwrap();
        let ok = (acc - reference).abs() <= EXACT_TREE_TOLERANCE && r.train_seconds <= EXACT_TREE_MAX_SECONDS;
        all &= ok;
        details.push(format!(
            "{name}: {acc:.2}% vs {reference:.2}% (|diff| {:.2} pp), trained in {:.2}s {}",
            (acc - reference).abs(),
            r.train_seconds,
            if ok { "ok" } else { "OUT OF TOLERANCE" }
        ));
        exact.0.push((name, Some((acc, r.train_seconds))));
    }
    let evaluated = exact.0.iter().filter(|(_, r)| r.is_some()).count();
    Outcome::new(
        all,
        format!("exact tree accuracy within ±{EXACT_TREE_TOLERANCE} pp ({evaluated}/7 datasets evaluated)"),
        details,
    )
}

fn criterion_2(exact: &ExactRuns) -> Outcome {
    let (Some(splits), Some((_, yk_secs))) = (load("Gun_Point"), exact.get("Gun_Point")) else {
        return Outcome::new(false, "Gun_Point unavailable", vec![]);
    };
    let runs: Vec<RunReport> = (0..SAMPLED_TREE_RUNS).map(|r| run("Gun_Point", &splits, Algorithm::Rs, r)).collect();
    let acc = mean(runs.iter().map(|r| 100.0 * r.accuracy.unwrap()));
    let slowest = runs.iter().map(|r| r.train_seconds).fold(0.0, f64::max);
    let acc_ok = (acc - SAMPLED_TREE_GUN_POINT).abs() <= SAMPLED_TREE_TOLERANCE;
    let speed_ok = runs.iter().all(|r| r.train_seconds * SAMPLED_TREE_MIN_SPEEDUP <= yk_secs);
    Outcome::new(
        acc_ok && speed_ok,
        format!("sampled tree on Gun_Point: mean {acc:.2}% vs {SAMPLED_TREE_GUN_POINT}%, slowest run {:.1}x faster than exact", yk_secs / slowest),
        vec![
            format!("{SAMPLED_TREE_RUNS} runs, mean accuracy {acc:.2}% (±{SAMPLED_TREE_TOLERANCE} pp) {}", if acc_ok { "ok" } else { "OUT OF TOLERANCE" }),
            format!(
                "exact {yk_secs:.2}s, sampled runs {:.3}s..{slowest:.3}s (need >= {SAMPLED_TREE_MIN_SPEEDUP}x each) {}",
                runs.iter().map(|r| r.train_seconds).fold(f64::INFINITY, f64::min),
                if speed_ok { "ok" } else { "TOO SLOW" }
            ),
        ],
    )
}

/// Mean accuracy (%) and mean train seconds per ensemble algorithm on
/// Gun_Point, runs interleaved across algorithms.
struct EnsembleRuns(Vec<(Algorithm, f64, f64)>);

const ENSEMBLES: [Algorithm; 3] = [Algorithm::Enrs, Algorithm::EnrsBagging, Algorithm::EnrsBoosting];

fn criterion_3(exact: &ExactRuns, gun_point: &mut Option<EnsembleRuns>) -> Outcome {
    let mut details = Vec::new();
    let mut acc_ok = true;
    match load("Gun_Point") {
        Some(splits) => {
            let mut reports: Vec<Vec<RunReport>> = vec![Vec::new(); 3];
            for r in 0..ENSEMBLE_RUNS {
                for (i, a) in ENSEMBLES.into_iter().enumerate() {
                    reports[i].push(run("Gun_Point", &splits, a, r));
                }
            }
            let mut summary = Vec::new();
            for (i, (name, reference)) in ENSEMBLE_GUN_POINT.into_iter().enumerate() {
                let acc = mean(reports[i].iter().map(|r| 100.0 * r.accuracy.unwrap()));
                let secs = mean(reports[i].iter().map(|r| r.train_seconds));
                let ok = (acc - reference).abs() <= ENSEMBLE_TOLERANCE;
                acc_ok &= ok;
                details.push(format!(
                    "Gun_Point {name}: mean {acc:.2}% vs {reference:.2}% (±{ENSEMBLE_TOLERANCE} pp) {}",
                    if ok { "ok" } else { "OUT OF TOLERANCE" }
                ));
                summary.push((ENSEMBLES[i], acc, secs));
            }
            *gun_point = Some(EnsembleRuns(summary));
        }
        None => {
            acc_ok = false;
            details.push("Gun_Point: data unavailable".into());
        }
    }
    let mut wins = 0;
    for (name, _) in EXACT_TREE_ACCURACY {
        let (Some(splits), Some((yk_acc, _))) = (load(name), exact.get(name)) else {
            details.push(format!("{name}: data unavailable, counted as not satisfied"));
            continue;
        };
        let boost = match gun_point.as_ref().filter(|_| name == "Gun_Point") {
            Some(runs) => runs.0[2].1,
            None => mean((0..ENSEMBLE_RUNS).map(|r| 100.0 * run(name, &splits, Algorithm::EnrsBoosting, r).accuracy.unwrap())),
        };
        let ok = boost >= yk_acc;
        wins += ok as usize;
        details.push(format!("{name}: boosting mean {boost:.2}% vs exact {yk_acc:.2}% {}", if ok { ">=" } else { "<" }));
    }
    let wins_ok = wins >= BOOSTING_BEATS_EXACT_MIN;
    Outcome::new(
        acc_ok && wins_ok,
        format!(
            "ensemble accuracy on Gun_Point {}; boosting >= exact on {wins} of 7 (need {BOOSTING_BEATS_EXACT_MIN})",
            if acc_ok { "within tolerance" } else { "NOT within tolerance" }
        ),
        details,
    )
}

fn criterion_4(exact: &ExactRuns, gun_point: &Option<EnsembleRuns>) -> Outcome {
    let (Some(runs), Some((_, yk))) = (gun_point, exact.get("Gun_Point")) else {
        return Outcome::new(false, "Gun_Point unavailable", vec![]);
    };
    let secs = |a: Algorithm| runs.0.iter().find(|r| r.0 == a).unwrap().2;
    let (enrs, bagging, boosting) = (secs(Algorithm::Enrs), secs(Algorithm::EnrsBagging), secs(Algorithm::EnrsBoosting));
    let ok = bagging < enrs && enrs < boosting && boosting < yk;
    Outcome::new(
        ok,
        format!("mean train time bagging {bagging:.3}s < enrs {enrs:.3}s < boosting {boosting:.3}s < exact {yk:.3}s"),
        vec![],
    )
}

fn random_dataset(rng: &mut ChaCha8Rng, coarse: bool) -> Dataset {
    let k = rng.gen_range(4..=8);
    let m = rng.gen_range(6..=20);
    let classes = rng.gen_range(2..=3i64);
    let series = (0..k)
        .map(|i| {
            let label = if i < classes { i + 1 } else { rng.gen_range(1..=classes) };
            let values = (0..m)
                .map(|_| if coarse { rng.gen_range(0..3) as f64 } else { rng.gen_range(-3.0..3.0) })
                .collect();
            TimeSeries::new(label, values)
        })
        .collect();
    Dataset::from_series(series).unwrap()
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut mismatches = Vec::new();
    let mut compared = 0;
    for case in 0..PRUNING_CASES {
        let d = random_dataset(&mut rng, case % 2 == 1);
        let m = d.series_length();
        let a = rng.gen_range(1..=m);
        let b = rng.gen_range(1..=m);
        let (lo, hi) = (a.min(b), a.max(b));
        for sampling in [Sampling::Exhaustive, Sampling::Random { ratio: 0.25 }] {
            let search = |pruning| {
                let mut r = stream(case as u64);
                let mut gen = CandidateGenerator::new(&d, lo, hi, sampling, &mut r).unwrap();
                find_shapelet(&d, &mut gen, SearchOptions { pruning, deadline: None })
                    .map(|s| (s.split.gain, s.split.split_distance, s.shapelet.source()))
                    .map_err(|e| e.to_string())
            };
            let (on, off) = (search(true), search(false));
            compared += 1;
            if on != off {
                mismatches.push(format!("case {case} {sampling:?}: {on:?} vs {off:?}"));
            }
        }
    }
    Outcome::new(
        mismatches.is_empty(),
        format!("pruning on == off on {PRUNING_CASES} random datasets ({compared} searches, {} mismatches)", mismatches.len()),
        mismatches,
    )
}

fn direct_znorm(w: &[f64]) -> Vec<f64> {
    let n = w.len() as f64;
    let mean = w.iter().sum::<f64>() / n;
    let sd = (w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    if sd < 1e-10 {
        vec![0.0; w.len()]
    } else {
        w.iter().map(|x| (x - mean) / sd).collect()
    }
}

fn direct_entropy(w: &[f64]) -> f64 {
    let total: f64 = w.iter().sum();
    w.iter().filter(|&&x| x > 0.0).map(|&x| -(x / total) * (x / total).log2()).sum()
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut details = Vec::new();

    let mut worst = 0.0f64;
    for _ in 0..DISTANCE_ORACLE_CASES {
        let m = rng.gen_range(2..60);
        let series: Vec<f64> = (0..m).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let src: Vec<f64> = (0..m).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let len = rng.gen_range(1..=m);
        let start = rng.gen_range(0..=m - len);
        let s = Shapelet::from_window(&TimeSeries::new(0, src.clone()), 0, start, len).unwrap();
        let fast = subsequence_distance(&s, &TimeSeries::new(0, series.clone())).unwrap();
        let norm = direct_znorm(&src[start..start + len]);
        let slow = series
            .windows(len)
            .map(|w| direct_znorm(w).iter().zip(&norm).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        worst = worst.max((fast - slow).abs());
    }
    let dist_ok = worst <= DISTANCE_ORACLE_TOLERANCE;
    details.push(format!("subsequence distance vs brute force: {DISTANCE_ORACLE_CASES} cases, max abs error {worst:.2e}"));

    let mut split_bad = 0;
    for case in 0..SPLIT_ORACLE_CASES {
        let n = rng.gen_range(1..=12);
        let classes = rng.gen_range(1..=4i64);
        let uniform = case % 2 == 0;
        let entries: Vec<LineEntry> = (0..n)
            .map(|_| LineEntry {
                distance: rng.gen_range(0..8) as f64,
                label: rng.gen_range(0..classes),
                weight: if uniform { 1.0 / n as f64 } else { rng.gen_range(0.01..1.0) },
            })
            .collect();
        let got = best_split(&OrderLine::new(entries.clone()).unwrap()).unwrap();
        let mut sorted = entries.clone();
        sorted.sort_by(|a, b| a.distance.total_cmp(&b.distance));
        let by_class = |es: &[LineEntry]| (0..classes).map(|c| es.iter().filter(|e| e.label == c).map(|e| e.weight).sum()).collect::<Vec<f64>>();
        let total: f64 = entries.iter().map(|e| e.weight).sum();
        let parent = direct_entropy(&by_class(&sorted));
        let mut best: Option<(f64, f64, f64)> = None;
        for j in 0..sorted.len().saturating_sub(1) {
            if sorted[j].distance == sorted[j + 1].distance {
                continue;
            }
            let (left, right) = sorted.split_at(j + 1);
            let wl: f64 = left.iter().map(|e| e.weight).sum();
            let wr: f64 = right.iter().map(|e| e.weight).sum();
            let gain = parent - wl / total * direct_entropy(&by_class(left)) - wr / total * direct_entropy(&by_class(right));
            let threshold = (sorted[j].distance + sorted[j + 1].distance) / 2.0;
            let margin = sorted[j + 1].distance - sorted[j].distance;
            let better = best.map_or(true, |(g, t, mg)| {
                gain > g + 1e-12 || ((gain - g).abs() <= 1e-12 && (margin > mg || (margin == mg && threshold < t)))
            });
            if better {
                best = Some((gain, threshold, margin));
            }
        }
        match best {
            Some((gain, threshold, _)) => {
                if (got.gain - gain).abs() > 1e-9 || got.split_distance != threshold {
                    split_bad += 1;
                }
            }
            None => {
                if got.gain != 0.0 {
                    split_bad += 1;
                }
            }
        }
    }
    details.push(format!("best split vs exhaustive thresholds: {SPLIT_ORACLE_CASES} cases, {split_bad} mismatches"));

    let mut worst_stats = 0.0f64;
    let mut windows = 0;
    for _ in 0..50 {
        let m = rng.gen_range(1..80);
        let scale = [1.0, 100.0, 1e4][rng.gen_range(0..3)];
        let values: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0) * scale).collect();
        let t = TimeSeries::new(0, values.clone());
        for start in 0..m {
            for len in 1..=m - start {
                let w = &values[start..start + len];
                let mu = w.iter().sum::<f64>() / len as f64;
                let sd = (w.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / len as f64).sqrt();
                let (a, b) = t.window_stats(start, len).unwrap();
                worst_stats = worst_stats
                    .max((a - mu).abs() / mu.abs().max(1.0))
                    .max((b - sd).abs() / sd.max(1.0));
                windows += 1;
            }
        }
    }
    let stats_ok = worst_stats <= WINDOW_STATS_TOLERANCE;
    details.push(format!("window mean/std vs direct: {windows} windows, max relative error {worst_stats:.2e}"));

    let mut count_bad = 0;
    for _ in 0..CANDIDATE_COUNT_CASES {
        let k = rng.gen_range(1..=10);
        let m = rng.gen_range(1..=40);
        let lo = rng.gen_range(1..=m);
        let hi = rng.gen_range(lo..=m);
        let d = Dataset::from_series((0..k).map(|i| TimeSeries::new(i as i64, vec![0.0; m])).collect()).unwrap();
        let mut enumerated = 0u64;
        for _inst in 0..k {
            for len in lo..=hi {
                for start in 0..m {
                    if start + len <= m {
                        enumerated += 1;
                    }
                }
            }
        }
        if d.candidate_count(lo, hi).unwrap() != enumerated {
            count_bad += 1;
        }
    }
    details.push(format!("candidate count vs enumeration: {CANDIDATE_COUNT_CASES} cases, {count_bad} mismatches"));

    Outcome::new(
        dist_ok && split_bad == 0 && stats_ok && count_bad == 0,
        "oracle equivalence (distance, split, window statistics, candidate count)",
        details,
    )
}

/// Two overlapping classes with some identical series carrying different
/// labels, so fully grown trees still make training errors.
fn noisy_dataset() -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut series = Vec::new();
    for i in 0..24 {
        let label = (i % 2) as i64;
        let values: Vec<f64> = (0..20).map(|j| (j as f64 * 0.4).sin() * (1.0 + label as f64 * 0.2) + rng.gen_range(-0.3..0.3)).collect();
        series.push(TimeSeries::new(label, values.clone()));
        if i % 4 == 0 {
            series.push(TimeSeries::new(1 - label, values));
        }
    }
    Dataset::from_series(series).unwrap()
}

fn criterion_7() -> Outcome {
    let mut details = Vec::new();

    let d = noisy_dataset();
    let cfg = EnsembleConfig { min_len: 4, max_len: 12, ratio: 0.2, seed: 9, size: 10, pruning: true };
    let (_, report) = train_boosting(&d, &cfg, TrainOptions::default()).unwrap();
    let worst_sum = report
        .rounds
        .iter()
        .map(|r| (r.weights.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let nonzero = report.rounds.iter().filter(|r| r.epsilon > 0.0).count();
    let sums_ok = worst_sum <= BOOSTING_WEIGHT_SUM_TOLERANCE && nonzero > 0;
    details.push(format!(
        "boosting weight sums: {} rounds ({nonzero} with nonzero error), max |sum - 1| {worst_sum:.2e}",
        report.rounds.len()
    ));

    let w = boosting_update(&[0.25; 4], &[true, false, false, false], 0.25);
    let expected = [0.4, 0.2, 0.2, 0.2];
    let alpha = boosting_alpha(0.25);
    let worked_ok = w.iter().zip(expected).all(|(a, b)| (a - b).abs() <= 1e-12) && (alpha - 0.5 * 3f64.ln()).abs() <= 1e-12;
    details.push(format!("worked update eps=0.25: weights {w:?}, alpha {alpha:.6}"));

    let mut boot_ok = true;
    let mut rng = stream(1);
    for k in 1..=30usize {
        let d = Dataset::from_series((0..k).map(|i| TimeSeries::new(i as i64 % 3, vec![i as f64, 0.0, 1.0])).collect()).unwrap();
        boot_ok &= d.bootstrap(&mut rng).unwrap().len() == k;
    }
    details.push(format!("bootstrap size == |D| for |D| = 1..30: {}", if boot_ok { "ok" } else { "MISMATCH" }));

    let mut sampling_ok = true;
    let big = Dataset::from_series(
        (0..12)
            .map(|i| TimeSeries::new(i % 2, (0..100).map(|j| ((i * 13 + j * 7) % 17) as f64).collect()))
            .collect(),
    )
    .unwrap();
    for ratio in [0.01, 0.1, 0.5] {
        let mut r = stream(3);
        let mut gen = CandidateGenerator::random(&big, 25, 67, ratio, &mut r).unwrap();
        let yielded = gen.by_ref().count() as f64;
        let visited = gen.visited();
        let sd = (visited as f64 * ratio * (1.0 - ratio)).sqrt();
        let z = (yielded - visited as f64 * ratio) / sd;
        let ok = visited >= SAMPLING_MIN_VISITED && z.abs() <= SAMPLING_SIGMAS;
        sampling_ok &= ok;
        details.push(format!("sampling ratio {ratio}: {yielded} of {visited} visited, z = {z:+.2}"));
    }

    let small = noisy_dataset();
    let tree_cfg = TreeConfig { min_len: 3, max_len: 15, sampling: Sampling::Random { ratio: 0.3 }, pruning: true };
    let tree_json = |s| create_tree(&small, &tree_cfg, &mut stream(s), None).unwrap().0.to_json().unwrap();
    let mut identical = tree_json(11) == tree_json(11);
    for variant in [Variant::Enrs, Variant::Bagging, Variant::Boosting] {
        let cfg = EnsembleConfig { min_len: 3, max_len: 15, ratio: 0.3, seed: 21, size: 5, pruning: true };
        let a = train(&small, variant, &cfg, TrainOptions::default()).unwrap().0.to_json().unwrap();
        let b = train(&small, variant, &cfg, TrainOptions::default()).unwrap().0.to_json().unwrap();
        identical &= a == b;
    }
    details.push(format!("byte-identical models for identical inputs (tree + 3 ensembles): {identical}"));

    Outcome::new(
        sums_ok && worked_ok && boot_ok && sampling_ok && identical,
        "algorithm fidelity (boosting weights, worked update, bootstrap size, sampling, determinism)",
        details,
    )
}

fn criterion_8() -> Outcome {
    Outcome {
        verdict: Verdict::Skip,
        summary: "excluded by definition: tuned-parameter results, 45-dataset / 100-run grids, DNF-scale datasets, external baselines".into(),
        details: vec![],
    }
}

fn print(id: usize, o: &Outcome) {
    let tag = match o.verdict {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
        Verdict::Skip => "SKIP",
    };
    println!("[{tag}] criterion {id}: {}", o.summary);
    for d in &o.details {
        println!("         {d}");
    }
}

fn main() -> ExitCode {
    // Other test binaries may share the machine; this suite times runs, so
    // it trains strictly one model at a time.
    let mut exact = ExactRuns(Vec::new());
    let mut gun_point = None;
    let mut outcomes = Vec::new();
    let mut record = |id: usize, o: Outcome| {
        print(id, &o);
        outcomes.push(o);
    };
    record(1, criterion_1(&mut exact));
    record(2, criterion_2(&exact));
    record(3, criterion_3(&exact, &mut gun_point));
    record(4, criterion_4(&exact, &gun_point));
    record(5, criterion_5());
    record(6, criterion_6());
    record(7, criterion_7());
    record(8, criterion_8());
    let failed = outcomes.iter().filter(|o| matches!(o.verdict, Verdict::Fail)).count();
    println!("acceptance: {} passed, {failed} failed, {} skipped", outcomes.iter().filter(|o| matches!(o.verdict, Verdict::Pass)).count(), outcomes.iter().filter(|o| matches!(o.verdict, Verdict::Skip)).count());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
