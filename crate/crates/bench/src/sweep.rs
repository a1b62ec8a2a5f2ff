//! Shapelet length selection by stratified cross-validation on the training
//! split.

use std::collections::BTreeMap;

use enrs_core::seed::derive_seed;
use enrs_core::Dataset;

use crate::config::Lengths;
use crate::experiment::{fit, FitParams};
use crate::BenchError;

pub const FOLDS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct PairScore {
    pub min_frac: f64,
    pub max_frac: f64,
    /// Pooled accuracy over the held-out parts of the folds that ran.
    pub accuracy: f64,
    pub folds_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub best: (f64, f64),
    pub scores: Vec<PairScore>,
}

/// Fold of each instance: within every class, instances are dealt to folds
/// round-robin in dataset order.
pub fn stratified_folds(d: &Dataset, folds: usize) -> Vec<usize> {
    let mut seen: BTreeMap<i64, usize> = BTreeMap::new();
    d.instances()
        .iter()
        .map(|t| {
            let n = seen.entry(t.label()).or_insert(0);
            let f = *n % folds;
            *n += 1;
            f
        })
        .collect()
}

/// Score every `(min_frac, max_frac)` pair and pick the most accurate; ties
/// go to the narrower range, then to the earlier pair. `base` supplies
/// everything except the lengths; fold `f` trains with `derive_seed(base.seed, f)`.
pub fn sweep_lengths(train: &Dataset, grid: &[(f64, f64)], base: &FitParams) -> Result<SweepResult, BenchError> {
    if grid.is_empty() {
        return Err(BenchError::Config("length grid is empty".into()));
    }
    let fold_of = stratified_folds(train, FOLDS);
    let m = train.series_length();
    let mut scores = Vec::with_capacity(grid.len());
    for &(min_frac, max_frac) in grid {
        let (min_len, max_len) = Lengths::Fractions { min: min_frac, max: max_frac }.resolve(m)?;
        let mut correct = 0usize;
        let mut total = 0usize;
        let mut folds_used = 0;
        for f in 0..FOLDS {
            let (fit_idx, held_idx): (Vec<usize>, Vec<usize>) = (0..train.len()).partition(|&i| fold_of[i] != f);
            let fit_part = train.subset(&fit_idx);
            if held_idx.is_empty() || fit_part.classes().len() < 2 {
                continue;
            }
            let fit_part = fit_part.reweighted(vec![1.0 / fit_idx.len() as f64; fit_idx.len()])?;
            let params = FitParams {
                min_len,
                max_len,
                seed: derive_seed(base.seed, f as u64),
                ..*base
            };
            let (model, _) = fit(&fit_part, &params)?;
            for &i in &held_idx {
                let t = train.instance(i);
                if model.predict(t)? == t.label() {
                    correct += 1;
                }
            }
            total += held_idx.len();
            folds_used += 1;
        }
        if folds_used == 0 {
            return Err(BenchError::Config("every cross-validation fold was skipped".into()));
        }
        scores.push(PairScore {
            min_frac,
            max_frac,
            accuracy: correct as f64 / total as f64,
            folds_used,
        });
    }
    let mut best = &scores[0];
    for s in &scores[1..] {
        let wider = |p: &PairScore| p.max_frac - p.min_frac;
        if s.accuracy > best.accuracy || (s.accuracy == best.accuracy && wider(s) < wider(best)) {
            best = s;
        }
    }
    Ok(SweepResult {
        best: (best.min_frac, best.max_frac),
        scores,
    })
}
