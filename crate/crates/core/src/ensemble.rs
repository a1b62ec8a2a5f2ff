//! Ensembles of randomized shapelet trees: plain combination, bagging and
//! boosting, with (weighted) voting.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label, TimeSeries};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, stream};
use crate::tree::{create_tree, Sampling, SearchStats, ShapeletTree, TreeConfig};

/// Weighted errors below this are clamped before computing a boosting alpha.
pub const MIN_EPSILON: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Every member sees the full training set.
    Enrs,
    Bagging,
    Boosting,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Enrs => "enrs",
            Variant::Bagging => "bagging",
            Variant::Boosting => "boosting",
        })
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "enrs" => Ok(Variant::Enrs),
            "bagging" => Ok(Variant::Bagging),
            "boosting" => Ok(Variant::Boosting),
            other => Err(format!("unknown ensemble variant {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub min_len: usize,
    pub max_len: usize,
    pub ratio: f64,
    pub seed: u64,
    /// Planned number of members.
    pub size: usize,
    pub pruning: bool,
}

impl EnsembleConfig {
    fn tree_config(&self) -> TreeConfig {
        TreeConfig {
            min_len: self.min_len,
            max_len: self.max_len,
            sampling: Sampling::Random { ratio: self.ratio },
            pruning: self.pruning,
        }
    }

    /// Seed of member `index`'s random stream.
    pub fn member_seed(&self, index: usize) -> u64 {
        derive_seed(self.seed, index as u64)
    }

    fn validate(&self) -> Result<()> {
        if self.size == 0 {
            return Err(Error::EmptyEnsemble);
        }
        self.tree_config().sampling.validate()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TrainOptions {
    /// Train independent members on the rayon pool (not used by boosting).
    pub parallel: bool,
    pub deadline: Option<Instant>,
}

/// One boosting round as it happened.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostingRound {
    pub epsilon: f64,
    /// `None` when the round was discarded (`epsilon >= 0.5`).
    pub alpha: Option<f64>,
    /// Instance weights after the round's update.
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct TrainReport {
    pub stats: SearchStats,
    pub rounds: Vec<BoostingRound>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    variant: Variant,
    config: EnsembleConfig,
    members: Vec<ShapeletTree>,
    alphas: Vec<f64>,
}

impl Ensemble {
    pub fn new(variant: Variant, config: EnsembleConfig, members: Vec<ShapeletTree>, alphas: Vec<f64>) -> Result<Self> {
        let e = Ensemble {
            variant,
            config,
            members,
            alphas,
        };
        e.validate()?;
        Ok(e)
    }

    fn validate(&self) -> Result<()> {
        if self.members.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        if self.members.len() != self.alphas.len() {
            return Err(Error::LengthMismatch {
                left: self.members.len(),
                right: self.alphas.len(),
            });
        }
        if self.alphas.iter().any(|a| !a.is_finite() || *a <= 0.0) {
            return Err(Error::InvalidModel("vote weights must be finite and positive".into()));
        }
        Ok(())
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn config(&self) -> &EnsembleConfig {
        &self.config
    }

    pub fn members(&self) -> &[ShapeletTree] {
        &self.members
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Weighted vote; ties go to the smallest label.
    pub fn classify(&self, series: &TimeSeries) -> Result<Label> {
        let votes = self
            .members
            .iter()
            .map(|m| m.predict(series))
            .collect::<Result<Vec<_>>>()?;
        Ok(weighted_vote(votes.into_iter().zip(self.alphas.iter().copied())))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let e: Ensemble = serde_json::from_str(text)?;
        e.validate()?;
        Ok(e)
    }
}

/// Label with the largest summed weight; ties to the smallest label.
pub fn weighted_vote(votes: impl IntoIterator<Item = (Label, f64)>) -> Label {
    let mut scores: BTreeMap<Label, f64> = BTreeMap::new();
    for (label, w) in votes {
        *scores.entry(label).or_insert(0.0) += w;
    }
    let mut best: Option<(Label, f64)> = None;
    for (label, score) in scores {
        if best.map_or(true, |(_, s)| score > s) {
            best = Some((label, score));
        }
    }
    best.expect("at least one vote").0
}

fn train_independent(
    d: &Dataset,
    config: &EnsembleConfig,
    opts: TrainOptions,
    bootstrap: bool,
) -> Result<(Vec<ShapeletTree>, SearchStats)> {
    let tree_cfg = config.tree_config();
    let member = |index: usize| -> Result<(ShapeletTree, SearchStats)> {
        let mut rng = stream(config.member_seed(index));
        if bootstrap {
            let sample = d.bootstrap(&mut rng)?;
            create_tree(&sample, &tree_cfg, &mut rng, opts.deadline)
        } else {
            create_tree(d, &tree_cfg, &mut rng, opts.deadline)
        }
    };
    let trained: Vec<(ShapeletTree, SearchStats)> = if opts.parallel {
        (0..config.size).into_par_iter().map(member).collect::<Result<_>>()?
    } else {
        (0..config.size).map(member).collect::<Result<_>>()?
    };
    let mut stats = SearchStats::default();
    let members = trained
        .into_iter()
        .map(|(tree, s)| {
            stats += s;
            tree
        })
        .collect();
    Ok((members, stats))
}

/// `size` randomized trees on the full training set, one stream per member.
pub fn train_enrs(d: &Dataset, config: &EnsembleConfig, opts: TrainOptions) -> Result<(Ensemble, TrainReport)> {
    config.validate()?;
    let (members, stats) = train_independent(&d.reweighted(vec![1.0 / d.len() as f64; d.len()])?, config, opts, false)?;
    let alphas = vec![1.0; members.len()];
    Ok((
        Ensemble::new(Variant::Enrs, *config, members, alphas)?,
        TrainReport { stats, rounds: vec![] },
    ))
}

/// Each member trains on its own bootstrap sample. The bootstrap draws come
/// first on the member stream, then candidate sampling continues on it.
pub fn train_bagging(d: &Dataset, config: &EnsembleConfig, opts: TrainOptions) -> Result<(Ensemble, TrainReport)> {
    config.validate()?;
    let (members, stats) = train_independent(d, config, opts, true)?;
    let alphas = vec![1.0; members.len()];
    Ok((
        Ensemble::new(Variant::Bagging, *config, members, alphas)?,
        TrainReport { stats, rounds: vec![] },
    ))
}

/// Vote weight of a boosting round: `½ ln((1−ε)/ε)`, ε clamped below at
/// [`MIN_EPSILON`].
pub fn boosting_alpha(epsilon: f64) -> f64 {
    let e = epsilon.max(MIN_EPSILON);
    0.5 * ((1.0 - e) / e).ln()
}

/// Misclassified weights are divided by `2ε` (ε clamped as for the alpha),
/// correct ones are kept, then everything is renormalised to sum to one.
pub fn boosting_update(weights: &[f64], misclassified: &[bool], epsilon: f64) -> Vec<f64> {
    let e = epsilon.max(MIN_EPSILON);
    let raw: Vec<f64> = weights
        .iter()
        .zip(misclassified)
        .map(|(&w, &miss)| if miss { w / (2.0 * e) } else { w })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Sequential reweighting rounds. ε is the weight the new tree misclassifies
/// on its own training data under the current weights. A round with
/// `ε >= 0.5` ends training and is discarded, unless it is the very first,
/// in which case its tree is kept with a unit vote.
pub fn train_boosting(d: &Dataset, config: &EnsembleConfig, opts: TrainOptions) -> Result<(Ensemble, TrainReport)> {
    config.validate()?;
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let tree_cfg = config.tree_config();
    let mut weights = vec![1.0 / d.len() as f64; d.len()];
    let mut members = Vec::new();
    let mut alphas = Vec::new();
    let mut report = TrainReport::default();
    for round in 0..config.size {
        let weighted = d.reweighted(weights.clone())?;
        let mut rng = stream(config.member_seed(round));
        let (tree, stats) = create_tree(&weighted, &tree_cfg, &mut rng, opts.deadline)?;
        report.stats += stats;
        let misclassified = d
            .instances()
            .iter()
            .map(|t| tree.predict(t).map(|p| p != t.label()))
            .collect::<Result<Vec<bool>>>()?;
        let epsilon: f64 = weights.iter().zip(&misclassified).filter(|(_, &m)| m).map(|(w, _)| w).sum();
        if epsilon >= 0.5 {
            report.rounds.push(BoostingRound {
                epsilon,
                alpha: None,
                weights: weights.clone(),
            });
            if members.is_empty() {
                members.push(tree);
                alphas.push(1.0);
            }
            break;
        }
        let alpha = boosting_alpha(epsilon);
        weights = boosting_update(&weights, &misclassified, epsilon);
        report.rounds.push(BoostingRound {
            epsilon,
            alpha: Some(alpha),
            weights: weights.clone(),
        });
        members.push(tree);
        alphas.push(alpha);
    }
    Ok((Ensemble::new(Variant::Boosting, *config, members, alphas)?, report))
}

pub fn train(d: &Dataset, variant: Variant, config: &EnsembleConfig, opts: TrainOptions) -> Result<(Ensemble, TrainReport)> {
    match variant {
        Variant::Enrs => train_enrs(d, config, opts),
        Variant::Bagging => train_bagging(d, config, opts),
        Variant::Boosting => train_boosting(d, config, opts),
    }
}
