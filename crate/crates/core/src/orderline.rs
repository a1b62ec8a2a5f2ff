//! Order lines: instances arranged by distance to a candidate, and the
//! weighted information-gain machinery that scores them.
//!
//! Gains are in bits. Split thresholds sit at midpoints between consecutive
//! distinct distances, so equal distances never straddle a split.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};

/// Gains closer than this are treated as equal and fall through to the
/// margin / threshold tie-breaks.
pub const GAIN_TOLERANCE: f64 = 1e-12;

/// Above this many classes the optimistic bound assigns classes to ends
/// greedily instead of enumerating every assignment.
pub const MAX_ENUMERATED_CLASSES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineEntry {
    pub distance: f64,
    pub label: Label,
    pub weight: f64,
}

/// Entries sorted by ascending distance (stable for ties).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OrderLine {
    entries: Vec<LineEntry>,
    total_weight: f64,
}

impl OrderLine {
    pub fn new(mut entries: Vec<LineEntry>) -> Result<Self> {
        if let Some(e) = entries.iter().find(|e| !(e.weight > 0.0) || !e.weight.is_finite()) {
            return Err(Error::InvalidWeights(format!("order line weight {} must be positive", e.weight)));
        }
        entries.sort_by(|a, b| a.distance.total_cmp(&b.distance));
        let total_weight = entries.iter().map(|e| e.weight).sum();
        Ok(OrderLine { entries, total_weight })
    }

    /// Unit-weight entries from `(distance, label)` pairs.
    pub fn unweighted(points: &[(f64, Label)]) -> Self {
        Self::new(
            points
                .iter()
                .map(|&(distance, label)| LineEntry {
                    distance,
                    label,
                    weight: 1.0,
                })
                .collect(),
        )
        .expect("unit weights are valid")
    }

    pub fn insert(&mut self, entry: LineEntry) -> Result<()> {
        if !(entry.weight > 0.0) || !entry.weight.is_finite() {
            return Err(Error::InvalidWeights(format!("order line weight {} must be positive", entry.weight)));
        }
        let at = self.entries.partition_point(|e| e.distance <= entry.distance);
        self.entries.insert(at, entry);
        self.total_weight += entry.weight;
        Ok(())
    }

    pub fn entries(&self) -> &[LineEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn class_weights(&self) -> BTreeMap<Label, f64> {
        let mut totals = BTreeMap::new();
        for e in &self.entries {
            *totals.entry(e.label).or_insert(0.0) += e.weight;
        }
        totals
    }
}

/// Best threshold on an order line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    /// Information gain in bits.
    pub gain: f64,
    /// Instances at distance `<=` this go left.
    pub split_distance: f64,
    /// Gap between the two distances straddling the threshold.
    pub margin: f64,
}

impl SplitResult {
    /// Strict improvement under (gain, margin, -threshold) lexicographic order,
    /// with gains within [`GAIN_TOLERANCE`] considered equal.
    pub fn is_better_than(&self, other: &SplitResult) -> bool {
        if self.gain > other.gain + GAIN_TOLERANCE {
            return true;
        }
        if self.gain + GAIN_TOLERANCE < other.gain {
            return false;
        }
        if self.margin != other.margin {
            return self.margin > other.margin;
        }
        self.split_distance < other.split_distance
    }
}

/// `-Σ p log2 p` over classes with positive weight.
pub fn entropy(class_weights: &[f64]) -> Result<f64> {
    let total: f64 = class_weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroWeight);
    }
    Ok(class_weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| {
            let p = w / total;
            -p * p.log2()
        })
        .sum())
}

/// A placed instance with its class as a dense index.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Placed {
    pub distance: f64,
    pub class: usize,
    pub weight: f64,
}

/// Per-class weights and counts. Counts make "class absent" exact where
/// floating-point subtraction would leave crumbs.
#[derive(Debug, Clone)]
pub(crate) struct ClassTally {
    pub weight: Vec<f64>,
    pub count: Vec<usize>,
}

impl ClassTally {
    pub fn zeros(n_classes: usize) -> Self {
        ClassTally {
            weight: vec![0.0; n_classes],
            count: vec![0; n_classes],
        }
    }

    pub fn add(&mut self, class: usize, weight: f64) {
        self.weight[class] += weight;
        self.count[class] += 1;
    }

    pub fn remove(&mut self, class: usize, weight: f64) {
        self.count[class] -= 1;
        self.weight[class] = if self.count[class] == 0 {
            0.0
        } else {
            self.weight[class] - weight
        };
    }

    pub fn reset(&mut self) {
        self.weight.iter_mut().for_each(|w| *w = 0.0);
        self.count.iter_mut().for_each(|c| *c = 0);
    }

    fn copy_from(&mut self, other: &ClassTally) {
        self.weight.copy_from_slice(&other.weight);
        self.count.copy_from_slice(&other.count);
    }
}

/// `W·H(w/W)` in bits, i.e. `W log2 W − Σ w_c log2 w_c`, and `W`.
#[inline]
fn weighted_entropy(weight: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut total = 0.0;
    let mut acc = 0.0;
    for w in weight {
        total += w;
        acc += w * w.log2();
    }
    if total > 0.0 {
        (total * total.log2() - acc, total)
    } else {
        (0.0, 0.0)
    }
}

/// Gain of splitting `totals` into `left` and `totals − left`.
#[inline]
fn split_gain(parent_entropy: f64, totals: &ClassTally, left: &ClassTally) -> f64 {
    let n = totals.weight.len();
    let (el, wl) = weighted_entropy((0..n).filter(|&c| left.count[c] > 0).map(|c| left.weight[c]));
    let (er, wr) = weighted_entropy(
        (0..n)
            .filter(|&c| totals.count[c] > left.count[c])
            .map(|c| if left.count[c] == 0 { totals.weight[c] } else { totals.weight[c] - left.weight[c] }),
    );
    let w = wl + wr;
    (parent_entropy - (el + er) / w).max(0.0)
}

fn parent_entropy(totals: &ClassTally) -> f64 {
    let n = totals.weight.len();
    let (e, w) = weighted_entropy((0..n).filter(|&c| totals.count[c] > 0).map(|c| totals.weight[c]));
    if w > 0.0 {
        e / w
    } else {
        0.0
    }
}

/// Best split over sorted `entries`. `scratch` must have the same class count
/// as `totals`.
pub(crate) fn scan_best_split(entries: &[Placed], totals: &ClassTally, scratch: &mut ClassTally) -> SplitResult {
    let parent = parent_entropy(totals);
    scratch.reset();
    let mut best: Option<SplitResult> = None;
    for i in 0..entries.len().saturating_sub(1) {
        scratch.add(entries[i].class, entries[i].weight);
        let (lo, hi) = (entries[i].distance, entries[i + 1].distance);
        if lo == hi {
            continue;
        }
        let candidate = SplitResult {
            gain: split_gain(parent, totals, scratch),
            split_distance: lo + (hi - lo) / 2.0,
            margin: hi - lo,
        };
        if best.as_ref().map_or(true, |b| candidate.is_better_than(b)) {
            best = Some(candidate);
        }
    }
    best.unwrap_or(SplitResult {
        gain: 0.0,
        split_distance: entries.first().map_or(0.0, |e| e.distance),
        margin: 0.0,
    })
}

/// Highest gain over thresholds on `low ++ entries ++ high`, where `low` and
/// `high` are blocks sitting strictly below / above every entry.
fn scan_max_gain(
    parent: f64,
    entries: &[Placed],
    low: &ClassTally,
    high_present: bool,
    totals: &ClassTally,
    left: &mut ClassTally,
) -> f64 {
    left.copy_from(low);
    let low_present = low.count.iter().any(|&c| c > 0);
    let mut best: f64 = 0.0;
    if low_present && !entries.is_empty() {
        best = best.max(split_gain(parent, totals, left));
    }
    for i in 0..entries.len() {
        left.add(entries[i].class, entries[i].weight);
        let at_boundary = match entries.get(i + 1) {
            Some(next) => next.distance != entries[i].distance,
            None => high_present,
        };
        if at_boundary {
            best = best.max(split_gain(parent, totals, left));
        }
    }
    best
}

/// Reusable buffers for [`optimistic_bound`].
#[derive(Debug, Clone)]
pub(crate) struct BoundScratch {
    totals: ClassTally,
    low: ClassTally,
    left: ClassTally,
    active: Vec<usize>,
}

impl BoundScratch {
    pub fn new(n_classes: usize) -> Self {
        BoundScratch {
            totals: ClassTally::zeros(n_classes),
            low: ClassTally::zeros(n_classes),
            left: ClassTally::zeros(n_classes),
            active: Vec::with_capacity(n_classes),
        }
    }
}

/// Upper bound on the gain reachable once the `remaining` weight is placed
/// anywhere on the line. Each class's remaining weight goes wholesale to the
/// low or high end; every assignment is scored when at most
/// [`MAX_ENUMERATED_CLASSES`] classes remain, otherwise each class goes to
/// the end where its placed weight already leans.
///
/// For a fixed threshold, child entropy is concave in how the remaining
/// weight is divided, so its minimum sits at a whole-class assignment; the
/// enumerated bound is therefore exact, not just admissible.
pub(crate) fn optimistic_bound(
    partial: &[Placed],
    placed: &ClassTally,
    remaining: &ClassTally,
    scratch: &mut BoundScratch,
) -> f64 {
    let n = placed.weight.len();
    scratch.active.clear();
    scratch.active.extend((0..n).filter(|&c| remaining.count[c] > 0));
    for c in 0..n {
        scratch.totals.count[c] = placed.count[c] + remaining.count[c];
        scratch.totals.weight[c] = placed.weight[c] + remaining.weight[c];
    }
    let parent = parent_entropy(&scratch.totals);
    if scratch.active.is_empty() {
        return scan_best_split(partial, &scratch.totals, &mut scratch.left).gain;
    }
    if partial.is_empty() {
        let present = scratch.totals.count.iter().filter(|&&c| c > 0).count();
        return (present.max(1) as f64).log2();
    }

    let assignments: Vec<u64> = if scratch.active.len() <= MAX_ENUMERATED_CLASSES {
        (0..1u64 << scratch.active.len()).collect()
    } else {
        let half = partial.len() / 2;
        let mut lower = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for (i, p) in partial.iter().enumerate() {
            if i < half {
                lower[p.class] += p.weight;
            } else {
                upper[p.class] += p.weight;
            }
        }
        let mask = scratch
            .active
            .iter()
            .enumerate()
            .filter(|(_, &c)| lower[c] > upper[c])
            .fold(0u64, |m, (bit, _)| m | 1 << bit);
        vec![mask]
    };

    let mut best: f64 = 0.0;
    for mask in assignments {
        scratch.low.reset();
        let mut high_present = false;
        for (bit, &c) in scratch.active.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                scratch.low.weight[c] = remaining.weight[c];
                scratch.low.count[c] = remaining.count[c];
            } else {
                high_present = true;
            }
        }
        let g = scan_max_gain(parent, partial, &scratch.low, high_present, &scratch.totals, &mut scratch.left);
        best = best.max(g);
    }
    best
}

/// Dense class indices for the labels present in `labels`.
fn class_index(labels: impl Iterator<Item = Label>) -> BTreeMap<Label, usize> {
    let mut idx = BTreeMap::new();
    for l in labels {
        idx.entry(l).or_insert(0);
    }
    for (i, v) in idx.values_mut().enumerate() {
        *v = i;
    }
    idx
}

fn to_placed(line: &OrderLine, index: &BTreeMap<Label, usize>) -> (Vec<Placed>, ClassTally) {
    let mut tally = ClassTally::zeros(index.len());
    let placed = line
        .entries()
        .iter()
        .map(|e| {
            let class = index[&e.label];
            tally.add(class, e.weight);
            Placed {
                distance: e.distance,
                class,
                weight: e.weight,
            }
        })
        .collect();
    (placed, tally)
}

/// Best threshold on the line: every boundary between consecutive distinct
/// distances is scored; ties go to the larger margin, then the smaller
/// threshold.
pub fn best_split(line: &OrderLine) -> Result<SplitResult> {
    if line.is_empty() {
        return Err(Error::EmptyOrderLine);
    }
    let index = class_index(line.entries().iter().map(|e| e.label));
    let (placed, totals) = to_placed(line, &index);
    Ok(scan_best_split(&placed, &totals, &mut ClassTally::zeros(index.len())))
}

/// Upper bound on the best gain once `remaining` per-class weights are added
/// anywhere on `partial`.
pub fn optimistic_gain_bound(partial: &OrderLine, remaining: &[(Label, f64)]) -> f64 {
    let index = class_index(
        partial
            .entries()
            .iter()
            .map(|e| e.label)
            .chain(remaining.iter().filter(|r| r.1 > 0.0).map(|r| r.0)),
    );
    let (placed, placed_tally) = to_placed(partial, &index);
    let mut rest = ClassTally::zeros(index.len());
    for &(label, w) in remaining.iter().filter(|r| r.1 > 0.0) {
        rest.add(index[&label], w);
    }
    optimistic_bound(&placed, &placed_tally, &rest, &mut BoundScratch::new(index.len()))
}

/// Route each instance left iff its distance `<= split_distance`. Weights are
/// carried over unchanged. `distances` is in the dataset's instance order.
pub fn split_dataset(d: &Dataset, distances: &[f64], split_distance: f64) -> Result<(Dataset, Dataset)> {
    if distances.len() != d.len() {
        return Err(Error::LengthMismatch {
            left: d.len(),
            right: distances.len(),
        });
    }
    let (left, right): (Vec<usize>, Vec<usize>) = (0..d.len()).partition(|&i| distances[i] <= split_distance);
    Ok((d.subset(&left), d.subset(&right)))
}
