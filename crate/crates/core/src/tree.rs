//! Shapelet search and fully grown shapelet decision trees.

use std::ops::AddAssign;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{check_lengths, Dataset, Label, TimeSeries};
use crate::error::{Error, Result};
use crate::metric::{min_window_distance, znormalize_into, Shapelet, ShapeletSource, WindowTable};
use crate::orderline::{
    optimistic_bound, scan_best_split, split_dataset, BoundScratch, ClassTally, Placed, SplitResult,
    GAIN_TOLERANCE,
};
use crate::seed::StreamRng;

/// Allowance for rounding differences between an optimistic bound and the
/// gain finally computed for the same candidate.
const BOUND_ROUNDING: f64 = 1e-13;

/// How candidates are drawn from the full enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Sampling {
    /// Every subsequence in the length range.
    Exhaustive,
    /// Each visited subsequence is kept iff a fresh `U(0,1)` draw is `< ratio`.
    Random { ratio: f64 },
}

impl Sampling {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Sampling::Random { ratio } if !(ratio > 0.0 && ratio <= 1.0) => Err(Error::InvalidRatio(ratio)),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub candidates_visited: u64,
    /// Candidates that passed sampling.
    pub candidates_evaluated: u64,
    /// Evaluated candidates dropped by the optimistic gain bound.
    pub candidates_pruned: u64,
    pub distance_early_abandons: u64,
}

impl AddAssign for SearchStats {
    fn add_assign(&mut self, o: SearchStats) {
        self.candidates_visited += o.candidates_visited;
        self.candidates_evaluated += o.candidates_evaluated;
        self.candidates_pruned += o.candidates_pruned;
        self.distance_early_abandons += o.distance_early_abandons;
    }
}

/// Walks candidates by length (longest first), then instance, then start
/// position. In random mode every visited candidate costs exactly one draw.
pub struct CandidateGenerator<'r, R: Rng + ?Sized = StreamRng> {
    sampler: Option<(&'r mut R, f64)>,
    n_instances: usize,
    series_length: usize,
    min_len: usize,
    max_len: usize,
    len: usize,
    instance: usize,
    start: usize,
    done: bool,
    visited: u64,
    yielded: u64,
}

impl<'r, R: Rng + ?Sized> CandidateGenerator<'r, R> {
    fn with_sampler(d: &Dataset, min_len: usize, max_len: usize, sampler: Option<(&'r mut R, f64)>) -> Result<Self> {
        check_lengths(min_len, max_len, d.series_length())?;
        if let Some((_, ratio)) = &sampler {
            Sampling::Random { ratio: *ratio }.validate()?;
        }
        Ok(CandidateGenerator {
            sampler,
            n_instances: d.len(),
            series_length: d.series_length(),
            min_len,
            max_len,
            len: max_len,
            instance: 0,
            start: 0,
            done: d.is_empty(),
            visited: 0,
            yielded: 0,
        })
    }

    pub fn random(d: &Dataset, min_len: usize, max_len: usize, ratio: f64, rng: &'r mut R) -> Result<Self> {
        Self::with_sampler(d, min_len, max_len, Some((rng, ratio)))
    }

    pub fn new(d: &Dataset, min_len: usize, max_len: usize, sampling: Sampling, rng: &'r mut R) -> Result<Self> {
        match sampling {
            Sampling::Exhaustive => Self::with_sampler(d, min_len, max_len, None),
            Sampling::Random { ratio } => Self::random(d, min_len, max_len, ratio, rng),
        }
    }

    /// Rewind to the first candidate. The random stream is not rewound.
    pub fn restart(&mut self) {
        self.len = self.max_len;
        self.instance = 0;
        self.start = 0;
        self.done = self.n_instances == 0;
    }

    pub fn visited(&self) -> u64 {
        self.visited
    }

    pub fn yielded(&self) -> u64 {
        self.yielded
    }

    fn advance(&mut self) -> Option<ShapeletSource> {
        if self.done {
            return None;
        }
        let current = ShapeletSource {
            instance: self.instance,
            start: self.start,
            length: self.len,
        };
        self.start += 1;
        if self.start + self.len > self.series_length {
            self.start = 0;
            self.instance += 1;
            if self.instance == self.n_instances {
                self.instance = 0;
                if self.len == self.min_len {
                    self.done = true;
                } else {
                    self.len -= 1;
                }
            }
        }
        Some(current)
    }
}

impl CandidateGenerator<'static, StreamRng> {
    pub fn exhaustive(d: &Dataset, min_len: usize, max_len: usize) -> Result<Self> {
        Self::with_sampler(d, min_len, max_len, None)
    }
}

impl<R: Rng + ?Sized> Iterator for CandidateGenerator<'_, R> {
    type Item = ShapeletSource;

    fn next(&mut self) -> Option<ShapeletSource> {
        loop {
            let cand = self.advance()?;
            self.visited += 1;
            let keep = match &mut self.sampler {
                None => true,
                Some((rng, ratio)) => rng.gen::<f64>() < *ratio,
            };
            if keep {
                self.yielded += 1;
                return Some(cand);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SearchOptions {
    /// Drop candidates whose optimistic gain cannot beat the incumbent.
    pub pruning: bool,
    pub deadline: Option<Instant>,
}

/// Outcome of a node-level shapelet search.
#[derive(Debug, Clone)]
pub struct ShapeletSearch {
    pub shapelet: Shapelet,
    pub split: SplitResult,
    /// Distance of every instance to the shapelet, in instance order.
    pub distances: Vec<f64>,
    pub stats: SearchStats,
}

/// Best (shapelet, split) over the candidates `gen` yields.
///
/// Each candidate is compared with every instance in instance order while its
/// order line is built up; with pruning on, it is dropped as soon as the
/// optimistic bound cannot reach the incumbent gain. The incumbent changes
/// only when a candidate's gain is strictly higher (beyond
/// [`GAIN_TOLERANCE`]), so among equal gains the first candidate visited wins
/// and pruning never changes the result.
pub fn find_shapelet<R: Rng + ?Sized>(
    d: &Dataset,
    gen: &mut CandidateGenerator<'_, R>,
    opts: SearchOptions,
) -> Result<ShapeletSearch> {
    if d.len() < 2 || d.classes().len() < 2 {
        return Err(Error::NotSplittable {
            instances: d.len(),
            classes: d.classes().to_vec(),
        });
    }
    let n = d.len();
    let n_classes = d.classes().len();
    let class_of: Vec<usize> = d
        .instances()
        .iter()
        .map(|t| d.classes().binary_search(&t.label()).expect("label in class set"))
        .collect();
    let mut totals = ClassTally::zeros(n_classes);
    for (i, &c) in class_of.iter().enumerate() {
        totals.add(c, d.weights()[i]);
    }

    let mut stats = SearchStats::default();
    let visited_before = gen.visited();
    let mut window = Vec::with_capacity(gen.max_len);
    let mut distances = vec![0.0; n];
    let mut line: Vec<Placed> = Vec::with_capacity(n);
    let mut placed = ClassTally::zeros(n_classes);
    let mut remaining = totals.clone();
    let mut split_scratch = ClassTally::zeros(n_classes);
    let mut bound_scratch = BoundScratch::new(n_classes);
    let mut best: Option<(SplitResult, ShapeletSource, Vec<f64>, Vec<f64>)> = None;
    let mut table: Option<WindowTable> = None;

    while let Some(cand) = gen.next() {
        stats.candidates_evaluated += 1;
        if let Some(deadline) = opts.deadline {
            if stats.candidates_evaluated % 64 == 0 && Instant::now() > deadline {
                return Err(Error::DeadlineExceeded);
            }
        }
        if table.as_ref().map(|t| t.len()) != Some(cand.length) {
            table = WindowTable::build(d.instances(), cand.length);
        }
        match &table {
            Some(t) => {
                window.clear();
                window.extend_from_slice(t.window(cand.instance, cand.start));
            }
            None => znormalize_into(d.instance(cand.instance), cand.start, cand.length, &mut window),
        }

        line.clear();
        placed.reset();
        remaining.weight.copy_from_slice(&totals.weight);
        remaining.count.copy_from_slice(&totals.count);
        let mut pruned = false;
        for i in 0..n {
            let dist = match &table {
                Some(t) => t.min_distance(&window, i, &mut stats.distance_early_abandons),
                None => min_window_distance(&window, d.instance(i), &mut stats.distance_early_abandons),
            };
            distances[i] = dist;
            let at = line.partition_point(|p| p.distance <= dist);
            let weight = d.weights()[i];
            line.insert(
                at,
                Placed {
                    distance: dist,
                    class: class_of[i],
                    weight,
                },
            );
            placed.add(class_of[i], weight);
            remaining.remove(class_of[i], weight);
            if opts.pruning && i + 1 < n {
                if let Some((incumbent, ..)) = &best {
                    let bound = optimistic_bound(&line, &placed, &remaining, &mut bound_scratch);
                    // Ties cannot replace the incumbent, so a bound that only
                    // reaches it is enough to drop the candidate.
                    if bound + BOUND_ROUNDING < incumbent.gain + GAIN_TOLERANCE {
                        pruned = true;
                        break;
                    }
                }
            }
        }
        if pruned {
            stats.candidates_pruned += 1;
            continue;
        }
        let split = scan_best_split(&line, &totals, &mut split_scratch);
        let improves = best.as_ref().map_or(true, |(b, ..)| split.gain > b.gain + GAIN_TOLERANCE);
        if improves {
            best = Some((split, cand, window.clone(), distances.clone()));
        }
    }
    stats.candidates_visited = gen.visited() - visited_before;

    let (split, source, values, distances) = best.ok_or(Error::NoCandidate)?;
    Ok(ShapeletSearch {
        shapelet: Shapelet::from_normalized(values, source),
        split,
        distances,
        stats,
    })
}

/// Tree node. Trees are stored flat in pre-order; children always follow
/// their parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    Internal {
        shapelet: Shapelet,
        split_distance: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        label: Label,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeletTree {
    nodes: Vec<Node>,
}

impl ShapeletTree {
    /// Build from pre-ordered nodes, checking child links.
    pub fn from_nodes(nodes: Vec<Node>) -> Result<Self> {
        let tree = ShapeletTree { nodes };
        tree.validate()?;
        Ok(tree)
    }

    fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::Model(serde::de::Error::custom("tree has no nodes")));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if let Node::Internal { left, right, shapelet, .. } = node {
                let ok = |c: usize| c > i && c < self.nodes.len();
                if !ok(*left) || !ok(*right) || left == right || shapelet.is_empty() {
                    return Err(Error::Model(serde::de::Error::custom(format!("bad links at node {i}"))));
                }
            }
        }
        Ok(())
    }

    pub fn leaf(label: Label) -> Self {
        ShapeletTree {
            nodes: vec![Node::Leaf { label }],
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Internal { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Follow the tree: left iff `subsequence_distance <= split_distance`.
    pub fn predict(&self, series: &TimeSeries) -> Result<Label> {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { label } => return Ok(*label),
                Node::Internal {
                    shapelet,
                    split_distance,
                    left,
                    right,
                } => {
                    let dist = crate::metric::subsequence_distance(shapelet, series)?;
                    at = if dist <= *split_distance { *left } else { *right };
                }
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let tree: ShapeletTree = serde_json::from_str(text)?;
        tree.validate()?;
        Ok(tree)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub min_len: usize,
    pub max_len: usize,
    pub sampling: Sampling,
    pub pruning: bool,
}

/// Heaviest class, ties to the smallest label.
pub fn majority_label(d: &Dataset) -> Option<Label> {
    let mut best: Option<(Label, f64)> = None;
    for (label, w) in d.class_weights() {
        if best.map_or(true, |(_, bw)| w > bw) {
            best = Some((label, w));
        }
    }
    best.map(|(l, _)| l)
}

struct Builder<'a, R: Rng + ?Sized> {
    cfg: &'a TreeConfig,
    rng: &'a mut R,
    deadline: Option<Instant>,
    nodes: Vec<Node>,
    stats: SearchStats,
}

impl<R: Rng + ?Sized> Builder<'_, R> {
    fn search(&mut self, d: &Dataset) -> Result<Option<ShapeletSearch>> {
        let opts = SearchOptions {
            pruning: self.cfg.pruning,
            deadline: self.deadline,
        };
        let mut gen = CandidateGenerator::new(d, self.cfg.min_len, self.cfg.max_len, self.cfg.sampling, &mut *self.rng)?;
        let mut outcome = find_shapelet(d, &mut gen, opts);
        let mut first_pass = 0;
        if matches!(outcome, Err(Error::NoCandidate)) && matches!(self.cfg.sampling, Sampling::Random { .. }) {
            // A starved random pass gets one more pass before the node gives up.
            first_pass = gen.visited();
            gen.restart();
            outcome = find_shapelet(d, &mut gen, opts);
        }
        match outcome {
            Ok(found) => {
                self.stats += found.stats;
                self.stats.candidates_visited += first_pass;
                Ok(Some(found))
            }
            Err(Error::NoCandidate) => {
                self.stats.candidates_visited += gen.visited();
                Ok(None)
            }
            Err(e) => Err(e),
        }
    }

    fn grow(&mut self, d: &Dataset) -> Result<usize> {
        let at = self.nodes.len();
        let leaf = Node::Leaf {
            label: majority_label(d).ok_or(Error::EmptyDataset)?,
        };
        if d.classes().len() < 2 {
            self.nodes.push(leaf);
            return Ok(at);
        }
        let found = match self.search(d)? {
            Some(found) if found.split.gain > 0.0 => found,
            _ => {
                self.nodes.push(leaf);
                return Ok(at);
            }
        };
        let (left_data, right_data) = split_dataset(d, &found.distances, found.split.split_distance)?;
        if left_data.is_empty() || right_data.is_empty() {
            self.nodes.push(leaf);
            return Ok(at);
        }
        self.nodes.push(Node::Leaf { label: 0 });
        let left = self.grow(&left_data)?;
        let right = self.grow(&right_data)?;
        self.nodes[at] = Node::Internal {
            shapelet: found.shapelet,
            split_distance: found.split.split_distance,
            left,
            right,
        };
        Ok(at)
    }
}

/// Grow a tree until every leaf is pure or has no informative split. Nodes are
/// expanded depth first, left before right, all drawing on `rng`.
pub fn create_tree<R: Rng + ?Sized>(
    d: &Dataset,
    cfg: &TreeConfig,
    rng: &mut R,
    deadline: Option<Instant>,
) -> Result<(ShapeletTree, SearchStats)> {
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    check_lengths(cfg.min_len, cfg.max_len, d.series_length())?;
    cfg.sampling.validate()?;
    let mut builder = Builder {
        cfg,
        rng,
        deadline,
        nodes: Vec::new(),
        stats: SearchStats::default(),
    };
    builder.grow(d)?;
    Ok((ShapeletTree { nodes: builder.nodes }, builder.stats))
}
