//! UCR-format loading, summary statistics and resampling.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};

/// Class identifier. UCR stores labels as reals ("1.0000000e+00"), but they
/// are always integral.
pub type Label = i64;

/// A labelled series with prefix sums of values and squared values, so the
/// mean and standard deviation of any window cost O(1).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    label: Label,
    values: Vec<f64>,
    cum_sum: Vec<f64>,
    cum_sq: Vec<f64>,
}

impl TimeSeries {
    pub fn new(label: Label, values: Vec<f64>) -> Self {
        let mut cum_sum = Vec::with_capacity(values.len() + 1);
        let mut cum_sq = Vec::with_capacity(values.len() + 1);
        let (mut s, mut q) = (0.0, 0.0);
        cum_sum.push(s);
        cum_sq.push(q);
        for &v in &values {
            s += v;
            q += v * v;
            cum_sum.push(s);
            cum_sq.push(q);
        }
        TimeSeries {
            label,
            values,
            cum_sum,
            cum_sq,
        }
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cum_sum(&self) -> &[f64] {
        &self.cum_sum
    }

    pub fn cum_sq(&self) -> &[f64] {
        &self.cum_sq
    }

    /// Mean and population standard deviation of `values[start..start + len]`.
    ///
    /// The caller guarantees `len > 0` and that the window is in bounds.
    #[inline]
    pub(crate) fn window_stats_unchecked(&self, start: usize, len: usize) -> (f64, f64) {
        let n = len as f64;
        let sum = self.cum_sum[start + len] - self.cum_sum[start];
        let sq = self.cum_sq[start + len] - self.cum_sq[start];
        let mean = sum / n;
        let var = sq / n - mean * mean;
        // The rounding error of `var` grows with the prefix sums, not with the
        // window; recompute directly when it could reach 1e-9 of the result.
        if var <= 1e-6 * (self.cum_sq[start + len] / n) {
            let w = &self.values[start..start + len];
            let mean = w.iter().sum::<f64>() / n;
            let var = w.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
            return (mean, var.sqrt());
        }
        (mean, var.sqrt())
    }

    /// Mean and population standard deviation of a window, from the prefix sums.
    pub fn window_stats(&self, start: usize, len: usize) -> Result<(f64, f64)> {
        if len == 0 || start + len > self.len() {
            return Err(Error::WindowOutOfBounds {
                start,
                len,
                series_length: self.len(),
            });
        }
        Ok(self.window_stats_unchecked(start, len))
    }
}

/// Ordered instances with per-instance weights.
///
/// Series are reference counted: bootstrap samples and tree-node subsets share
/// storage with the dataset they came from.
#[derive(Debug, Clone)]
pub struct Dataset {
    instances: Vec<Arc<TimeSeries>>,
    weights: Vec<f64>,
    classes: Vec<Label>,
    series_length: usize,
}

impl Dataset {
    /// Dataset with uniform weights `1/k`.
    pub fn new(instances: Vec<Arc<TimeSeries>>) -> Result<Self> {
        let k = instances.len();
        let weights = vec![if k == 0 { 0.0 } else { 1.0 / k as f64 }; k];
        Self::with_weights(instances, weights)
    }

    pub fn from_series(series: Vec<TimeSeries>) -> Result<Self> {
        Self::new(series.into_iter().map(Arc::new).collect())
    }

    /// Dataset with explicit weights. Weights must be finite and non-negative;
    /// they are not renormalised.
    pub fn with_weights(instances: Vec<Arc<TimeSeries>>, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != instances.len() {
            return Err(Error::LengthMismatch {
                left: instances.len(),
                right: weights.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidWeights(format!("{w} is not a finite non-negative weight")));
        }
        let series_length = instances.first().map_or(0, |t| t.len());
        for (i, t) in instances.iter().enumerate() {
            if t.len() != series_length {
                return Err(Error::InconsistentLength {
                    line: i + 1,
                    expected: series_length,
                    found: t.len(),
                });
            }
        }
        let mut classes: Vec<Label> = instances.iter().map(|t| t.label()).collect();
        classes.sort_unstable();
        classes.dedup();
        Ok(Dataset {
            instances,
            weights,
            classes,
            series_length,
        })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn instances(&self) -> &[Arc<TimeSeries>] {
        &self.instances
    }

    pub fn instance(&self, i: usize) -> &TimeSeries {
        &self.instances[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Sorted distinct labels.
    pub fn classes(&self) -> &[Label] {
        &self.classes
    }

    pub fn series_length(&self) -> usize {
        self.series_length
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Per-class weight totals, in label order.
    pub fn class_weights(&self) -> BTreeMap<Label, f64> {
        let mut totals = BTreeMap::new();
        for (t, &w) in self.instances.iter().zip(&self.weights) {
            *totals.entry(t.label()).or_insert(0.0) += w;
        }
        totals
    }

    /// Same instances, new weights.
    pub fn reweighted(&self, weights: Vec<f64>) -> Result<Self> {
        Self::with_weights(self.instances.clone(), weights)
    }

    /// Instances at `indices` (repeats allowed), carrying their weights.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let instances = indices.iter().map(|&i| Arc::clone(&self.instances[i])).collect();
        let weights = indices.iter().map(|&i| self.weights[i]).collect();
        let mut classes: Vec<Label> = indices.iter().map(|&i| self.instances[i].label()).collect();
        classes.sort_unstable();
        classes.dedup();
        Dataset {
            instances,
            weights,
            classes,
            series_length: self.series_length,
        }
    }

    /// `|d|` draws with replacement, one `gen_range` draw per slot in slot
    /// order. The sample gets uniform weights.
    pub fn bootstrap<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Self> {
        let indices = bootstrap_indices(self.len(), rng)?;
        let instances = indices.iter().map(|&i| Arc::clone(&self.instances[i])).collect();
        Self::new(instances)
    }

    /// Number of candidate subsequences with lengths in `[min_len, max_len]`.
    pub fn candidate_count(&self, min_len: usize, max_len: usize) -> Result<u64> {
        check_lengths(min_len, max_len, self.series_length)?;
        let m = self.series_length as u64;
        let per_instance: u64 = (min_len as u64..=max_len as u64).map(|l| m - l + 1).sum();
        Ok(per_instance * self.len() as u64)
    }
}

pub(crate) fn check_lengths(min_len: usize, max_len: usize, series_length: usize) -> Result<()> {
    if min_len == 0 || min_len > max_len || max_len > series_length {
        return Err(Error::InvalidLengths {
            min_len,
            max_len,
            series_length,
        });
    }
    Ok(())
}

/// Indices of a bootstrap sample of size `n`.
pub fn bootstrap_indices<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok((0..n).map(|_| rng.gen_range(0..n)).collect())
}

/// Parse UCR flat-file text: one instance per line, label first, fields
/// separated by commas and/or whitespace. Blank lines are skipped.
pub fn parse_ucr(text: &str) -> Result<Dataset> {
    let mut series = Vec::new();
    let mut expected = None;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let mut fields = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .map(|f| {
                f.parse::<f64>().map_err(|_| Error::NonNumeric {
                    line: line_no,
                    token: f.to_string(),
                })
            });
        let Some(label) = fields.next() else { continue };
        let label = label?;
        if !label.is_finite() || label.fract() != 0.0 {
            return Err(Error::NonIntegralLabel {
                line: line_no,
                value: label,
            });
        }
        let values = fields.collect::<Result<Vec<f64>>>()?;
        if values.is_empty() {
            return Err(Error::EmptyRow { line: line_no });
        }
        match expected {
            None => expected = Some(values.len()),
            Some(m) if m != values.len() => {
                return Err(Error::InconsistentLength {
                    line: line_no,
                    expected: m,
                    found: values.len(),
                })
            }
            _ => {}
        }
        series.push(TimeSeries::new(label as Label, values));
    }
    if series.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Dataset::from_series(series)
}

pub fn load_ucr(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_ucr(&text)
}
